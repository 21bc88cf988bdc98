"""Aligning two embedding spaces with an orthogonal map, then querying with CSLS.

Run: python demos/01_alignment.py
"""

# %% A toy vocabulary: English, German and Spanish words sharing concept vectors
import numpy as np

from distread.embeddings import EmbeddingTable, csls_neighbors, procrustes_align
from distread.synthetic import make_vocabulary, random_rotation

vocab = make_vocabulary(seed=0)
table = vocab.table
polarities = ("positive", "negative", "neutral")
english = [w for pol in polarities for w in vocab.words[(pol, "en")]]
german = [w for pol in polarities for w in vocab.words[(pol, "de")]]  # same order: translations
print(len(table), "tokens,", table.dim, "dimensions")

# %% Pretend the German vectors were trained separately: rotate them away
rng = np.random.default_rng(1)
R = random_rotation(table.dim, rng)
de_rows = np.array([table.lookup(w) for w in german]) @ R.T
german_space = EmbeddingTable(german, de_rows)
en_space = EmbeddingTable(english, np.array([table.lookup(w) for w in english]))

# %% Translation pairs share a concept; most of them form the seed dictionary
order = list(zip(english, german))
rng.shuffle(order)
pairs, held_out = order[:20], order[20:]
X = np.array([german_space.lookup(d) for _, d in pairs])
Y = np.array([en_space.lookup(e) for e, _ in pairs])
mapping = procrustes_align(X, Y, "de", "en")
print("orthogonality residual:", mapping.residual())
print("max |W - R^T|:", np.max(np.abs(mapping.W - R.T)), "(languages differ by small noise)")

# %% Held-out words: map each German vector and look up its English neighbors
aligned = mapping.apply_table(german_space).normalize_rows()
en_norm = en_space.normalize_rows()
hits = 0
for en_word, de_word in held_out:
    best = csls_neighbors(aligned.lookup(de_word), en_norm, k=5, top=1)[0]
    hits += best == en_word
print(f"CSLS precision@1 on held-out pairs: {hits}/{len(held_out)}")
for en_word, de_word in held_out[:5]:
    print(f"  {de_word:>14} -> {csls_neighbors(aligned.lookup(de_word), en_norm, k=5, top=3)}")
