"""Toy multilingual data with known structure, for demos and tests.

Words come in translation triples (en, de, es) that share one concept
vector, so the three vocabularies live in a single aligned space. Concept
vectors of positive and negative words are pushed apart along a fixed
sentiment direction; neutral words sit around the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .embeddings import EmbeddingTable
from .sentiment import LabeledExample

POSITIVE = [
    ("good", "gut", "bueno"),
    ("great", "toll", "genial"),
    ("love", "liebe", "amor"),
    ("wonderful", "wunderbar", "maravilloso"),
    ("beautiful", "schön", "hermoso"),
    ("brilliant", "großartig", "brillante"),
    ("happy", "glücklich", "feliz"),
    ("best", "beste", "mejor"),
]
NEGATIVE = [
    ("bad", "schlecht", "malo"),
    ("boring", "langweilig", "aburrido"),
    ("hate", "hass", "odio"),
    ("awful", "furchtbar", "horrible"),
    ("sad", "traurig", "triste"),
    ("worst", "schlechteste", "peor"),
    ("disappointing", "enttäuschend", "decepcionante"),
    ("ugly", "hässlich", "feo"),
]
NEUTRAL = [
    ("film", "filmen", "película"),
    ("festival", "festspiele", "festival_es"),
    ("berlin", "berlin_de", "berlín"),
    ("cinema", "kino", "cine"),
    ("premiere", "premiere_de", "estreno"),
    ("director", "regisseur", "director_es"),
    ("actor", "schauspieler", "actor_es"),
    ("ticket", "karte", "entrada"),
    ("today", "heute", "hoy"),
    ("review", "kritik", "reseña"),
    ("drama", "drama_de", "drama_es"),
    ("audience", "publikum", "público"),
]
LANGS = ("en", "de", "es")


@dataclass
class ToyVocabulary:
    table: EmbeddingTable
    words: dict  # (polarity, lang) -> list of tokens

    def pick(self, rng, polarity, lang, k):
        pool = self.words[(polarity, lang)]
        return [pool[j] for j in rng.integers(0, len(pool), size=k)]


def make_vocabulary(seed=0, dim=16, separation=2.0, noise=0.35, lang_noise=0.05):
    """Aligned toy embeddings for all three languages in one table."""
    rng = np.random.default_rng(seed)
    direction = np.zeros(dim)
    direction[0] = 1.0
    tokens, rows, words = [], [], {}
    for polarity, triples, shift in (
        ("positive", POSITIVE, separation),
        ("negative", NEGATIVE, -separation),
        ("neutral", NEUTRAL, 0.0),
    ):
        for triple in triples:
            concept = rng.normal(0.0, noise, size=dim) + shift * direction
            for lang, tok in zip(LANGS, triple):
                tokens.append(tok)
                rows.append(concept + rng.normal(0.0, lang_noise, size=dim))
                words.setdefault((polarity, lang), []).append(tok)
    return ToyVocabulary(EmbeddingTable(tokens, np.array(rows)), words)


def random_rotation(dim, rng):
    """Haar-distributed orthogonal matrix from the QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    return q * np.sign(np.diag(r))


def make_labeled_examples(vocab: ToyVocabulary, n, seed=0, min_len=3, max_len=7):
    """Balanced labeled texts: polar words mixed with neutral filler."""
    rng = np.random.default_rng(seed)
    out = []
    for j in range(n):
        label = j % 2
        lang = LANGS[rng.integers(0, 3)]
        length = int(rng.integers(min_len, max_len + 1))
        n_polar = int(rng.integers(1, length + 1))
        tokens = vocab.pick(rng, "positive" if label else "negative", lang, n_polar)
        tokens += vocab.pick(rng, "neutral", lang, length - n_polar)
        rng.shuffle(tokens)
        out.append(LabeledExample(tuple(tokens), label))
    return out


def make_training_set(vocab: ToyVocabulary, n, neutral_pairs=0, seed=0):
    """Labeled examples plus neutral-only texts that appear once per label.

    The neutral pairs carry no label signal, which teaches a scorer to put
    neutral text near 0.5 instead of extrapolating.
    """
    data = make_labeled_examples(vocab, n, seed=seed)
    rng = np.random.default_rng([seed, 7])
    for j in range(neutral_pairs):
        tokens = tuple(vocab.pick(rng, "neutral", LANGS[j % 3], int(rng.integers(4, 9))))
        data += [LabeledExample(tokens, 0), LabeledExample(tokens, 1)]
    return data


def make_stream(
    vocab: ToyVocabulary,
    n=3400,
    seed=0,
    bursts=((1000, 40, "positive"), (2200, 40, "negative")),
    start=datetime(2019, 2, 7, tzinfo=timezone.utc),
    span=timedelta(days=11),
    polar_rate=0.0,
):
    """Time-ordered JSONL-ready rows with injected polar bursts.

    Background texts are neutral filler; a fraction ``polar_rate`` of
    them carries one polar word of random sign. Burst texts are dominated
    by words of one polarity.
    Returns ``(rows, injected)`` where ``injected`` maps polarity to the
    row indices of its burst.
    """
    rng = np.random.default_rng(seed)
    step = span / n
    burst_of = {}
    for begin, length, polarity in bursts:
        for i in range(begin, begin + length):
            burst_of[i] = polarity
    rows, injected = [], {"positive": [], "negative": []}
    for i in range(n):
        lang = LANGS[rng.integers(0, 3)]
        length = int(rng.integers(4, 9))
        if i in burst_of:
            polarity = burst_of[i]
            injected[polarity].append(i)
            tokens = vocab.pick(rng, polarity, lang, length - 1) + vocab.pick(rng, "neutral", lang, 1)
        else:
            tokens = vocab.pick(rng, "neutral", lang, length)
            if rng.random() < polar_rate:
                tokens[0] = vocab.pick(rng, "positive" if rng.random() < 0.5 else "negative", lang, 1)[0]
        rng.shuffle(tokens)
        when = start + step * i
        rows.append(
            {
                "id": f"t{i:05d}",
                "text": " ".join(tokens),
                "created_at": when.strftime("%Y-%m-%dT%H:%M:%SZ"),
                "lang": lang,
            }
        )
    return rows, injected
