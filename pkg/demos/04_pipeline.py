"""The whole command-line pipeline on a synthetic festival stream.

Writes everything under ./demo_out and prints the summary.
Run: python demos/04_pipeline.py   (about fifteen seconds)
"""

# %% Inputs: aligned vectors, labeled texts and a stream with two injected bursts
import json
from pathlib import Path

from distread.cli import main
from distread.embeddings import write_embeddings
from distread.synthetic import make_stream, make_training_set, make_vocabulary

out = Path("demo_out")
out.mkdir(exist_ok=True)
vocab = make_vocabulary(seed=0)
with open(out / "vectors.vec", "w", encoding="utf-8") as fh:
    write_embeddings(vocab.table, fh)
with open(out / "train.jsonl", "w", encoding="utf-8") as fh:
    for ex in make_training_set(vocab, 800, neutral_pairs=400, seed=1):
        fh.write(json.dumps({"text": " ".join(ex.tokens), "label": ex.label}, ensure_ascii=False) + "\n")
rows, injected = make_stream(vocab, n=3400, seed=0)
with open(out / "tweets.jsonl", "w", encoding="utf-8") as fh:
    for row in rows:
        fh.write(json.dumps(row, ensure_ascii=False) + "\n")
print("bursts at rows", {p: (idx[0], idx[-1]) for p, idx in injected.items()})

# %% Train a scorer, then analyze the stream
main(["train", "--train-data", str(out / "train.jsonl"), "--embeddings", str(out / "vectors.vec"),
      "--hidden-dim", "8", "--lr", "0.5", "--out-dir", str(out)])
main(["analyze", "--corpus", str(out / "tweets.jsonl"), "--embeddings", str(out / "vectors.vec"),
      "--weights", str(out / "model.mlsw"), "--out-dir", str(out)])

# %% What came out: report.json, scores.csv, timeline.svg and summary.txt
print((out / "summary.txt").read_text(encoding="utf-8"))
report = json.loads((out / "report.json").read_text(encoding="utf-8"))
for region in report["regions"]:
    print(region["polarity"], region["start"], "..", region["end"], "top:", region["top_terms"][:3])
print("open", out / "timeline.svg", "in a browser to see the chart")
