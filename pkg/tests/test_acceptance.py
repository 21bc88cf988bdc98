"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

The lines are collected in ``conftest.ACCEPTANCE_LINES`` and printed in the
terminal summary, so a plain ``pytest`` run ends with the verdicts.
"""

import contextlib
import csv
import io
import json
import math
import time
import xml.etree.ElementTree as ET

import numpy as np

import conftest
from distread.cli import main
from distread.embeddings import procrustes_align
from distread.esd import EsdConfig, esd_test, t_quantile
from distread.report import OutlierReport
from distread.sentiment import (
    ModelConfig,
    SentimentModel,
    TrainConfig,
    backward,
    load_weights,
    save_weights,
    train,
)
from distread.synthetic import make_stream, make_training_set, random_rotation
from distread.timeline import moving_average
from test_esd import ROSNER, brute_force_esd
from test_sentiment import max_relative_error, numeric_gradients
from test_timeline import brute_moving_average

CLOCK = "2020-01-01T00:00:00Z"


@contextlib.contextmanager
def criterion(number, title):
    detail = {}
    try:
        yield detail
    except BaseException:
        conftest.ACCEPTANCE_LINES.append(f"[FAIL] {number:2d}. {title} {_fmt(detail)}")
        raise
    conftest.ACCEPTANCE_LINES.append(f"[PASS] {number:2d}. {title} {_fmt(detail)}")


def _fmt(detail):
    return "(" + ", ".join(f"{k}={v}" for k, v in detail.items()) + ")" if detail else ""


def test_01_esd_matches_brute_force_oracle():
    with criterion(1, "ESD equals brute-force oracle on 200 series") as d:
        rng = np.random.default_rng(2024)
        worst = 0.0
        elapsed = 0.0
        for _ in range(200):
            n = int(rng.integers(25, 501))
            x = rng.normal(size=n)
            k = int(rng.integers(0, 4))
            if k:
                x[rng.choice(n, size=k, replace=False)] += rng.choice([-1, 1], size=k) * rng.uniform(3, 6, size=k)
            r = math.ceil(0.05 * n)
            start = time.perf_counter()
            res = esd_test(x, EsdConfig(0.05, r))
            elapsed += time.perf_counter() - start
            R, lam, outliers = brute_force_esd(x, 0.05, r)
            assert res.num_outliers == len(outliers)
            assert res.outlier_indices == outliers
            worst = max(worst, float(np.max(np.abs(np.subtract(res.R, R)))),
                        float(np.max(np.abs(np.subtract(res.lam, lam)))))
        d.update(max_abs_diff=f"{worst:.1e}", seconds=f"{elapsed:.2f}")
        assert worst <= 1e-8
        assert elapsed < 10.0


def test_02_rosner_reference_example():
    with criterion(2, "Rosner n=54 reference example") as d:
        res = esd_test(ROSNER, EsdConfig(alpha=0.05, r=10))
        d.update(num_outliers=res.num_outliers, indices=res.outlier_indices)
        assert res.num_outliers == 3
        assert res.outlier_indices == [53, 52, 51]


def test_03_t_quantile_accuracy():
    with criterion(3, "t quantile accuracy") as d:
        grid = np.linspace(0.001, 0.999, 999)
        cauchy = max(abs(t_quantile(p, 1) - math.tan(math.pi * (p - 0.5))) for p in np.linspace(0.05, 0.95, 91))
        normal = abs(t_quantile(0.975, 10**6) - 1.95996)
        monotone = all(
            np.all(np.diff([t_quantile(p, nu) for p in grid]) > 0) for nu in (1, 2, 5, 30, 1000)
        )
        d.update(cauchy_err=f"{cauchy:.1e}", normal_err=f"{normal:.1e}", monotone=monotone)
        assert cauchy <= 1e-8
        assert normal <= 1e-3
        assert monotone


def test_04_procrustes_recovery():
    with criterion(4, "Procrustes recovers planted rotations") as d:
        rng = np.random.default_rng(99)
        worst_err = worst_res = 0.0
        for _ in range(20):
            R = random_rotation(10, rng)
            X = rng.normal(size=(50, 10))
            m = procrustes_align(X, X @ R.T)
            worst_err = max(worst_err, float(np.max(np.abs(m.W - R))))
            worst_res = max(worst_res, m.residual())
        d.update(max_err=f"{worst_err:.1e}", max_residual=f"{worst_res:.1e}")
        assert worst_err < 1e-6
        assert worst_res < 1e-8


def test_05_lstm_gradient_check():
    with criterion(5, "LSTM gradients match finite differences") as d:
        worst = 0.0
        for seed in range(10):
            rng = np.random.default_rng([seed, 5])
            H = 1 + seed % 4
            model = SentimentModel.init(ModelConfig(3, H), seed=seed)
            for v in model.params.values():
                v *= 2.0  # leave the near-linear regime of tiny weights
            batch = [(rng.normal(size=(int(rng.integers(1, 5)), 3)), int(rng.integers(0, 2))) for _ in range(2)]
            _, grads = backward(model, batch)
            worst = max(worst, max_relative_error(grads, numeric_gradients(model, batch, eps=1e-4)))
        d.update(max_rel_err=f"{worst:.1e}")
        assert worst < 1e-3


def test_06_training_on_toy_corpus(vocab, table):
    with criterion(6, "4-epoch training on the toy multilingual corpus") as d:
        data = make_training_set(vocab, 2000, seed=0)
        model = SentimentModel.init(ModelConfig(table.dim, 8), seed=0)
        _, report = train(model, data, TrainConfig(epochs=4, seed=0), table)
        losses = [e.train_loss for e in report.epochs]
        d.update(test_acc=report.test_accuracy, losses=[round(v, 4) for v in losses], sizes=report.sizes)
        assert report.sizes == {"train": 1600, "valid": 200, "test": 200}
        assert report.test_accuracy >= 0.95
        assert all(b <= a + 1e-3 for a, b in zip(losses, losses[1:]))


def test_07_moving_average():
    with criterion(7, "moving average equals brute force") as d:
        rng = np.random.default_rng(7)
        worst = 0.0
        for n in (1, 24, 25, 26, 500, 2000):
            xs = rng.random(n)
            worst = max(worst, float(np.max(np.abs(moving_average(xs) - brute_moving_average(list(xs), 25)))))
        # the default window is 25: the 25th output is the mean of the first 25 values only
        xs = np.arange(30.0)
        default_ok = moving_average(xs)[25] == np.mean(xs[1:26])
        d.update(max_abs_diff=f"{worst:.1e}", default_window_25=default_ok)
        assert worst <= 1e-12
        assert default_ok


def test_08_end_to_end_injection(tmp_path, vocab):
    with criterion(8, "end-to-end injected bursts recovered") as d:
        start = time.perf_counter()
        rows, injected = make_stream(vocab, n=3400, seed=0)
        corpus = conftest.write_jsonl(tmp_path / "tweets.jsonl", rows)
        vectors = conftest.write_vec(tmp_path / "vectors.vec", vocab.table)
        labeled = [
            {"text": " ".join(ex.tokens), "label": ex.label}
            for ex in make_training_set(vocab, 800, neutral_pairs=400, seed=1)
        ]
        train_data = conftest.write_jsonl(tmp_path / "train.jsonl", labeled)
        out = tmp_path / "out"
        assert main(["train", "--train-data", str(train_data), "--embeddings", str(vectors),
                     "--hidden-dim", "8", "--lr", "0.5", "--out-dir", str(out)]) == 0
        assert main(["analyze", "--corpus", str(corpus), "--embeddings", str(vectors),
                     "--weights", str(out / "model.mlsw"), "--out-dir", str(out)]) == 0
        elapsed = time.perf_counter() - start

        report = json.loads((out / "report.json").read_text())
        with open(out / "scores.csv", newline="") as fh:
            surviving = {row["id"] for row in csv.DictReader(fh)}
        coverage = {}
        for polarity, idx in injected.items():
            ids = {rows[i]["id"] for i in idx} & surviving
            covered = set().union(*[set(r["ids"]) for r in report["regions"] if r["polarity"] == polarity])
            coverage[polarity] = len(ids & covered) / len(ids)
        d.update(records=len(rows), coverage=coverage, seconds=f"{elapsed:.1f}")
        assert 3000 <= len(rows) <= 3500
        assert all(c >= 0.9 for c in coverage.values())
        assert elapsed < 60.0


def test_09_determinism(tmp_path, vocab, pipeline_files):
    with criterion(9, "train and analyze are byte-deterministic") as d:
        labeled = [
            {"text": " ".join(ex.tokens), "label": ex.label}
            for ex in make_training_set(vocab, 200, neutral_pairs=50, seed=2)
        ]
        data = conftest.write_jsonl(tmp_path / "train.jsonl", labeled)
        vectors = pipeline_files["embeddings"]
        out = tmp_path / "out"
        names = ("model.mlsw", "metrics.json", "report.json", "scores.csv", "timeline.svg")
        runs = []
        # same paths both times: the report echoes its input paths
        for _ in range(2):
            assert main(["train", "--train-data", str(data), "--embeddings", str(vectors), "--hidden-dim", "4",
                         "--seed", "17", "--fixed-clock", CLOCK, "--out-dir", str(out)]) == 0
            assert main(["analyze", "--corpus", str(pipeline_files["corpus"]), "--embeddings", str(vectors),
                         "--weights", str(out / "model.mlsw"), "--fixed-clock", CLOCK,
                         "--out-dir", str(out)]) == 0
            runs.append({n: (out / n).read_bytes() for n in names})
        same = {n: runs[0][n] == runs[1][n] for n in names}
        d.update(identical=sum(same.values()), of=len(names))
        assert all(same.values())


def test_10_format_round_trips(tmp_path, pipeline_files):
    with criterion(10, "weight file, report JSON and SVG formats") as d:
        raw = pipeline_files["weights"].read_bytes()
        model = load_weights(io.BytesIO(raw))
        buf = io.BytesIO()
        save_weights(model, buf)
        weights_ok = buf.getvalue() == raw

        out = tmp_path / "out"
        assert main(["analyze", "--corpus", str(pipeline_files["corpus"]),
                     "--embeddings", str(pipeline_files["embeddings"]),
                     "--weights", str(pipeline_files["weights"]), "--fixed-clock", CLOCK,
                     "--out-dir", str(out)]) == 0
        text = (out / "report.json").read_text("utf-8")
        report = OutlierReport.from_json(text)
        report_ok = report.to_json() == text and OutlierReport.from_json(report.to_json()) == report

        root = ET.parse(out / "timeline.svg").getroot()
        n_circles = len(root.findall("{http://www.w3.org/2000/svg}circle"))
        svg_ok = n_circles == report.corpus["scored"]
        d.update(weights=weights_ok, report=report_ok, svg_points=n_circles)
        assert weights_ok and report_ok and svg_ok
