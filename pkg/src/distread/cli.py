"""Command-line entry point: ``distread {align,train,score,analyze,report}``.

Every option can also be given in a flat ``key = value`` config file passed
with ``--config``; command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .corpus import LANGS, load_stopwords, read_corpus, tokenize
from .embeddings import (
    dictionary_matrices,
    load_dictionary,
    procrustes_align,
    read_embeddings,
    write_embeddings,
)
from .errors import DistreadError, EmptyAnalysisError, InputError
from .pipeline import AnalysisSettings, analyze, build_report, score_corpus
from .report import OutlierReport, read_scores_csv, render_summary, render_svg, write_scores_csv
from .sentiment import (
    LabeledExample,
    ModelConfig,
    SentimentModel,
    TrainConfig,
    load_scorer,
    save_weights,
    train,
    train_baseline,
)
from .timeline import ScoreSeries, moving_average


def _bool(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_int(text):
    return None if str(text).strip().lower() in ("", "auto", "none") else int(text)


# key -> (type, default, commands, help); "*" marks global options
OPTIONS = {
    "seed": (int, 0, "*", "seed for every random choice"),
    "out_dir": (str, ".", "*", "directory for all outputs"),
    "fixed_clock": (str, None, "*", "ISO timestamp written instead of the wall clock"),
    "source_embeddings": (str, None, "align", "vectors to map"),
    "target_embeddings": (str, None, "align", "vectors of the target space"),
    "dictionary": (str, None, "align", "seed dictionary, one 'source target' pair per line"),
    "source_lang": (str, "unknown", "align", "language of the source vectors"),
    "target_lang": (str, "unknown", "align", "language of the target vectors"),
    "output": (str, None, "align", "aligned vector file (default OUT_DIR/aligned.vec)"),
    "train_data": (str, None, "train", "labeled texts (.jsonl or .csv with text,label)"),
    "scorer": (str, "lstm", "train", "lstm or baseline"),
    "hidden_dim": (int, 300, "train", "LSTM hidden units per direction"),
    "layers": (int, 2, "train", "stacked LSTM layers"),
    "epochs": (int, 4, "train", "passes over the training split"),
    "lr": (float, 0.1, "train", "SGD learning rate"),
    "batch_size": (int, 16, "train", "examples per SGD step"),
    "clip": (float, 5.0, "train", "global gradient L2 clipping threshold"),
    "corpus": (str, None, "score analyze", "tweets (.jsonl or .csv)"),
    "embeddings": (str, None, "train score analyze", "aligned vector file(s), comma-separated"),
    "weights": (str, None, "train score analyze", "weight file (train: output path)"),
    "normalize": (_bool, True, "train score analyze", "L2-normalize vectors before scoring"),
    "dedup": (_bool, True, "score analyze", "drop exact duplicate texts"),
    "window": (int, 25, "score analyze", "moving-average window"),
    "gap": (int, 5, "analyze", "max index gap inside one outlier region"),
    "alpha": (float, 0.05, "analyze", "ESD significance level"),
    "r": (_opt_int, None, "analyze", "ESD upper bound on outliers (auto: ceil(0.05 n))"),
    "detrend": (_bool, False, "analyze", "run ESD on scores minus moving average"),
    "top_k": (int, 50, "analyze", "terms kept per region"),
    "stopwords": (str, None, "analyze", "directory with stopwords.{en,de,es}.txt"),
    "report": (str, None, "report", "report JSON (default OUT_DIR/report.json)"),
    "scores": (str, None, "report", "scores CSV (default OUT_DIR/scores.csv)"),
}
COMMANDS = ("align", "train", "score", "analyze", "report")
GLOBAL_KEYS = [k for k, spec in OPTIONS.items() if spec[2] == "*"]


def _applies(key, command):
    where = OPTIONS[key][2]
    return where == "*" or command in where.split()


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment line."""
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from exc
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise InputError(f"config line {lineno}: expected key = value")
        if key not in OPTIONS:
            raise InputError(f"config line {lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    parser = argparse.ArgumentParser(prog="distread", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    # global options are accepted before the subcommand as well
    parser.add_argument("--config", dest="global_config", help="flat key = value config file")
    for key in GLOBAL_KEYS:
        typ = OPTIONS[key][0]
        parser.add_argument("--" + key.replace("_", "-"), dest="global_" + key, type=typ, default=None)
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command, parents=[common])
        for key, (typ, default, _, help_) in OPTIONS.items():
            if not _applies(key, command):
                continue
            flag = "--" + key.replace("_", "-")
            if typ is _bool:
                p.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction, default=None,
                               help=f"{help_} (default {default})")
            else:
                p.add_argument(flag, dest=key, type=typ, default=None, help=f"{help_} (default {default})")
    return parser


def resolve_options(args) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    config_path = args.config or args.global_config
    file_values = read_config(config_path) if config_path else {}
    opts = {}
    for key, (typ, default, _, _) in OPTIONS.items():
        if not _applies(key, args.command):
            continue
        value = default
        if key in file_values:
            try:
                value = typ(file_values[key])
            except ValueError as exc:
                raise InputError(f"config key {key}: {exc}") from exc
        flag_value = getattr(args, key, None)
        if flag_value is None:
            flag_value = getattr(args, "global_" + key, None)
        if flag_value is not None:
            value = flag_value
        opts[key] = value
    return opts


# -- helpers -------------------------------------------------------------------


def _require(opts, *keys):
    for key in keys:
        if not opts.get(key):
            raise InputError(f"missing required option --{key.replace('_', '-')}")


def _existing(path, what):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} not found: {path}")
    return p


def _out_dir(opts) -> Path:
    out = Path(opts["out_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc.strerror}") from exc
    return out


def _now(opts) -> str:
    if opts.get("fixed_clock"):
        return opts["fixed_clock"]
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _load_table(opts):
    table = None
    for path in opts["embeddings"].split(","):
        part = read_embeddings(_existing(path.strip(), "embeddings"))
        table = part if table is None else table.merge(part)
    return table.normalize_rows() if opts["normalize"] else table


def _load_model(path):
    with open(_existing(path, "weights"), "rb") as fh:
        return load_scorer(fh)


def _model_meta(path, scorer):
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    if isinstance(scorer, SentimentModel):
        meta = {"scorer": "lstm", "architecture": asdict(scorer.config)}
    else:
        meta = {"scorer": "baseline", "architecture": {"embed_dim": scorer.dim}}
    meta.update({"weights_sha256": digest, "version": __version__})
    return meta


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_labeled(path):
    """Labeled training texts from JSONL or CSV rows with ``text`` and ``label``."""
    p = _existing(path, "training data")
    try:
        text = p.read_text("utf-8")
    except UnicodeDecodeError as exc:
        raise InputError(f"training data is not valid UTF-8: {path}") from exc
    if p.suffix.lower() == ".csv":
        rows = list(csv.DictReader(io.StringIO(text, newline="")))
    else:
        rows = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if line.strip():
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise InputError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
    examples = []
    for lineno, row in enumerate(rows, start=1):
        try:
            label = int(row["label"])
            examples.append(LabeledExample(tuple(tokenize(row["text"])), label))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: bad labeled row {lineno}: {exc}") from exc
    return examples


# -- commands ------------------------------------------------------------------


def cmd_align(opts):
    _require(opts, "source_embeddings", "target_embeddings", "dictionary")
    source = read_embeddings(_existing(opts["source_embeddings"], "source embeddings"))
    target = read_embeddings(_existing(opts["target_embeddings"], "target embeddings"))
    with open(_existing(opts["dictionary"], "dictionary"), "rb") as fh:
        pairs = load_dictionary(fh)
    X, Y = dictionary_matrices(pairs, source, target)
    if X.shape[0] == 0:
        raise InputError("no dictionary pair has both tokens in the vector files")
    mapping = procrustes_align(X, Y, opts["source_lang"], opts["target_lang"])
    out = Path(opts["output"]) if opts["output"] else _out_dir(opts) / "aligned.vec"
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        write_embeddings(mapping.apply_table(source), fh)
    print(f"pairs used: {X.shape[0]} of {len(pairs)}")
    print(f"orthogonality residual: {mapping.residual():.3e}")
    print(f"wrote {out}")
    return 0


def cmd_train(opts):
    _require(opts, "train_data", "embeddings")
    table = _load_table(opts)
    dataset = read_labeled(opts["train_data"])
    if not dataset:
        raise InputError("training data is empty")
    cfg = TrainConfig(
        epochs=opts["epochs"], lr=opts["lr"], batch_size=opts["batch_size"],
        clip=opts["clip"], seed=opts["seed"],
    )
    if opts["scorer"] == "lstm":
        model = SentimentModel.init(
            ModelConfig(table.dim, opts["hidden_dim"], opts["layers"], True), opts["seed"]
        )
        model, report = train(model, dataset, cfg, table)
        architecture = asdict(model.config)
    elif opts["scorer"] == "baseline":
        model, report = train_baseline(dataset, table, cfg)
        architecture = {"embed_dim": table.dim}
    else:
        raise InputError(f"unknown scorer {opts['scorer']!r} (expected lstm or baseline)")

    out = _out_dir(opts)
    weights = Path(opts["weights"]) if opts["weights"] else out / "model.mlsw"
    with open(weights, "wb") as fh:
        save_weights(model, fh)
    metrics = {
        "schema_version": 1,
        "generated_at": _now(opts),
        "scorer": opts["scorer"],
        "architecture": architecture,
        "train_config": asdict(cfg),
        **report.to_dict(),
    }
    _write_text(out / "metrics.json", json.dumps(metrics, indent=2) + "\n")
    for e in report.epochs:
        valid = "-" if e.valid_accuracy is None else f"{e.valid_accuracy:.3f}"
        print(f"epoch {e.epoch}: train loss {e.train_loss:.4f} acc {e.train_accuracy:.3f} valid acc {valid}")
    if report.test_accuracy is not None:
        print(f"test accuracy: {report.test_accuracy:.3f}")
    print(f"wrote {weights}")
    return 0


def cmd_score(opts):
    _require(opts, "corpus", "embeddings", "weights")
    scorer = _load_model(opts["weights"])
    table = _load_table(opts)
    corpus = read_corpus(_existing(opts["corpus"], "corpus"), dedup=opts["dedup"])
    points, _, unscored = score_corpus(corpus, table, scorer)
    if not points:
        raise EmptyAnalysisError("nothing to analyze: no record has an in-vocabulary token")
    smoothed = moving_average([p.score for p in points], opts["window"])
    series = ScoreSeries(points, [float(v) for v in smoothed], [False] * len(points))
    out = _out_dir(opts) / "scores.csv"
    _write_text(out, write_scores_csv(series))
    print(f"scored {len(points)} records ({unscored} unscored); wrote {out}")
    return 0


def _stopwords(opts):
    if not opts["stopwords"]:
        return {lang: load_stopwords(lang) for lang in LANGS}
    words = {}
    for lang in LANGS:
        path = Path(opts["stopwords"]) / f"stopwords.{lang}.txt"
        if path.is_file():
            words[lang] = frozenset(w.strip() for w in path.read_text("utf-8").splitlines() if w.strip())
    return words


def cmd_analyze(opts):
    _require(opts, "corpus", "embeddings", "weights")
    scorer = _load_model(opts["weights"])
    table = _load_table(opts)
    corpus = read_corpus(_existing(opts["corpus"], "corpus"), dedup=opts["dedup"])
    for err in corpus.errors:
        print(f"warning: {opts['corpus']} line {err.line}: {err.message}", file=sys.stderr)
    settings = AnalysisSettings(
        window=opts["window"], gap=opts["gap"], alpha=opts["alpha"], r=opts["r"],
        detrend=opts["detrend"], top_k=opts["top_k"],
    )
    result = analyze(corpus, table, scorer, settings, _stopwords(opts))
    echo = {k: v for k, v in opts.items() if k not in ("out_dir", "fixed_clock")}
    report = build_report(result, corpus, echo, _model_meta(opts["weights"], scorer), _now(opts))

    out = _out_dir(opts)
    regions = report.regions
    _write_text(out / "report.json", report.to_json())
    _write_text(out / "scores.csv", write_scores_csv(result.series))
    _write_text(out / "timeline.svg", render_svg(result.series, regions))
    _write_text(out / "summary.txt", render_summary(report))
    print(
        f"{len(result.series.points)} scored, {result.esd.num_outliers} outliers, "
        f"{len(regions)} regions; wrote {out}"
    )
    return 0


def cmd_report(opts):
    out = _out_dir(opts)
    report_path = Path(opts["report"]) if opts["report"] else out / "report.json"
    scores_path = Path(opts["scores"]) if opts["scores"] else out / "scores.csv"
    report = OutlierReport.from_json(_existing(report_path, "report").read_text("utf-8"))
    series = read_scores_csv(_existing(scores_path, "scores").read_text("utf-8"))
    _write_text(out / "timeline.svg", render_svg(series, report.regions))
    summary = render_summary(report)
    _write_text(out / "summary.txt", summary)
    sys.stdout.write(summary)
    return 0


HANDLERS = {
    "align": cmd_align,
    "train": cmd_train,
    "score": cmd_score,
    "analyze": cmd_analyze,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](resolve_options(args))
    except DistreadError as exc:
        print(f"distread {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
