"""Outlier reports and their on-disk forms: JSON report, scores CSV, SVG timeline."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import resources
from xml.sax.saxutils import escape

from .errors import InputError
from .timeline import ScorePoint, ScoreSeries

SCHEMA_VERSION = 1
CSV_HEADER = ("id", "timestamp", "score", "smoothed", "outlier")


def iso_utc(timestamp: int) -> str:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class OutlierReport:
    corpus: dict
    esd: dict
    regions: list
    day_profile: dict
    config: dict = field(default_factory=dict)
    model: dict = field(default_factory=dict)
    generated_at: str = ""
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        d = asdict(self)
        return {"schema_version": d.pop("schema_version"), **d}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise InputError(f"unsupported report schema_version {d.get('schema_version')!r}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InputError(f"malformed report: {exc}") from exc

    @classmethod
    def from_json(cls, text):
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"report is not valid JSON: {exc.msg}") from exc


def report_schema() -> dict:
    raw = resources.files("distread").joinpath("data/report.schema.json").read_text("utf-8")
    return json.loads(raw)


# -- scores CSV ----------------------------------------------------------------


def write_scores_csv(series: ScoreSeries) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p, sm, flag in zip(series.points, series.smoothed, series.outlier_flags):
        writer.writerow((p.id, iso_utc(p.timestamp), repr(float(p.score)), repr(float(sm)), int(flag)))
    return buf.getvalue()


def read_scores_csv(text: str) -> ScoreSeries:
    from .corpus import parse_timestamp

    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if tuple(header or ()) != CSV_HEADER:
        raise InputError(f"scores CSV header must be {','.join(CSV_HEADER)}")
    points, smoothed, flags = [], [], []
    for lineno, row in enumerate(reader, start=2):
        try:
            rid, ts, score, sm, flag = row
            points.append(ScorePoint(rid, parse_timestamp(ts), float(score)))
            smoothed.append(float(sm))
            flags.append(flag == "1")
        except ValueError as exc:
            raise InputError(f"scores CSV line {lineno}: {exc}") from exc
    return ScoreSeries(points, smoothed, flags)


# -- SVG timeline --------------------------------------------------------------

WIDTH, HEIGHT = 1200, 400
MARGIN = {"left": 50, "right": 20, "top": 30, "bottom": 40}

_STYLE = """
    .point { fill: #4a6fa5; fill-opacity: 0.55; }
    .point.outlier { fill: #d62728; fill-opacity: 1; }
    .midline { fill: none; stroke: #2ca02c; stroke-width: 1.5; }
    .axis { stroke: #333; stroke-width: 1; }
    .region-positive { fill: #d62728; fill-opacity: 0.08; }
    .region-negative { fill: #d62728; fill-opacity: 0.08; }
    text { font-family: sans-serif; font-size: 11px; fill: #333; }
"""


def _fmt(v):
    return f"{v:.2f}"


def render_svg(series: ScoreSeries, regions=(), title="Sentiment over time") -> str:
    """Static scatter of scores in time order with the moving-average midline.

    Every scored point is one ``circle.point``; outliers also carry class
    ``outlier``. The moving average is a single ``path.midline``.
    """
    n = len(series.points)
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

    def sx(i):
        return x0 + (x1 - x0) * (i / (n - 1) if n > 1 else 0.5)

    def sy(v):
        return y0 + (y1 - y0) * v

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        f"<style>{_STYLE}</style>",
        f'<text x="{x0}" y="18">{escape(title)}</text>',
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>',
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>',
    ]
    for v in (0.0, 0.5, 1.0):
        out.append(f'<text x="{x0 - 8}" y="{_fmt(sy(v) + 4)}" text-anchor="end">{v:.1f}</text>')
    if n:
        days = []
        for i, p in enumerate(series.points):
            day = iso_utc(p.timestamp)[:10]
            if not days or days[-1][1] != day:
                days.append((i, day))
        stride = max(1, len(days) // 12)
        for i, day in days[::stride]:
            out.append(f'<text x="{_fmt(sx(i))}" y="{y0 + 16}" text-anchor="middle">{day[5:]}</text>')
    for reg in regions:
        start, end = reg["start"], reg["end"]
        left, right = sx(start) - 2, sx(end) + 2
        out.append(
            f'<rect class="region-{reg["polarity"]}" x="{_fmt(left)}" y="{y1}" '
            f'width="{_fmt(right - left)}" height="{y0 - y1}"/>'
        )
    for i, (p, flag) in enumerate(zip(series.points, series.outlier_flags)):
        cls = "point outlier" if flag else "point"
        out.append(
            f'<circle class="{cls}" cx="{_fmt(sx(i))}" cy="{_fmt(sy(p.score))}" r="2">'
            f"<title>{escape(p.id)}</title></circle>"
        )
    if n:
        d = " ".join(
            f"{'M' if i == 0 else 'L'}{_fmt(sx(i))},{_fmt(sy(v))}" for i, v in enumerate(series.smoothed)
        )
        out.append(f'<path class="midline" d="{d}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_summary(report: OutlierReport) -> str:
    """Plain-text digest: ESD outcome, regions with their top terms, weekday means."""
    esd, corpus = report.esd, report.corpus
    lines = [
        f"records: {corpus['total']} ({corpus['scored']} scored, {corpus['unscored']} unscored, "
        f"{corpus['dedup_dropped']} duplicates dropped)",
        f"ESD: {esd['num_outliers']} outliers of at most {esd['r']} (alpha {esd['alpha']})",
        "",
    ]
    for reg in report.regions:
        terms = ", ".join(f"{t} ({c})" for t, c in reg["top_terms"][:10])
        lines.append(f"{reg['polarity']:8s} {reg['start_ts']} .. {reg['end_ts']}  n={len(reg['ids'])}")
        lines.append(f"         {terms}")
    lines.append("")
    for day, row in report.day_profile.items():
        mean = "-" if row["mean"] is None else f"{row['mean']:.3f}"
        lines.append(f"{day}  {row['count']:6d}  {mean}")
    return "\n".join(lines) + "\n"
