"""Scoring and outlier analysis of a whole corpus."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyAnalysisError
from .esd import EsdConfig, EsdResult, esd_test
from .report import OutlierReport, iso_utc
from .timeline import (
    ScorePoint,
    ScoreSeries,
    day_profile,
    moving_average,
    segment_regions,
    term_frequencies,
)


@dataclass
class AnalysisSettings:
    window: int = 25
    gap: int = 5
    alpha: float = 0.05
    r: int | None = None
    detrend: bool = False
    top_k: int = 50


@dataclass
class Analysis:
    series: ScoreSeries
    records: list  # scored records, aligned with series.points
    unscored: int
    esd: EsdResult
    regions: list
    day_profile: dict


def score_corpus(corpus, table, scorer):
    """Score every record; all-OOV records are skipped.

    Returns ``(points, scored_records, unscored_count)``.
    """
    points, scored, unscored = [], [], 0
    for rec in corpus.records:
        s = scorer.score_tokens(rec.tokens, table)
        if s is None:
            unscored += 1
            continue
        points.append(ScorePoint(rec.id, rec.timestamp, s))
        scored.append(rec)
    return points, scored, unscored


def analyze(corpus, table, scorer, settings: AnalysisSettings | None = None, stopwords=None) -> Analysis:
    settings = settings or AnalysisSettings()
    points, records, unscored = score_corpus(corpus, table, scorer)
    if not points:
        raise EmptyAnalysisError("nothing to analyze: no record has an in-vocabulary token")
    scores = np.array([p.score for p in points])
    smoothed = moving_average(scores, settings.window)

    cfg = EsdConfig(settings.alpha, settings.r, settings.detrend)
    r = cfg.upper_bound(len(points))
    if len(points) < r + 2:
        raise EmptyAnalysisError(
            f"nothing to analyze: {len(points)} scored records, ESD needs at least {r + 2}"
        )
    esd = esd_test(scores - smoothed if settings.detrend else scores, cfg)
    flags = [False] * len(points)
    for i in esd.outlier_indices:
        flags[i] = True

    regions = segment_regions(flags, scores, settings.gap)
    for reg in regions:
        members = [records[i] for i in reg.members]
        reg.ids = [rec.id for rec in members]
        reg.top_terms = [list(t) for t in term_frequencies(members, stopwords, settings.top_k)]
    series = ScoreSeries(points, [float(v) for v in smoothed], flags)
    return Analysis(series, records, unscored, esd, regions, day_profile(points))


def build_report(analysis: Analysis, corpus, config=None, model=None, generated_at="") -> OutlierReport:
    points = analysis.series.points
    esd = analysis.esd
    return OutlierReport(
        corpus={
            "total": len(corpus.records),
            "scored": len(points),
            "unscored": analysis.unscored,
            "dedup_dropped": corpus.dedup_dropped,
            "row_errors": len(corpus.errors),
            "lang_counts": corpus.lang_counts(),
        },
        esd={
            "alpha": esd.alpha,
            "r": esd.r,
            "num_outliers": esd.num_outliers,
            "R": list(esd.R),
            "lambda": list(esd.lam),
            "outlier_ids": [points[i].id for i in esd.outlier_indices],
            "detrend": bool(config and config.get("detrend")),
        },
        regions=[
            {
                "start": reg.start,
                "end": reg.end,
                "start_ts": iso_utc(points[reg.start].timestamp),
                "end_ts": iso_utc(points[reg.end].timestamp),
                "polarity": reg.polarity,
                "mean_score": float(np.mean([points[i].score for i in reg.members])),
                "ids": reg.ids,
                "top_terms": reg.top_terms,
            }
            for reg in analysis.regions
        ],
        day_profile={d: {"count": c, "mean": m} for d, (c, m) in analysis.day_profile.items()},
        config=dict(config or {}),
        model=dict(model or {}),
        generated_at=generated_at,
    )
