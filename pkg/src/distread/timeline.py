"""Time-ordered score series: smoothing, outlier regions, term and weekday summaries."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InputError

WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


@dataclass(frozen=True)
class ScorePoint:
    id: str
    timestamp: int
    score: float


@dataclass
class ScoreSeries:
    points: list
    smoothed: list
    outlier_flags: list

    @property
    def scores(self):
        return np.array([p.score for p in self.points], dtype=np.float64)


@dataclass
class OutlierRegion:
    start: int
    end: int
    polarity: str
    members: list
    ids: list = field(default_factory=list)
    top_terms: list = field(default_factory=list)


def moving_average(scores, window: int = 25):
    """Trailing mean over the last ``window`` values; shorter at the start."""
    if window < 1:
        raise InputError(f"window must be >= 1, got {window}")
    x = np.asarray(scores, dtype=np.float64)
    n = x.size
    out = np.empty(n)
    head = min(window - 1, n)
    if head:
        out[:head] = np.cumsum(x[:head]) / np.arange(1, head + 1)
    if n >= window:
        out[window - 1 :] = sliding_window_view(x, window).mean(axis=1)
    return out


def segment_regions(flags, scores, gap: int = 5):
    """Group flagged indices into regions of one polarity.

    Consecutive flagged indices at most ``gap`` apart join the same region
    as long as they lie on the same side of the global mean score (a point
    exactly at the mean counts as positive). The region polarity is the
    sign of its mean score minus the global mean.
    """
    scores = np.asarray(scores, dtype=np.float64)
    flagged = [i for i, f in enumerate(flags) if f]
    if not flagged:
        return []
    mean = scores.mean()
    side = lambda i: scores[i] >= mean  # noqa: E731

    groups = [[flagged[0]]]
    for i in flagged[1:]:
        prev = groups[-1][-1]
        if i - prev <= gap and side(i) == side(prev):
            groups[-1].append(i)
        else:
            groups.append([i])
    regions = []
    for members in groups:
        diff = scores[members].mean() - mean
        regions.append(
            OutlierRegion(members[0], members[-1], "positive" if diff >= 0 else "negative", members)
        )
    return regions


def term_frequencies(records, stopwords=None, top_k: int | None = 50):
    """Rank tokens of ``records`` by count, most frequent first, ties lexical.

    Stopwords of every language present in the records are removed.
    """
    stopwords = stopwords or {}
    drop = set()
    for lang in {r.lang for r in records}:
        drop |= set(stopwords.get(lang, ()))
    counts = Counter(tok for r in records for tok in r.tokens if tok not in drop)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked if top_k is None else ranked[:top_k]


def weekday(timestamp: int) -> str:
    return WEEKDAYS[datetime.fromtimestamp(timestamp, tz=timezone.utc).weekday()]


def day_profile(points):
    """UTC weekday -> (count, mean score); days without points map to (0, None)."""
    sums = {d: [0, 0.0] for d in WEEKDAYS}
    for p in points:
        acc = sums[weekday(p.timestamp)]
        acc[0] += 1
        acc[1] += p.score
    return {d: (c, (s / c if c else None)) for d, (c, s) in sums.items()}
