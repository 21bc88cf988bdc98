"""Generalized extreme Studentized deviate (ESD) outlier test.

Student-t critical values are computed here from the regularized
incomplete beta function, without scipy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, InputError

_EPS = 1e-16
_TINY = 1e-300


def _beta_cf(a, b, x, max_iter=100000):
    """Continued fraction for I_x(a, b) (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise DegenerateError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def _stirling_tail(x):
    """lgamma(x) minus its leading Stirling terms, for x >= 10."""
    x2 = x * x
    return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / (1260.0 * x2)) / x2) / x


def _log_beta_ratio(a, b):
    """log(Gamma(a + b) / (Gamma(a) Gamma(b)))."""
    big, small = max(a, b), min(a, b)
    if big < 10.0:
        return math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    # lgamma(big + small) - lgamma(big) without cancelling two huge numbers
    diff = (
        (big - 0.5) * math.log1p(small / big) + small * math.log(big + small) - small
        + _stirling_tail(big + small) - _stirling_tail(big)
    )
    return diff - math.lgamma(small)


def _ibeta(a, b, x, y):
    """I_x(a, b) with ``y = 1 - x`` supplied separately to avoid cancellation."""
    if x == 0.0 or y == 0.0:
        return 0.0 if x == 0.0 else 1.0
    front = math.exp(_log_beta_ratio(a, b) + a * math.log(x) + b * math.log(y))
    # the fraction converges fast only below the mean; use symmetry above it
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, y) / b


def regularized_incomplete_beta(a, b, x):
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if not (a > 0 and b > 0):
        raise InputError(f"incomplete beta needs a, b > 0 (got a={a}, b={b})")
    if not (0.0 <= x <= 1.0):
        raise InputError(f"incomplete beta needs 0 <= x <= 1 (got {x})")
    return _ibeta(a, b, float(x), 1.0 - x)


def t_sf(t, nu):
    """Upper tail P(T > t) of Student's t with ``nu`` degrees of freedom."""
    t2 = t * t
    tail = 0.5 * _ibeta(nu / 2.0, 0.5, nu / (nu + t2), t2 / (nu + t2))
    return tail if t >= 0 else 1.0 - tail


def t_cdf(t, nu):
    return 1.0 - t_sf(t, nu) if t >= 0 else t_sf(-t, nu)


def t_pdf(t, nu):
    log_norm = math.lgamma((nu + 1) / 2.0) - math.lgamma(nu / 2.0) - 0.5 * math.log(nu * math.pi)
    return math.exp(log_norm - (nu + 1) / 2.0 * math.log1p(t * t / nu))


def t_quantile(p, nu):
    """Inverse CDF of Student's t.

    Works on the smaller tail, so quantiles close to 0 or 1 keep their
    relative accuracy. Newton steps are guarded by a shrinking bracket.
    """
    if not (0.0 < p < 1.0):
        raise InputError(f"t quantile needs 0 < p < 1 (got {p}); the quantile is infinite")
    if nu < 1:
        raise InputError(f"degrees of freedom must be >= 1 (got {nu})")
    if p == 0.5:
        return 0.0
    q = min(p, 1.0 - p)  # target upper-tail probability of |t|
    sign = 1.0 if p > 0.5 else -1.0

    lo, hi = 0.0, 1.0
    while t_sf(hi, nu) > q:
        lo, hi = hi, hi * 2.0
    t = 0.5 * (lo + hi)
    for _ in range(500):
        f = t_sf(t, nu) - q
        if f > 0:
            lo = t
        else:
            hi = t
        if f == 0.0 or hi - lo <= 4 * _EPS * hi:
            break
        step = f / t_pdf(t, nu)  # sf' = -pdf
        cand = t + step
        t = cand if lo < cand < hi else 0.5 * (lo + hi)
    return sign * t


def esd_critical_value(n, i, alpha):
    """Critical value lambda_i after ``i - 1`` removals from ``n`` points."""
    p = 1.0 - alpha / (2.0 * (n - i + 1))
    nu = n - i - 1
    t = t_quantile(p, nu)
    return (n - i) * t / math.sqrt((nu + t * t) * (n - i + 1))


@dataclass
class EsdConfig:
    alpha: float = 0.05
    r: int | None = None  # None: ceil(0.05 * n)
    detrend: bool = False

    def upper_bound(self, n: int) -> int:
        return self.r if self.r is not None else max(1, math.ceil(0.05 * n))


@dataclass
class EsdResult:
    alpha: float
    R: list[float] = field(default_factory=list)
    lam: list[float] = field(default_factory=list)
    removed_index_order: list[int] = field(default_factory=list)
    num_outliers: int = 0

    @property
    def r(self) -> int:
        return len(self.R)

    @property
    def outlier_indices(self) -> list[int]:
        return self.removed_index_order[: self.num_outliers]


def esd_test(series, cfg: EsdConfig | None = None) -> EsdResult:
    """Run the two-sided generalized ESD test on a univariate series.

    Each round studentizes the current sample with its mean and n-1
    standard deviation, records the largest deviate and removes that point
    (ties go to the lowest original index). The outlier count is the
    largest ``i`` with ``R_i > lambda_i``.

    A constant series raises :class:`DegenerateError`. If the sample turns
    constant after some removals, the remaining statistics are 0.
    """
    cfg = cfg or EsdConfig()
    x = np.asarray(series, dtype=np.float64)
    n = x.size
    if not (0.0 < cfg.alpha < 1.0):
        raise InputError(f"alpha must lie in (0, 1), got {cfg.alpha}")
    if not np.all(np.isfinite(x)):
        raise InputError("ESD series contains non-finite values")
    r = cfg.upper_bound(n)
    if r < 1 or n < r + 2:
        raise InputError(f"ESD needs n >= r + 2 with r >= 1 (n={n}, r={r})")

    result = EsdResult(alpha=cfg.alpha)
    alive = np.ones(n, dtype=bool)
    idx = np.arange(n)
    for i in range(1, r + 1):
        sample = x[alive]
        mean = sample.mean()
        sd = sample.std(ddof=1)
        dev = np.abs(sample - mean)
        j = int(np.argmax(dev))  # first maximum = lowest original index
        if sd == 0.0 or sample.max() == sample.min():
            if i == 1:
                raise DegenerateError(f"zero variance: all {n} values are equal")
            # the rest is constant: no further point can deviate
            result.R.append(0.0)
        else:
            result.R.append(float(dev[j] / sd))
        result.lam.append(esd_critical_value(n, i, cfg.alpha))
        orig = int(idx[alive][j])
        result.removed_index_order.append(orig)
        alive[orig] = False

    exceed = [i for i in range(r) if result.R[i] > result.lam[i]]
    result.num_outliers = exceed[-1] + 1 if exceed else 0
    return result
