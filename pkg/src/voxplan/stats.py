"""Summary statistics and Welch's unequal-variance t-test.

The two-sided p-value uses the regularized incomplete beta function,
evaluated with a Lentz continued fraction (absolute error below 1e-10 for
the degrees of freedom used here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Z_95 = 1.959963984540054


def mean(xs) -> float:
    xs = list(xs)
    if not xs:
        raise ValueError("mean of empty sequence")
    return math.fsum(xs) / len(xs)


def sample_sd(xs) -> float | None:
    """Sample standard deviation (n - 1); None for fewer than two values."""
    xs = list(xs)
    if len(xs) < 2:
        return None
    m = mean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def ci95(xs) -> tuple[float, float] | None:
    """Normal-approximation interval mean +/- 1.96 sd / sqrt(n)."""
    xs = list(xs)
    sd = sample_sd(xs)
    if sd is None:
        return None
    m = mean(xs)
    half = Z_95 * sd / math.sqrt(len(xs))
    return (m - half, m + half)


def _betacf(a: float, b: float, x: float, max_iter: int = 500, eps: float = 1e-15) -> float:
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must be in [0, 1]")
    if x in (0.0, 1.0):
        return x
    ln_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with `df` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float

    def to_dict(self) -> dict:
        return {"t": self.t, "df": self.df, "p": self.p}


def welch_t(mean_a: float, sd_a: float, n_a: int, mean_b: float, sd_b: float, n_b: int) -> WelchResult:
    """Welch's t from summary statistics, df by Welch-Satterthwaite.

    Raises ValueError when both spreads are zero and the means coincide
    (the statistic is undefined).
    """
    if n_a < 2 or n_b < 2:
        raise ValueError("each group needs at least two observations")
    if sd_a < 0 or sd_b < 0:
        raise ValueError("standard deviations must be non-negative")
    va, vb = sd_a * sd_a / n_a, sd_b * sd_b / n_b
    se2 = va + vb
    diff = mean_a - mean_b
    if se2 == 0:
        if diff == 0:
            raise ValueError("t is undefined: zero variance in both groups and equal means")
        return WelchResult(math.copysign(math.inf, diff), float(n_a + n_b - 2), 0.0)
    t = diff / math.sqrt(se2)
    df = se2 * se2 / (va * va / (n_a - 1) + vb * vb / (n_b - 1))
    return WelchResult(t, df, t_sf_two_sided(t, df))


def cohens_d(mean_a: float, sd_a: float, mean_b: float, sd_b: float) -> float:
    """Mean difference over the root-mean-square of the two standard deviations."""
    return (mean_a - mean_b) / math.sqrt((sd_a ** 2 + sd_b ** 2) / 2)
