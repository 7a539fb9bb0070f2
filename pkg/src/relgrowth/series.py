"""Exact recurrence mining and asymptotic fitting for growth sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class SeriesError(ValueError):
    pass


@dataclass
class RecurrenceResult:
    found: bool
    order: int
    coefficients: list[Fraction] = field(default_factory=list)
    verified_horizon: int = 0
    linear_complexity: int = 0

    def __str__(self):
        if not self.found:
            return f"no recurrence of the requested order (linear complexity {self.linear_complexity})"
        cs = ", ".join(str(c) for c in self.coefficients)
        return f"order {self.order}: a_n = sum c_i a_(n-i), c = [{cs}]; reproduces {self.verified_horizon} terms"


def berlekamp_massey(seq) -> tuple[int, list[Fraction]]:
    """Shortest linear recurrence over Q generating ``seq``.

    Returns ``(L, c)`` with ``seq[n] = sum(c[i] * seq[n - 1 - i] for i < L)``
    for every n >= L.
    """
    s = [Fraction(x) for x in seq]
    C = [Fraction(1)]
    B = [Fraction(1)]
    L, m, b = 0, 1, Fraction(1)
    for n in range(len(s)):
        d = s[n]
        for i in range(1, L + 1):
            d += C[i] * s[n - i]
        if d == 0:
            m += 1
            continue
        coef = d / b
        T = C[:]
        if len(C) < len(B) + m:
            C += [Fraction(0)] * (len(B) + m - len(C))
        for i, x in enumerate(B):
            C[i + m] -= coef * x
        if 2 * L <= n:
            L, B, b, m = n + 1 - L, T, d, 1
        else:
            m += 1
    C += [Fraction(0)] * (L + 1 - len(C))
    return L, [-x for x in C[1 : L + 1]]


def apply_recurrence(initial, coeffs, length: int) -> list[Fraction]:
    out = [Fraction(x) for x in initial]
    L = len(coeffs)
    while len(out) < length:
        out.append(sum(c * out[-1 - i] for i, c in enumerate(coeffs)))
    return out[:length]


def min_recurrence(seq, max_order: int) -> RecurrenceResult:
    """Smallest-order constant-coefficient recurrence (order <= max_order)."""
    seq = [int(x) for x in seq]
    if len(seq) < 2 * max_order + 4:
        raise SeriesError(f"need at least {2 * max_order + 4} terms for max order {max_order}")
    L, c = berlekamp_massey(seq)
    if L > max_order:
        return RecurrenceResult(False, 0, linear_complexity=L)
    regenerated = apply_recurrence(seq[:L], c, len(seq))
    if regenerated != [Fraction(x) for x in seq]:
        return RecurrenceResult(False, 0, linear_complexity=L)
    return RecurrenceResult(True, L, c, len(seq) - L, L)


@dataclass
class FitResult:
    step: int
    window: tuple[int, int]
    slope: float
    constant: float
    residual: float
    n_points: int

    def __str__(self):
        return (f"D = {self.step}, window [{self.window[0]}, {self.window[1]}]: "
                f"slope {self.slope:.12g}, constant {self.constant:.12g}, "
                f"max residual {self.residual:.3g} ({self.n_points} points)")


def _log_int(x: int) -> float:
    # exact big ints can exceed the float range
    if x < 2**1000:
        return math.log(x)
    k = x.bit_length() - 900
    return math.log(x >> k) + k * math.log(2)


def asymptotic_fit(seq, lam: float, step: int, window: tuple[int, int]) -> FitResult:
    """Least squares of log(seq(n)) - n log(lam) against log(n) over n = step*k in window.

    The slope estimates -nu/2 and exp(intercept) the leading constant.
    """
    lo, hi = window
    ns = [n for n in range(lo, hi + 1) if n % step == 0 and n > 0 and n < len(seq)]
    if len(ns) < 8:
        raise SeriesError(f"fit window has {len(ns)} points along step {step}; need at least 8")
    if any(seq[n] <= 0 for n in ns):
        bad = next(n for n in ns if seq[n] <= 0)
        raise SeriesError(f"nonpositive term at n = {bad}")
    x = np.log(np.array(ns, dtype=float))
    y = np.array([_log_int(int(seq[n])) - n * math.log(lam) for n in ns])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + intercept))))
    return FitResult(step, (ns[0], ns[-1]), float(slope), float(math.exp(intercept)), resid, len(ns))


def gnuplot_residuals(seq, lam: float, fit: FitResult) -> str:
    """Two columns: log n, residual of the fitted line."""
    lines = []
    for n in range(fit.window[0], fit.window[1] + 1, fit.step):
        x = math.log(n)
        y = _log_int(int(seq[n])) - n * math.log(lam)
        lines.append(f"{x:.12g} {y - (fit.slope * x + math.log(fit.constant)):.12g}")
    return "\n".join(lines) + "\n"


@dataclass
class DensityResult:
    ratios: list[float]
    decay_exponent: float | None
    ratio_at_doubling: float | None
    verdict: str


def density_ratio(rel, tot, step: int = 1, window: tuple[int, int] | None = None) -> DensityResult:
    """r(n) = rel(n) / tot(n), with a decay verdict along multiples of ``step``.

    ``decay_exponent`` is the log-log slope of r over the window (last half of
    the data by default) and ``ratio_at_doubling`` compares r at the window end
    with r at half that index.  The verdict is "decay" when r shrinks
    polynomially and "no decay" otherwise.
    """
    if any(t <= 0 for t in tot):
        raise SeriesError("totals must be positive")
    ratios = [Fraction(r, t) for r, t in zip(rel, tot)]
    fl = [float(x) for x in ratios]
    end = (len(fl) - 1) if window is None else window[1]
    end -= end % step
    start = max(step, end // 2) if window is None else window[0]
    ns = [n for n in range(start, end + 1) if n % step == 0 and fl[n] > 0]
    exponent = None
    if len(ns) >= 2 and ns[0] != ns[-1]:
        exponent = float(np.polyfit(np.log(ns), np.log([fl[n] for n in ns]), 1)[0])
    half = end // 2
    half -= half % step
    doubling = fl[end] / fl[half] if half > 0 and fl[half] > 0 else None
    decaying = exponent is not None and exponent < -0.1 and doubling is not None and doubling < 1
    return DensityResult(fl, exponent, doubling, "decay" if decaying else "no decay")


@dataclass
class CoornaertBracket:
    c1: float
    c2: float
    stable: bool
    spread: float


def coornaert_check(tot, lam: float, start: int = 5, step: int = 1, tail: int = 20) -> CoornaertBracket:
    """Bracket [min, max] of tot(n) / lam^n for n >= start.

    ``stable`` when the relative spread over the last ``tail`` terms of the
    progression n = start mod step is below 1%.
    """
    ns = list(range(start, len(tot), step))
    if len(ns) < tail:
        raise SeriesError(f"need at least {tail} terms")
    vals = [math.exp(_log_int(int(tot[n])) - n * math.log(lam)) for n in ns]
    last = vals[-tail:]
    spread = (max(last) - min(last)) / max(last)
    return CoornaertBracket(min(vals), max(vals), spread < 0.01, spread)
