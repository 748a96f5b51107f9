"""
Small numerical primitives: a safeguarded Brent root finder, a 3x3
partial-pivoting linear solver and an overflow-free weighted exponential sum.

Everything here works on plain Python floats (IEEE double) and holds no
state, so the functions are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

EPS = 2.220446049250313e-16


class NumericsError(ArithmeticError):
    """Base class for failures of the numerical primitives."""


class NoSignChange(NumericsError, ValueError):
    """The bracket endpoints do not straddle a root."""


class MaxIterExceeded(NumericsError):
    """Iteration budget exhausted; ``estimate`` holds the best point found."""

    def __init__(self, message: str, estimate: float, f_estimate: float):
        super().__init__(message)
        self.estimate = estimate
        self.f_estimate = f_estimate


class NonFiniteEval(NumericsError):
    """The function returned NaN or an infinity inside the bracket."""


class SingularMatrix(NumericsError):
    """A pivot fell below the singularity threshold."""


@dataclass(frozen=True)
class Bracket:
    """An interval ``[lo, hi]`` with the function values at both ends."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if not (math.isfinite(self.f_lo) and math.isfinite(self.f_hi)):
            raise NonFiniteEval(
                f"non-finite bracket value(s) f({self.lo})={self.f_lo}, "
                f"f({self.hi})={self.f_hi}")
        if self.f_lo * self.f_hi > 0.0:
            raise NoSignChange(
                f"f({self.lo})={self.f_lo!r} and f({self.hi})={self.f_hi!r} "
                "have the same sign")

    @classmethod
    def from_function(cls, f: Callable[[float], float], lo: float,
                      hi: float) -> "Bracket":
        """Evaluate ``f`` at both ends and build a validated bracket."""
        return cls(lo, hi, f(lo), f(hi))


@dataclass(frozen=True)
class RootConfig:
    abs_tol_x: float = 1e-12
    rel_tol_x: float = 1e-12
    abs_tol_f: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        for name in ("abs_tol_x", "rel_tol_x", "abs_tol_f"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_ROOT_CONFIG = RootConfig()


def _checked(f, x):
    fx = f(x)
    if not math.isfinite(fx):
        raise NonFiniteEval(f"f({x!r}) = {fx!r}")
    return fx


def find_root_bracketed(f: Callable[[float], float], bracket: Bracket,
                        cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> float:
    """
    Locate a root of ``f`` inside ``bracket`` with Brent's method.

    Inverse quadratic interpolation or secant steps are taken when they land
    well inside the current bracket; otherwise the step falls back to
    bisection, so convergence is guaranteed for a continuous ``f`` that
    changes sign. ``f`` is never evaluated outside ``[bracket.lo,
    bracket.hi]``.

    Parameters
    ----------
    f : callable
        Scalar function of one float.
    bracket : Bracket
        Validated sign-changing interval.
    cfg : RootConfig, optional
        Tolerances and iteration budget.

    Returns
    -------
    float
        ``x`` with ``|f(x)| <= cfg.abs_tol_f`` or a final bracket no wider
        than ``cfg.abs_tol_x + cfg.rel_tol_x * |x|``.

    Raises
    ------
    MaxIterExceeded
        With the best estimate attached.
    NonFiniteEval
        If ``f`` produces NaN or an infinity.
    """
    a, b = bracket.lo, bracket.hi
    fa, fb = bracket.f_lo, bracket.f_hi
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b

    # b is the best estimate, c the contrapoint so that root lies in [b, c].
    c, fc = a, fa
    d = e = b - a
    for _ in range(cfg.max_iter):
        if fb * fc > 0.0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb

        tol = 0.5 * (cfg.abs_tol_x + cfg.rel_tol_x * abs(b)) + 2.0 * EPS * abs(b)
        m = 0.5 * (c - b)
        if abs(fb) <= cfg.abs_tol_f or abs(c - b) <= cfg.abs_tol_x + cfg.rel_tol_x * abs(b):
            return b

        if abs(e) >= tol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(tol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m

        a, fa = b, fb
        if abs(d) > tol:
            b = b + d
        else:
            b = b + (tol if m > 0.0 else -tol)
        # keep the iterate inside the original interval
        b = min(max(b, bracket.lo), bracket.hi)
        fb = _checked(f, b)

    raise MaxIterExceeded(
        f"no convergence after {cfg.max_iter} iterations", b, fb)


def solve_linear_3x3(m: Sequence[Sequence[float]],
                     b: Sequence[float]) -> tuple[float, float, float]:
    """Solve ``m @ x = b`` by Gaussian elimination with partial pivoting."""
    a = [[float(m[i][j]) for j in range(3)] + [float(b[i])] for i in range(3)]
    for row in a:
        if not all(math.isfinite(v) for v in row):
            raise ValueError("matrix and right-hand side must be finite")

    for k in range(3):
        p = max(range(k, 3), key=lambda i: abs(a[i][k]))
        if abs(a[p][k]) < 1e-300:
            raise SingularMatrix(f"pivot {a[p][k]!r} in column {k}")
        a[k], a[p] = a[p], a[k]
        for i in range(k + 1, 3):
            factor = a[i][k] / a[k][k]
            for j in range(k, 4):
                a[i][j] -= factor * a[k][j]

    x = [0.0, 0.0, 0.0]
    for i in (2, 1, 0):
        acc = a[i][3] - sum(a[i][j] * x[j] for j in range(i + 1, 3))
        x[i] = acc / a[i][i]
    return x[0], x[1], x[2]


def exp_rescaled(exponents: Sequence[float],
                 weights: Sequence[float]) -> tuple[float, float]:
    """
    Weighted sum of exponentials with the largest exponent factored out.

    Returns ``(s, m)`` where ``m = max(exponents)`` and
    ``s = sum(w * exp(x - m))``, so the true sum is ``s * exp(m)``. ``s`` is
    finite whenever the inputs are.
    """
    if len(exponents) != len(weights) or not exponents:
        raise ValueError("exponents and weights must be equal-length and non-empty")
    m = max(exponents)
    if not math.isfinite(m):
        raise ValueError("exponents must be finite")
    s = math.fsum(w * math.exp(x - m) for x, w in zip(exponents, weights))
    return s, m
