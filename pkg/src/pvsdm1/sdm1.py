"""
One-parameter single-diode model (SDM-1).

Forcing the SDM through the three cardinal points makes ``i_ph``, ``i_o``
and ``g_sh`` linear in the data once ``a`` and ``r_s`` are fixed. Two
scalar boundary functions then describe the feasible set:

* ``f_sh(a, r_s) = 0`` where the reconstructed shunt conductance vanishes,
  giving the curve ``r_s_sh(a)``;
* ``f_mp(a, r_s) = 0`` where the reconstructed curve has ``dP/dV = 0`` at
  the maximum-power point, giving ``r_s_mp(a)``.

The one-parameter family is ``a -> (a, r_s_mp(a))``; it stays physical
(all five parameters positive) up to ``a_max``, the smaller of the
``f_mp(a, 0) = 0`` root and the intersection of the two curves.

Both boundary functions are sums of three weighted exponentials. They are
evaluated with the largest exponential factored out, which leaves every root
and sign unchanged and never overflows.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .numerics import (DEFAULT_ROOT_CONFIG, Bracket, MaxIterExceeded,
                       NumericsError, RootConfig, exp_rescaled,
                       find_root_bracketed, solve_linear_3x3)
from .sdm_core import CardinalPoints, SdmParameters

logger = logging.getLogger(__name__)

# A-search interval as fractions of V_oc, widened geometrically on failure
A_SEARCH_FRACTIONS = (0.02, 0.2)
A_WIDEN_FACTOR = 2.0
A_WIDEN_STEPS = 10
A_SCAN_POINTS = 48
RS_SCAN_POINTS = 16


class NoRootInRange(ValueError):
    """A boundary function has no sign change on the searched interval."""


class DomainNotFound(ArithmeticError):
    """Neither selection rule produced a bracketed root."""


class NonPositiveParameters(ValueError):
    """
    The reconstructed parameters violate positivity.

    ``values`` maps parameter names to the raw solution of the linear
    system; ``offending`` lists the names that broke the sign constraint.
    """

    def __init__(self, values: dict[str, float], offending: list[str] | None = None):
        self.values = dict(values)
        if offending is None:
            offending = [k for k, v in values.items()
                         if (v < 0.0 if k in ("g_sh", "r_s") else v <= 0.0)]
        self.offending = list(offending)
        detail = ", ".join(f"{k}={values[k]!r}" for k in self.offending)
        super().__init__(f"non-positive SDM parameters: {detail}")


class SaturationCurrentUnderflow(ArithmeticError):
    """``i_o`` is positive but below the smallest double (``v_oc / a`` ~> 745)."""


class SelectionRule(enum.Enum):
    INTERSECTION = "intersection"
    MP_AT_ZERO_RS = "mp_at_zero_rs"


class BoundaryPoint(NamedTuple):
    a: float
    r_s: float


@dataclass(frozen=True)
class DomainResult:
    """Corner ``(a_max, r_s_min)`` of the feasible SDM-1 domain."""

    a_max: float
    r_s_min: float
    selected_rule: SelectionRule
    converged: bool
    f_sh_residual: float
    f_mp_residual: float

    def __post_init__(self):
        if not self.a_max > 0.0:
            raise ValueError("a_max must be > 0")
        if self.r_s_min < 0.0:
            raise ValueError("r_s_min must be >= 0")
        if self.selected_rule is SelectionRule.MP_AT_ZERO_RS and self.r_s_min != 0.0:
            raise ValueError("the zero-r_s rule implies r_s_min == 0")

    @property
    def point(self) -> BoundaryPoint:
        return BoundaryPoint(self.a_max, self.r_s_min)

    @property
    def residuals(self) -> tuple[float, float]:
        return self.f_sh_residual, self.f_mp_residual


# -- boundary functions -----------------------------------------------------

def f_sh_terms(cp: CardinalPoints, a: float, r_s: float):
    """Exponents and weights of the shunt boundary function."""
    return (
        (cp.v_oc / a, (cp.v_mp + r_s * cp.i_mp) / a, r_s * cp.i_sc / a),
        (cp.i_sc - cp.i_mp, -cp.i_sc, cp.i_mp),
    )


def f_mp_terms(cp: CardinalPoints, a: float, r_s: float):
    """Exponents and weights of the maximum-power boundary function."""
    i_sc, v_oc, i_mp, v_mp = cp.i_sc, cp.v_oc, cp.i_mp, cp.v_mp
    middle = ((v_oc * i_mp + v_mp * i_sc - v_oc * i_sc) * (v_mp - r_s * i_mp)
              + a * (v_oc * i_mp - v_mp * i_sc))
    return (
        (v_oc / a, (v_mp + r_s * i_mp) / a, r_s * i_sc / a),
        (-a * v_mp * (2.0 * i_mp - i_sc), middle, a * i_mp * (2.0 * v_mp - v_oc)),
    )


def f_sh(cp: CardinalPoints, a: float, r_s: float) -> float:
    """
    Shunt boundary function, divided by its largest exponential factor.

    Vanishes exactly where the shunt conductance reconstructed from
    ``(a, r_s)`` is zero, and is positive where it is positive.
    """
    return exp_rescaled(*f_sh_terms(cp, a, r_s))[0]


def f_mp(cp: CardinalPoints, a: float, r_s: float) -> float:
    """
    Maximum-power boundary function, divided by its largest exponential
    factor. Its zero set in ``r_s`` is where ``dP/dV`` vanishes at
    ``(v_mp, i_mp)`` on the reconstructed curve.
    """
    return exp_rescaled(*f_mp_terms(cp, a, r_s))[0]


# -- root helpers -----------------------------------------------------------

def _linear_grid(lo, hi, n):
    return [lo + (hi - lo) * k / n for k in range(n)] + [hi]


def _log_grid(lo, hi, n):
    # a is a scale parameter; equal ratios resolve small roots as well as large
    r = math.log(hi / lo)
    return [lo * math.exp(r * k / n) for k in range(n)] + [hi]


def _first_root(g: Callable[[float], float], lo: float, hi: float, n: int,
                cfg: RootConfig, what: str, grid=_linear_grid) -> float:
    """Smallest root of ``g`` on ``[lo, hi]`` found by an ``n``-cell scan."""
    xs = grid(lo, hi, n)
    vals = [g(x) for x in xs]
    changes = [k for k in range(n) if vals[k] == 0.0 or vals[k] * vals[k + 1] < 0.0]
    if vals[n] == 0.0 and not changes:
        return hi
    if not changes:
        raise NoRootInRange(f"{what}: no sign change on [{lo!r}, {hi!r}]")
    if len(changes) > 1:
        logger.debug("%s: %d sign changes on [%r, %r]; taking the smallest",
                     what, len(changes), lo, hi)
    k = changes[0]
    return find_root_bracketed(g, Bracket(xs[k], xs[k + 1], vals[k], vals[k + 1]), cfg)


def r_s_upper_bound(cp: CardinalPoints) -> float:
    """
    Largest series resistance that keeps the junction voltages ordered.

    Diode plus shunt current grows with junction voltage, so a feasible set
    needs ``r_s*i_sc < v_mp + r_s*i_mp < v_oc``. The MP/OC coincidence at
    ``(v_oc - v_mp) / i_mp`` comes first under the cardinal invariants and is
    below ``v_mp / i_mp``; at and past it the linear system is singular or
    the signs flip, and the boundary functions can vanish spuriously.
    """
    return (cp.v_oc - cp.v_mp) / cp.i_mp


def r_s_sh_of_a(cp: CardinalPoints, a: float,
                cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> float:
    """Series resistance on the shunt boundary (``f_sh = 0``) at ``a``."""
    return _first_root(lambda r: f_sh(cp, a, r), 0.0, r_s_upper_bound(cp),
                       RS_SCAN_POINTS, cfg, f"f_sh(a={a!r}, r_s)")


def r_s_mp_of_a(cp: CardinalPoints, a: float,
                cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> float:
    """Series resistance on the maximum-power boundary (``f_mp = 0``) at ``a``."""
    return _first_root(lambda r: f_mp(cp, a, r), 0.0, r_s_upper_bound(cp),
                       RS_SCAN_POINTS, cfg, f"f_mp(a={a!r}, r_s)")


def a_search_intervals(cp: CardinalPoints):
    """Default A-search interval followed by its geometric widenings."""
    lo, hi = (f * cp.v_oc for f in A_SEARCH_FRACTIONS)
    yield lo, hi
    for _ in range(A_WIDEN_STEPS):
        lo, hi = lo / A_WIDEN_FACTOR, hi * A_WIDEN_FACTOR
        yield lo, hi


def a_at_zero_rs(cp: CardinalPoints, cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> float:
    """Root in ``a`` of ``f_mp(cp, a, 0)``."""
    for lo, hi in a_search_intervals(cp):
        try:
            return _first_root(lambda a: f_mp(cp, a, 0.0), lo, hi,
                               A_SCAN_POINTS, cfg, "f_mp(a, 0)", _log_grid)
        except NoRootInRange:
            continue
    raise NoRootInRange("f_mp(a, 0) has no sign change on the widened A interval")


def _boundary_gap(cp, cfg):
    """
    ``f_sh`` along the maximum-power branch, ``f_sh(a, r_s_mp(a))``.

    Its roots are the intersections of the two branches. Unlike
    ``r_s_mp - r_s_sh`` it stays defined where the shunt branch has already
    left ``r_s >= 0``, so a crossing just before that end is not missed.
    Below ``r_s_upper_bound`` its sign is the sign of ``g_sh``.
    """
    def gap(a):
        try:
            return f_sh(cp, a, r_s_mp_of_a(cp, a, cfg))
        except (NoRootInRange, NumericsError):
            return None
    return gap


def _intersection(cp, a_cap, cfg):
    """Bracketed root of ``f_sh(a, r_s_mp(a))`` below ``a_cap``.

    Grid points where the maximum-power branch is undefined are skipped.
    Returns ``(a, converged)`` or ``None``.
    """
    gap = _boundary_gap(cp, cfg)
    for lo, hi in a_search_intervals(cp):
        hi = min(hi, a_cap)
        if not lo < hi:
            continue
        xs = _log_grid(lo, hi, A_SCAN_POINTS)
        prev = None
        for x in xs:
            # r_s_mp(a_cap) = 0 by definition, but the r_s scan cannot
            # bracket a root sitting on its own endpoint
            gx = f_sh(cp, x, 0.0) if x == a_cap else gap(x)
            if gx is None:
                continue
            if gx == 0.0:
                return x, True
            if prev is not None and prev[1] * gx < 0.0:
                bracket = Bracket(prev[0], x, prev[1], gx)
                return _solve_gap(gap, bracket, cfg)
            prev = (x, gx)
    return None


def _solve_gap(gap, bracket, cfg):
    def strict(a):
        g = gap(a)
        if g is None:
            raise NoRootInRange(f"boundary branch undefined at a={a!r}")
        return g
    try:
        return find_root_bracketed(strict, bracket, cfg), True
    except MaxIterExceeded as exc:
        return exc.estimate, False
    except NoRootInRange as exc:
        raise DomainNotFound(str(exc)) from exc


def compute_domain(cp: CardinalPoints,
                   cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> DomainResult:
    """
    Corner ``(a_max, r_s_min)`` of the feasible SDM-1 domain.

    ``a_max`` is the smaller of the ``f_mp(a, 0) = 0`` root and the ``a`` at
    which ``r_s_mp(a)`` and ``r_s_sh(a)`` intersect.

    Raises
    ------
    DomainNotFound
        If neither rule yields a bracketed root.
    """
    try:
        a_zero = a_at_zero_rs(cp, cfg)
        zero_converged = True
    except MaxIterExceeded as exc:
        a_zero, zero_converged = exc.estimate, False
    except NoRootInRange:
        a_zero, zero_converged = None, False

    cap = a_zero if a_zero is not None else math.inf
    hit = _intersection(cp, cap, cfg)

    if hit is not None and (a_zero is None or hit[0] <= a_zero):
        a_max, converged = hit
        try:
            r_s_min = r_s_mp_of_a(cp, a_max, cfg)
        except MaxIterExceeded as exc:
            r_s_min, converged = exc.estimate, False
        rule = SelectionRule.INTERSECTION
    elif a_zero is not None:
        a_max, r_s_min, converged = a_zero, 0.0, zero_converged
        rule = SelectionRule.MP_AT_ZERO_RS
    else:
        raise DomainNotFound(f"no domain boundary found for {cp}")

    return DomainResult(
        a_max=a_max,
        r_s_min=r_s_min,
        selected_rule=rule,
        converged=converged,
        f_sh_residual=f_sh(cp, a_max, r_s_min),
        f_mp_residual=f_mp(cp, a_max, r_s_min),
    )


# -- parameter reconstruction -----------------------------------------------

def linear_parameters(cp: CardinalPoints, a: float,
                      r_s: float) -> tuple[float, float, float]:
    """
    Raw ``(i_ph, i_o, g_sh)`` that put the SDM through all three cardinal
    points for the given ``(a, r_s)``. No sign checks.
    """
    i_ph, i_o_scaled, m, g_sh = _linear_scaled(cp, a, r_s)
    return i_ph, i_o_scaled * math.exp(-m), g_sh


def _linear_scaled(cp, a, r_s):
    if not (a > 0.0 and r_s >= 0.0):
        raise ValueError("need a > 0 and r_s >= 0")
    rows = (
        (r_s * cp.i_sc, cp.i_sc),
        (cp.v_mp + r_s * cp.i_mp, cp.i_mp),
        (cp.v_oc, 0.0),
    )
    # i_o is solved as i_o * exp(m) so the matrix stays O(1) for small a
    m = max(v_j for v_j, _ in rows) / a
    matrix = [[1.0, -(math.exp(v_j / a - m) - math.exp(-m)), -v_j] for v_j, _ in rows]
    i_ph, i_o_scaled, g_sh = solve_linear_3x3(matrix, [i for _, i in rows])
    return i_ph, i_o_scaled, m, g_sh


def reconstruct_parameters(cp: CardinalPoints, a: float,
                           r_s: float) -> SdmParameters:
    """
    Full SDM parameter set through the three cardinal points.

    Raises
    ------
    NonPositiveParameters
        When ``(a, r_s)`` lies outside the feasible domain.
    SaturationCurrentUnderflow
        When ``i_o`` is positive but not representable as a double.
    SingularMatrix
        For degenerate cardinal geometry.
    """
    i_ph, i_o_scaled, m, g_sh = _linear_scaled(cp, a, r_s)
    i_o = i_o_scaled * math.exp(-m)
    values = {"i_ph": i_ph, "i_o": i_o, "a": a, "g_sh": g_sh, "r_s": r_s}
    # signs are judged on the scaled i_o, which cannot underflow
    offending = [k for k, bad in (("i_ph", i_ph <= 0.0), ("i_o", i_o_scaled <= 0.0),
                                  ("g_sh", g_sh < 0.0)) if bad]
    if offending:
        raise NonPositiveParameters(values, offending)
    if i_o == 0.0:
        raise SaturationCurrentUnderflow(
            f"i_o = {i_o_scaled!r} * exp(-{m!r}) underflows at a={a!r}")
    return SdmParameters(**values)


def reduced_solution(cp: CardinalPoints, a: float,
                     cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> SdmParameters:
    """Member of the one-parameter family at diode factor ``a``."""
    return reconstruct_parameters(cp, a, r_s_mp_of_a(cp, a, cfg))


def boundary_traces(cp: CardinalPoints, a_values,
                    cfg: RootConfig = DEFAULT_ROOT_CONFIG):
    """
    ``(a, r_s_sh, r_s_mp)`` for each ``a``; a branch that does not exist at
    ``a`` is reported as ``None``.
    """
    out = []
    for a in a_values:
        pair = []
        for fn in (r_s_sh_of_a, r_s_mp_of_a):
            try:
                pair.append(fn(cp, a, cfg))
            except (NoRootInRange, NumericsError):
                pair.append(None)
        out.append((a, pair[0], pair[1]))
    return out
