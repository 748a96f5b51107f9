"""
Single-diode model (SDM) value types, the implicit I-V equation and curve
synthesis.

The model relates terminal voltage ``v_pv`` and current ``i_pv`` through::

    i_ph = i_o * (exp(v_j / a) - 1) + g_sh * v_j + i_pv,   v_j = v_pv + r_s * i_pv

with ``a`` the equivalent diode factor in volts (``n * N_s * k_B * T / q``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .numerics import (DEFAULT_ROOT_CONFIG, Bracket, NoSignChange, RootConfig,
                       find_root_bracketed)

# largest exponent accepted before exp() is considered nonphysical
MAX_EXPONENT = 700.0


class ValidationError(ValueError):
    """Input values violate a domain invariant."""


class ExpOverflow(ArithmeticError):
    """Junction voltage over diode factor is too large to evaluate."""


class NoSolutionInBracket(ValueError):
    """The requested voltage lies outside the modelled curve."""


@dataclass(frozen=True)
class PhysicalConstants:
    """Exact SI values of the elementary charge and Boltzmann constant."""

    q: float = 1.602176634e-19
    k_b: float = 1.380649e-23


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class CardinalPoints:
    """Short-circuit, open-circuit and maximum-power points of one curve."""

    i_sc: float
    v_oc: float
    i_mp: float
    v_mp: float

    def __post_init__(self):
        values = (self.i_sc, self.v_oc, self.i_mp, self.v_mp)
        if not all(math.isfinite(v) and v > 0.0 for v in values):
            raise ValidationError(f"cardinal values must be finite and > 0: {values}")
        if not self.i_mp < self.i_sc:
            raise ValidationError(f"i_mp ({self.i_mp}) must be < i_sc ({self.i_sc})")
        if not self.v_mp < self.v_oc:
            raise ValidationError(f"v_mp ({self.v_mp}) must be < v_oc ({self.v_oc})")
        if not 2.0 * self.i_mp - self.i_sc > 0.0:
            raise ValidationError(
                f"2*i_mp - i_sc must be > 0 (i_mp={self.i_mp}, i_sc={self.i_sc})")
        if not 2.0 * self.v_mp - self.v_oc > 0.0:
            raise ValidationError(
                f"2*v_mp - v_oc must be > 0 (v_mp={self.v_mp}, v_oc={self.v_oc})")

    @property
    def fill_factor(self) -> float:
        return self.v_mp * self.i_mp / (self.v_oc * self.i_sc)

    def scaled(self, current: float = 1.0, voltage: float = 1.0) -> "CardinalPoints":
        """Copy with all currents and voltages multiplied by the given factors."""
        return CardinalPoints(self.i_sc * current, self.v_oc * voltage,
                              self.i_mp * current, self.v_mp * voltage)


@dataclass(frozen=True)
class SdmParameters:
    """The five SDM parameters; ``a`` in volts, ``g_sh`` in siemens."""

    i_ph: float
    i_o: float
    a: float
    g_sh: float
    r_s: float

    def __post_init__(self):
        values = (self.i_ph, self.i_o, self.a, self.g_sh, self.r_s)
        if not all(math.isfinite(v) for v in values):
            raise ValidationError(f"parameters must be finite: {values}")
        if not (self.a > 0.0 and self.i_o > 0.0 and self.i_ph > 0.0):
            raise ValidationError(f"a, i_o and i_ph must be > 0: {self}")
        if self.g_sh < 0.0 or self.r_s < 0.0:
            raise ValidationError(f"g_sh and r_s must be >= 0: {self}")

    @property
    def r_sh(self) -> float:
        return math.inf if self.g_sh == 0.0 else 1.0 / self.g_sh

    def is_strictly_positive(self) -> bool:
        return min(self.i_ph, self.i_o, self.a, self.g_sh, self.r_s) > 0.0


@dataclass(frozen=True)
class ModuleMetadata:
    n_s: int
    t_pv: float
    label: str | None = None

    def __post_init__(self):
        if self.n_s < 1:
            raise ValidationError("n_s must be >= 1")
        if not self.t_pv > 0.0:
            raise ValidationError("t_pv must be > 0 K")


class IVPoint(NamedTuple):
    v_pv: float
    i_pv: float


def _exp(x: float) -> float:
    if x > MAX_EXPONENT:
        raise ExpOverflow(f"exponent {x!r} exceeds {MAX_EXPONENT}")
    return math.exp(x)


def diode_current(i_o: float, v_j: float, a: float) -> float:
    """Shockley diode current ``i_o * (exp(v_j / a) - 1)``."""
    if not (i_o > 0.0 and a > 0.0):
        raise ValidationError("i_o and a must be > 0")
    x = v_j / a
    if x > MAX_EXPONENT:
        raise ExpOverflow(f"v_j / a = {x!r} exceeds {MAX_EXPONENT}")
    return i_o * math.expm1(x)


def equivalent_factor(n: float, meta: ModuleMetadata,
                      constants: PhysicalConstants = CONSTANTS) -> float:
    """Equivalent diode factor ``A = n * N_s * k_B * T_pv / q`` in volts."""
    if not n > 0.0:
        raise ValidationError("ideality factor n must be > 0")
    return n * meta.n_s * constants.k_b * meta.t_pv / constants.q


def sdm_residual(p: SdmParameters, point: IVPoint) -> float:
    """
    Residual of the implicit SDM equation at ``point``, in amperes.

    Zero exactly on the modelled curve; strictly increasing in ``i_pv``.
    """
    v_j = point.v_pv + p.r_s * point.i_pv
    return diode_current(p.i_o, v_j, p.a) + p.g_sh * v_j + point.i_pv - p.i_ph


def _residual_in_current(p: SdmParameters, v_pv: float):
    def r(i_pv):
        v_j = v_pv + p.r_s * i_pv
        # clipping keeps the sign (and monotonicity) without overflowing
        x = min(v_j / p.a, MAX_EXPONENT)
        return p.i_o * math.expm1(x) + p.g_sh * v_j + i_pv - p.i_ph
    return r


def solve_current_at_voltage(p: SdmParameters, v_pv: float,
                             cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> float:
    """
    Terminal current at voltage ``v_pv``.

    The residual is strictly monotone in current, so the root in
    ``[-0.1 * i_ph, 1.1 * i_ph]`` is unique when it exists.
    """
    r = _residual_in_current(p, v_pv)
    try:
        bracket = Bracket.from_function(r, -0.1 * p.i_ph, 1.1 * p.i_ph)
    except NoSignChange as exc:
        raise NoSolutionInBracket(
            f"no current in [-0.1, 1.1] * i_ph at v_pv = {v_pv!r}") from exc
    return find_root_bracketed(r, bracket, cfg)


def _residual_in_voltage_at_zero_current(p):
    def r(v):
        return p.i_o * math.expm1(min(v / p.a, MAX_EXPONENT)) + p.g_sh * v - p.i_ph
    return r


def open_circuit_voltage(p: SdmParameters,
                         cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> float:
    """Voltage where the modelled current vanishes."""
    r = _residual_in_voltage_at_zero_current(p)
    # diode term alone reaches i_ph here; shunt current only lowers the root
    hi = p.a * math.log1p(p.i_ph / p.i_o) * (1.0 + 1e-9)
    return find_root_bracketed(r, Bracket.from_function(r, 0.0, hi), cfg)


def power_slope(p: SdmParameters, v_pv: float,
                cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> float:
    """Analytic ``dP/dV`` of the modelled curve at ``v_pv``."""
    i = solve_current_at_voltage(p, v_pv, cfg)
    v_j = v_pv + p.r_s * i
    g = p.i_o / p.a * _exp(v_j / p.a) + p.g_sh
    di_dv = -g / (1.0 + p.r_s * g)
    return i + v_pv * di_dv


def sample_curve(p: SdmParameters, n_points: int,
                 cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> list[IVPoint]:
    """
    Sample the curve on a uniform voltage grid from 0 to the model's own
    open-circuit voltage (both ends included).
    """
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    v_end = open_circuit_voltage(p, cfg)
    step = v_end / (n_points - 1)
    points = []
    for k in range(n_points):
        v = v_end if k == n_points - 1 else k * step
        points.append(IVPoint(v, solve_current_at_voltage(p, v, cfg)))
    return points
