"""
Propagation of cardinal-point measurement uncertainty into the SDM-1 domain.

The default propagation evaluates two realizations, every cardinal value
shifted down by its half-width (low) and every value shifted up (high), and
reports the componentwise envelope of the two ``(a_max, r_s_min)`` corners.
An optional corner mode evaluates all 16 sign combinations.
"""

from __future__ import annotations

import enum
import itertools
import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .numerics import DEFAULT_ROOT_CONFIG, NumericsError, RootConfig
from .sdm1 import (DomainNotFound, DomainResult, NoRootInRange,
                   NonPositiveParameters, SaturationCurrentUnderflow,
                   compute_domain, reduced_solution)
from .sdm_core import CardinalPoints, SdmParameters, ValidationError

FIELDS = ("i_sc", "v_oc", "i_mp", "v_mp")


class Realization(enum.Enum):
    LOW = "low"
    NOMINAL = "nominal"
    HIGH = "high"


class RealizationDomainError(DomainNotFound):
    """Domain computation failed for one realization."""

    def __init__(self, which: Realization, cause: Exception):
        super().__init__(f"{which.value} realization: {cause}")
        self.which = which
        self.cause = cause


@dataclass(frozen=True)
class UncertainCardinalPoints:
    """Nominal cardinal points with absolute half-widths (the ``±`` values)."""

    nominal: CardinalPoints
    du_isc: float = 0.0
    du_voc: float = 0.0
    du_imp: float = 0.0
    du_vmp: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(d) and d >= 0.0 for d in self.half_widths):
            raise ValidationError(f"half-widths must be finite and >= 0: {self.half_widths}")
        for which in (Realization.LOW, Realization.HIGH):
            realize(self, which)

    @property
    def half_widths(self) -> tuple[float, float, float, float]:
        return self.du_isc, self.du_voc, self.du_imp, self.du_vmp

    def shrunk(self, t: float) -> "UncertainCardinalPoints":
        """Same nominal values with every half-width multiplied by ``t``."""
        return UncertainCardinalPoints(self.nominal, *(t * d for d in self.half_widths))


def _shifted(cp: CardinalPoints, signs, widths) -> CardinalPoints:
    vals = [getattr(cp, f) + s * d for f, s, d in zip(FIELDS, signs, widths)]
    return CardinalPoints(*vals)


def realize(ucp: UncertainCardinalPoints, which: Realization) -> CardinalPoints:
    """All-low, nominal or all-high cardinal points; validated on construction."""
    if which is Realization.NOMINAL:
        return ucp.nominal
    sign = -1.0 if which is Realization.LOW else 1.0
    try:
        return _shifted(ucp.nominal, (sign,) * 4, ucp.half_widths)
    except ValidationError as exc:
        raise ValidationError(f"{which.value} realization invalid: {exc}") from exc


@dataclass(frozen=True)
class DomainInterval:
    low: DomainResult
    high: DomainResult

    @property
    def a_max_interval(self) -> tuple[float, float]:
        return _envelope(self.low.a_max, self.high.a_max)

    @property
    def r_s_min_interval(self) -> tuple[float, float]:
        return _envelope(self.low.r_s_min, self.high.r_s_min)


def _envelope(x, y):
    return (min(x, y), max(x, y))


def interval_from_realizations(low: CardinalPoints, high: CardinalPoints,
                               cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> DomainInterval:
    """
    Domain interval from explicitly given low/high cardinal points, e.g.
    values that were rounded for publication independently of the nominal.
    """
    results = {}
    for which, cp in ((Realization.LOW, low), (Realization.HIGH, high)):
        try:
            results[which] = compute_domain(cp, cfg)
        except DomainNotFound as exc:
            raise RealizationDomainError(which, exc) from exc
    return DomainInterval(results[Realization.LOW], results[Realization.HIGH])


def domain_interval(ucp: UncertainCardinalPoints,
                    cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> DomainInterval:
    return interval_from_realizations(realize(ucp, Realization.LOW),
                                      realize(ucp, Realization.HIGH), cfg)


@dataclass(frozen=True)
class CornerResult:
    signs: tuple[int, int, int, int]
    cardinal: CardinalPoints | None
    domain: DomainResult | None
    error: str | None = None


def corner_domains(ucp: UncertainCardinalPoints,
                   cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> list[CornerResult]:
    """
    Domain corner for each of the 16 sign patterns over
    ``(i_sc, v_oc, i_mp, v_mp)``; failures are recorded, not raised.
    """
    out = []
    for signs in itertools.product((-1, 1), repeat=4):
        try:
            cp = _shifted(ucp.nominal, signs, ucp.half_widths)
        except ValidationError as exc:
            out.append(CornerResult(signs, None, None, str(exc)))
            continue
        try:
            out.append(CornerResult(signs, cp, compute_domain(cp, cfg)))
        except DomainNotFound as exc:
            out.append(CornerResult(signs, cp, None, str(exc)))
    return out


class BandStatus(enum.Enum):
    OK = "ok"
    INFEASIBLE_LOW = "infeasible_low"
    INFEASIBLE_HIGH = "infeasible_high"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class BandRow:
    a: float
    low: SdmParameters | None
    high: SdmParameters | None
    status: BandStatus


def parameter_band(ucp: UncertainCardinalPoints, a_grid: Iterable[float],
                   cfg: RootConfig = DEFAULT_ROOT_CONFIG) -> list[BandRow]:
    """
    Low/high one-parameter solutions along ``a_grid``.

    Rows outside either realization's feasible domain keep their place in
    the table with a status marker and ``None`` for the missing side.
    """
    low_cp = realize(ucp, Realization.LOW)
    high_cp = realize(ucp, Realization.HIGH)
    rows = []
    for a in a_grid:
        low = _try_reduced(low_cp, a, cfg)
        high = _try_reduced(high_cp, a, cfg)
        if low and high:
            status = BandStatus.OK
        elif high:
            status = BandStatus.INFEASIBLE_LOW
        elif low:
            status = BandStatus.INFEASIBLE_HIGH
        else:
            status = BandStatus.INFEASIBLE
        rows.append(BandRow(a, low, high, status))
    return rows


def _try_reduced(cp, a, cfg):
    try:
        return reduced_solution(cp, a, cfg)
    except (NonPositiveParameters, NoRootInRange, NumericsError, ValueError,
            SaturationCurrentUnderflow):
        return None


# -- dataset statistics -----------------------------------------------------

STAT_VARIABLES = ("isc", "voc", "imp", "vmp")


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class VariableStats:
    min: float
    mean: float
    max: float
    sd: float

    def rounded(self, ndigits: int = 1) -> "VariableStats":
        return VariableStats(*(round(v, ndigits) for v in
                               (self.min, self.mean, self.max, self.sd)))


def _stats(values: Sequence[float]) -> VariableStats:
    # population standard deviation (divide by N)
    return VariableStats(min(values), statistics.fmean(values), max(values),
                         statistics.pstdev(values))


def summarize_uncertainties(rows) -> dict[str, VariableStats]:
    """
    Min, mean, max and population standard deviation of the percent
    uncertainties of each cardinal value over ``rows``.

    ``rows`` are objects with ``u_isc_pct``, ``u_voc_pct``, ``u_imp_pct`` and
    ``u_vmp_pct`` attributes, such as :class:`pvsdm1.ingest.CurveRecord`.
    """
    rows = list(rows)
    if not rows:
        raise EmptyInput("no rows to summarize")
    return {name: _stats([getattr(r, f"u_{name}_pct") for r in rows])
            for name in STAT_VARIABLES}
