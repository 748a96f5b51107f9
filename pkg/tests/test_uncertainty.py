import random
from types import SimpleNamespace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvsdm1.sdm1 import compute_domain
from pvsdm1.sdm_core import ValidationError
from pvsdm1.uncertainty import (BandStatus, EmptyInput, Realization,
                                UncertainCardinalPoints, corner_domains,
                                domain_interval, interval_from_realizations,
                                parameter_band, realize,
                                summarize_uncertainties)

from conftest import NOMINAL


def row(isc, voc=0.5, imp=1.1, vmp=0.9):
    return SimpleNamespace(u_isc_pct=isc, u_voc_pct=voc, u_imp_pct=imp, u_vmp_pct=vmp)


def test_realize_by_arithmetic(ucp):
    low = realize(ucp, Realization.LOW)
    high = realize(ucp, Realization.HIGH)
    assert (low.i_sc, low.v_oc, low.i_mp, low.v_mp) == pytest.approx((5.24, 21.07, 4.83, 16.64))
    assert (high.i_sc, high.v_oc, high.i_mp, high.v_mp) == pytest.approx((5.28, 21.23, 4.87, 16.78))
    assert realize(ucp, Realization.NOMINAL) == NOMINAL


def test_realize_zero_widths():
    ucp = UncertainCardinalPoints(NOMINAL)
    assert realize(ucp, Realization.LOW) == NOMINAL == realize(ucp, Realization.HIGH)


@settings(max_examples=100, deadline=None)
@given(st.tuples(*[st.floats(0.0, 0.05)] * 4))
def test_realizations_ordered(widths):
    ucp = UncertainCardinalPoints(NOMINAL, *widths)
    lo, mid, hi = (realize(ucp, w) for w in Realization)
    for f in ("i_sc", "v_oc", "i_mp", "v_mp"):
        assert getattr(lo, f) <= getattr(mid, f) <= getattr(hi, f)


def test_invalid_realization_rejected():
    with pytest.raises(ValidationError):
        UncertainCardinalPoints(NOMINAL, du_isc=0.0, du_imp=0.5)
    with pytest.raises(ValidationError):
        UncertainCardinalPoints(NOMINAL, du_isc=-0.01)


def test_interval_contains_both_endpoints(ucp):
    iv = domain_interval(ucp)
    lo, hi = iv.a_max_interval
    assert lo <= hi
    assert {lo, hi} == {iv.low.a_max, iv.high.a_max}
    assert iv.low.a_max != iv.high.a_max


def test_interval_from_explicit_realizations():
    from conftest import HIGH_PUBLISHED, LOW_PUBLISHED
    iv = interval_from_realizations(LOW_PUBLISHED, HIGH_PUBLISHED)
    assert iv.low == compute_domain(LOW_PUBLISHED)
    assert iv.high == compute_domain(HIGH_PUBLISHED)


def test_zero_width_interval_degenerate():
    iv = domain_interval(UncertainCardinalPoints(NOMINAL))
    d = compute_domain(NOMINAL)
    assert iv.a_max_interval == (d.a_max, d.a_max)
    assert iv.r_s_min_interval == (d.r_s_min, d.r_s_min)


def test_shrinking_widths_gives_nested_intervals(ucp):
    prev = None
    for t in (0.0, 0.5, 1.0):
        lo, hi = domain_interval(ucp.shrunk(t)).a_max_interval
        if prev is not None:
            assert lo <= prev[0] and prev[1] <= hi
        prev = (lo, hi)


def test_corner_analysis(ucp):
    corners = corner_domains(ucp)
    assert len(corners) == 16
    assert len({c.signs for c in corners}) == 16
    ok = [c for c in corners if c.domain is not None]
    distinct = {(round(c.domain.a_max, 9), round(c.domain.r_s_min, 9)) for c in ok}
    assert len(distinct) >= 2
    # the two all-same-sign corners are the two-endpoint interval
    iv = domain_interval(ucp)
    by_signs = {c.signs: c.domain for c in ok}
    assert by_signs[(-1, -1, -1, -1)] == iv.low
    assert by_signs[(1, 1, 1, 1)] == iv.high


def test_band_feasible_at_a_1(ucp):
    (r,) = parameter_band(ucp, [1.0])
    assert r.status is BandStatus.OK
    assert r.low.is_strictly_positive() and r.high.is_strictly_positive()


def test_band_degenerate_widths():
    ucp = UncertainCardinalPoints(NOMINAL)
    for r in parameter_band(ucp, [0.8, 1.0, 1.2]):
        assert r.low == r.high


def test_band_widths_vary_with_a(ucp):
    rows = parameter_band(ucp, [0.9, 1.1, 1.3])
    assert all(r.status is BandStatus.OK for r in rows)
    for name in ("i_o", "g_sh", "r_s"):
        widths = [abs(getattr(r.high, name) - getattr(r.low, name)) for r in rows]
        assert max(widths) - min(widths) > 1e-3 * max(widths), name


def test_band_marks_infeasible_rows_in_place(ucp):
    iv = domain_interval(ucp)
    a_between = 0.5 * (iv.high.a_max + iv.low.a_max)
    rows = parameter_band(ucp, [1.0, a_between, 5.0])
    assert [r.a for r in rows] == [1.0, a_between, 5.0]
    if iv.low.a_max < iv.high.a_max:
        assert rows[1].status is BandStatus.INFEASIBLE_LOW
        assert rows[1].low is None and rows[1].high is not None
    else:
        assert rows[1].status is BandStatus.INFEASIBLE_HIGH
        assert rows[1].high is None and rows[1].low is not None
    assert rows[2].status is BandStatus.INFEASIBLE


def test_summary_singleton():
    stats = summarize_uncertainties([row(1.0, 0.5, 1.1, 0.9)])
    for name, v in zip(("isc", "voc", "imp", "vmp"), (1.0, 0.5, 1.1, 0.9)):
        s = stats[name]
        assert (s.min, s.mean, s.max, s.sd) == (v, v, v, 0.0)


def test_summary_population_sd():
    s = summarize_uncertainties([row(1.0), row(3.0)])["isc"]
    assert (s.min, s.mean, s.max, s.sd) == (1.0, 2.0, 3.0, 1.0)


def test_summary_rounding():
    s = summarize_uncertainties([row(0.24), row(1.26)])["isc"].rounded(1)
    assert (s.min, s.max) == (0.2, 1.3)


def test_summary_empty():
    with pytest.raises(EmptyInput):
        summarize_uncertainties([])


pct = st.floats(0.0, 20.0, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(pct, pct, pct, pct), min_size=1, max_size=30), st.randoms())
def test_summary_permutation_invariant(values, rnd):
    rows = [row(*v) for v in values]
    shuffled = rows[:]
    rnd.shuffle(shuffled)
    a, b = summarize_uncertainties(rows), summarize_uncertainties(shuffled)
    for name in a:
        assert (a[name].min, a[name].max) == (b[name].min, b[name].max)
        assert a[name].mean == pytest.approx(b[name].mean, rel=1e-12, abs=1e-12)
        assert a[name].sd == pytest.approx(b[name].sd, rel=1e-9, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(pct, pct, pct, pct), min_size=1, max_size=30),
       st.floats(0.1, 10.0))
def test_summary_scale_equivariant(values, k):
    a = summarize_uncertainties([row(*v) for v in values])
    b = summarize_uncertainties([row(*(k * x for x in v)) for v in values])
    for name in a:
        for f in ("min", "mean", "max", "sd"):
            assert getattr(b[name], f) == pytest.approx(k * getattr(a[name], f),
                                                        rel=1e-9, abs=1e-12)


def test_summary_large_input_is_fast():
    import time
    rnd = random.Random(3)
    rows = [row(*(round(rnd.uniform(0.2, 12.7), 1) for _ in range(4))) for _ in range(40000)]
    t0 = time.perf_counter()
    summarize_uncertainties(rows)
    assert time.perf_counter() - t0 < 5.0
