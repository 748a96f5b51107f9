import io
import json
from datetime import datetime

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvsdm1.ingest import (NATIVE_MAPPING, ColumnMapping, CurveRecord,
                           MappingMismatch, OutputFormat, UnreadableInput,
                           parse_records, record_fields, to_uncertain,
                           write_results)
from pvsdm1.sdm_core import CardinalPoints, ValidationError
from pvsdm1.uncertainty import Realization, realize

from conftest import NOMINAL

HEADER = "timestamp,isc_a,voc_v,imp_a,vmp_v,u_isc_pct,u_voc_pct,u_imp_pct,u_vmp_pct\n"
ROWS = [
    "2011-01-22T12:05:04,5.26,21.15,4.85,16.71,0.4,0.4,0.4,0.4\n",
    "2011-01-22T12:10:04,5.30,21.10,4.90,16.60,1.2,0.5,1.3,1.0\n",
    "2011-01-22T12:15:04,2.10,20.40,1.95,16.90,0.2,0.9,0.3,0.4\n",
]


def parse(text, mapping=NATIVE_MAPPING):
    return parse_records(io.StringIO(text), mapping)


def test_three_row_round_trip():
    records, diags = parse(HEADER + "".join(ROWS))
    assert diags == []
    assert len(records) == 3
    r = records[0]
    assert r.timestamp == datetime(2011, 1, 22, 12, 5, 4)
    assert r.cardinal == NOMINAL
    assert (r.u_isc_pct, r.u_voc_pct, r.u_imp_pct, r.u_vmp_pct) == (0.4, 0.4, 0.4, 0.4)
    assert [r.source_line for r in records] == [2, 3, 4]
    assert r.irradiance is None and r.t_module_k is None


def test_invariant_violation_becomes_diagnostic():
    bad = "2011-01-22T12:20:04,5.00,21.00,5.00,16.00,0.4,0.4,0.4,0.4\n"
    records, diags = parse(HEADER + ROWS[0] + bad + ROWS[1])
    assert len(records) == 2
    assert len(diags) == 1
    assert diags[0].line == 3
    assert "i_mp" in diags[0].reason


def test_malformed_cells_and_blank_lines():
    text = HEADER + ROWS[0] + "\n" + "not-a-date,5.26,21.15,4.85,16.71,0.4,0.4,0.4,0.4\n" \
        + "2011-01-22T12:05:04,abc,21.15,4.85,16.71,0.4,0.4,0.4,0.4\n" \
        + "2011-01-22T12:05:04,5.26,21.15,4.85,16.71,-0.4,0.4,0.4,0.4\n" \
        + "2011-01-22T12:05:04,5.26\n"
    records, diags = parse(text)
    assert len(records) == 1
    assert [d.line for d in diags] == [4, 5, 6, 7]
    # records + diagnostics account for every non-blank data row
    assert len(records) + len(diags) == 5


def test_mapping_mismatch():
    with pytest.raises(MappingMismatch):
        parse(HEADER + "2011-01-22T12:05:04,5.26,21.15\n")
    with pytest.raises(MappingMismatch):
        parse("a,b,c\n1,2,3\n")


def test_unreadable_stream():
    class Broken(io.StringIO):
        def __iter__(self):
            raise OSError("disk gone")
    with pytest.raises(UnreadableInput):
        parse_records(Broken(""), NATIVE_MAPPING)


def test_optional_columns_and_celsius():
    text = HEADER.rstrip("\n") + ",irradiance_wm2,t_module_c\n" + ROWS[0].rstrip("\n") + ",1000,25\n"
    (r,), _ = parse(text)
    assert r.irradiance == 1000.0
    assert r.t_module_k == pytest.approx(298.15)
    assert record_fields(r)["t_module_c"] == pytest.approx(25.0)


def test_mapping_file_by_header_text_with_decimal_comma():
    mapping = ColumnMapping.from_json(json.dumps({
        "timestamp": "Date", "isc": "Isc", "voc": "Voc", "imp": "Imp", "vmp": "Vmp",
        "u_isc": "uIsc", "u_voc": "uVoc", "u_imp": "uImp", "u_vmp": "uVmp",
        "temperature": "Tmod",
        "delimiter": ";", "decimal_separator": ",", "header_rows": 2,
        "temperature_unit": "K", "timestamp_format": "%d/%m/%Y %H:%M:%S",
    }))
    text = ("Cocoa archive export\n"
            "Date;Tmod;Voc;Isc;Vmp;Imp;uIsc;uVoc;uImp;uVmp\n"
            "22/01/2011 12:05:04;310,5;21,15;5,26;16,71;4,85;0,4;0,4;0,4;0,4\n")
    (r,), diags = parse(text, mapping)
    assert diags == []
    assert r.cardinal == NOMINAL
    assert r.t_module_k == 310.5
    assert r.timestamp == datetime(2011, 1, 22, 12, 5, 4)


def test_mapping_by_index_without_header():
    mapping = ColumnMapping(columns={
        "timestamp": 0, "isc": 1, "voc": 2, "imp": 3, "vmp": 4,
        "u_isc": 5, "u_voc": 6, "u_imp": 7, "u_vmp": 8}, header_rows=0)
    records, diags = parse("".join(ROWS), mapping)
    assert len(records) == 3 and diags == []


def test_mapping_validation():
    with pytest.raises(ValueError):
        ColumnMapping(columns={"timestamp": 0})
    cols = {f: i for i, f in enumerate(("timestamp", "isc", "voc", "imp", "vmp",
                                        "u_isc", "u_voc", "u_imp", "u_vmp"))}
    with pytest.raises(ValueError):
        ColumnMapping(columns={**cols, "voc": 1})
    with pytest.raises(ValueError):
        ColumnMapping(columns={**cols, "wind": 12})
    with pytest.raises(ValueError):
        ColumnMapping(columns=cols, temperature_unit="F")


def record(**pcts):
    base = dict(u_isc_pct=0.4, u_voc_pct=0.4, u_imp_pct=0.4, u_vmp_pct=0.4)
    base.update(pcts)
    return CurveRecord(timestamp=datetime(2011, 1, 22, 12, 5, 4), cardinal=NOMINAL, **base)


def test_to_uncertain_percent_conversion():
    ucp = to_uncertain(record())
    assert ucp.du_isc == pytest.approx(0.02104)
    assert ucp.du_voc == pytest.approx(0.0846)
    assert round(ucp.du_isc, 2) == 0.02
    assert round(ucp.du_voc, 2) == 0.08


def test_to_uncertain_zero_percent():
    ucp = to_uncertain(record(u_isc_pct=0.0, u_voc_pct=0.0, u_imp_pct=0.0, u_vmp_pct=0.0))
    assert ucp.half_widths == (0.0, 0.0, 0.0, 0.0)


def test_to_uncertain_nominal_identity():
    assert realize(to_uncertain(record()), Realization.NOMINAL) == NOMINAL


def test_record_rejects_negative_percent():
    with pytest.raises(ValidationError):
        record(u_vmp_pct=-1.0)


def test_write_empty_csv_is_header_only():
    buf = io.StringIO()
    write_results([], "csv", buf, columns=["a_max_v", "r_s_min_ohm"])
    assert buf.getvalue() == "a_max_v,r_s_min_ohm\n"


def test_write_csv_rendering():
    buf = io.StringIO()
    write_results([{"x": 0.1, "ok": True, "missing": None, "rule": OutputFormat.CSV}], "csv", buf)
    assert buf.getvalue() == "x,ok,missing,rule\n0.1,true,,csv\n"


def test_write_is_byte_stable():
    rows = [{"a_max_v": 1.3225541, "r_s_min_ohm": 0.21963, "selected_rule": "intersection"}]
    outs = set()
    for _ in range(3):
        for fmt in ("csv", "json"):
            buf = io.StringIO()
            write_results(rows, fmt, buf)
            outs.add((fmt, buf.getvalue()))
    assert len(outs) == 2
    assert all(text.endswith("\n") for _, text in outs)


def test_write_rejects_heterogeneous_rows():
    with pytest.raises(ValueError):
        write_results([{"a": 1}, {"b": 2}], "csv", io.StringIO())


finite = st.floats(allow_nan=False, allow_infinity=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.fixed_dictionaries({"a": finite, "b": st.text(max_size=8),
                                       "c": st.one_of(st.none(), st.booleans())}),
                max_size=10))
def test_json_round_trip(rows):
    buf = io.StringIO()
    write_results(rows, "json", buf, columns=["a", "b", "c"])
    assert json.loads(buf.getvalue()) == rows


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=1, max_size=10))
def test_csv_floats_round_trip(values):
    buf = io.StringIO()
    write_results([{"v": v} for v in values], "csv", buf)
    lines = buf.getvalue().splitlines()[1:]
    assert [float(x) for x in lines] == values
