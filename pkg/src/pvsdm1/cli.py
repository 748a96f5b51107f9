"""
Command-line interface.

Exit codes: 0 success, 1 unexpected internal failure, 2 input or validation
error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys

from . import __version__
from .ingest import (NATIVE_MAPPING, NREL_MAPPING, ColumnMapping,
                     MappingMismatch, OutputFormat, UnreadableInput,
                     parse_records, record_fields, to_uncertain, write_results)
from .numerics import DEFAULT_ROOT_CONFIG, NumericsError, RootConfig
from .sdm1 import (DomainNotFound, NoRootInRange, NonPositiveParameters,
                   boundary_traces, compute_domain, reduced_solution)
from .sdm_core import (CardinalPoints, NoSolutionInBracket, ValidationError,
                       sample_curve)
from .uncertainty import (STAT_VARIABLES, EmptyInput, Realization,
                          UncertainCardinalPoints, corner_domains,
                          interval_from_realizations, realize,
                          summarize_uncertainties)

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_CONVERGENCE = 0, 1, 2, 3

INPUT_ERRORS = (ValidationError, EmptyInput, MappingMismatch, UnreadableInput,
                FileNotFoundError, ValueError)
CONVERGENCE_ERRORS = (DomainNotFound, NoRootInRange, NonPositiveParameters,
                      NumericsError, NoSolutionInBracket, ArithmeticError)


class CliError(Exception):
    def __init__(self, message, exit_code, kind="error", detail=None):
        super().__init__(message)
        self.exit_code = exit_code
        self.kind = kind
        self.detail = detail


def root_config_from_env(environ=os.environ) -> RootConfig:
    """Default tolerances, overridable by ``SDM1_ABS_TOL_F``/``SDM1_ABS_TOL_X``."""
    kw = {}
    for var, key in (("SDM1_ABS_TOL_F", "abs_tol_f"), ("SDM1_ABS_TOL_X", "abs_tol_x")):
        if environ.get(var):
            kw[key] = float(environ[var])
    if not kw:
        return DEFAULT_ROOT_CONFIG
    return RootConfig(**{**DEFAULT_ROOT_CONFIG.__dict__, **kw})


def parse_grid(spec: str) -> list[float]:
    """``start:stop:count`` with inclusive endpoints."""
    try:
        start, stop, count = spec.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:count, got {spec!r}")
    if count < 1:
        raise argparse.ArgumentTypeError("grid count must be >= 1")
    if count == 1:
        return [start]
    return [start + (stop - start) * k / (count - 1) for k in range(count)]


# -- argument parsing -------------------------------------------------------

def _add_common(p, uncertain=False, realization=False):
    src = p.add_argument_group("input (either --input or all four cardinal flags)")
    src.add_argument("--input", "-i", help="native CSV (or mapped archive) of curves")
    src.add_argument("--mapping", help="JSON column-mapping file for --input")
    src.add_argument("--profile", choices=("native", "nrel"), default="native",
                     help="built-in column mapping for --input (default: %(default)s)")
    src.add_argument("--isc", type=float, help="short-circuit current [A]")
    src.add_argument("--voc", type=float, help="open-circuit voltage [V]")
    src.add_argument("--imp", type=float, help="maximum-power current [A]")
    src.add_argument("--vmp", type=float, help="maximum-power voltage [V]")
    if uncertain or realization:
        for name, unit in (("isc", "A"), ("voc", "V"), ("imp", "A"), ("vmp", "V")):
            src.add_argument(f"--du-{name}", type=float, default=0.0,
                             help=f"absolute half-width of {name} [{unit}]")
    if realization:
        p.add_argument("--realization", choices=[r.value for r in Realization],
                       default="nominal", help="which realization to use")
    if uncertain:
        p.add_argument("--low", nargs=4, type=float, metavar=("ISC", "VOC", "IMP", "VMP"),
                       help="explicit low cardinal points (overrides nominal - du)")
        p.add_argument("--high", nargs=4, type=float, metavar=("ISC", "VOC", "IMP", "VMP"),
                       help="explicit high cardinal points (overrides nominal + du)")
        p.add_argument("--corners", action="store_true",
                       help="evaluate all 16 sign combinations of the half-widths")
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.add_argument("--format", "-f", choices=[f.value for f in OutputFormat],
                   default="csv", help="output format (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pvsdm1",
        description="One-parameter single-diode model: feasible domain, "
                    "parameter reconstruction and uncertainty intervals.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("domain", help="feasible-domain corner (a_max, r_s_min)")
    _add_common(p, realization=True)

    p = sub.add_parser("uncertainty", help="low/high domain interval")
    _add_common(p, uncertain=True)

    p = sub.add_parser("params", help="five SDM parameters at a given a")
    _add_common(p, realization=True)
    p.add_argument("--a", type=float, required=True, help="diode factor A [V]")

    p = sub.add_parser("curve", help="sampled I-V curve at a given a")
    _add_common(p, realization=True)
    p.add_argument("--a", type=float, required=True, help="diode factor A [V]")
    p.add_argument("--points", "-n", type=int, default=101,
                   help="number of samples (default: %(default)s)")

    p = sub.add_parser("plot-data", help="r_s_sh(a) and r_s_mp(a) traces")
    _add_common(p, realization=True)
    p.add_argument("--a-grid", type=parse_grid, required=True,
                   help="start:stop:count, inclusive, linear")

    p = sub.add_parser("stats", help="uncertainty summary statistics of a dataset")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--mapping", help="JSON column-mapping file")
    p.add_argument("--profile", choices=("native", "nrel"), default="native")
    p.add_argument("--output", "-o")
    p.add_argument("--format", "-f", choices=[f.value for f in OutputFormat], default="csv")
    return parser


# -- input helpers ----------------------------------------------------------

def _inline(args):
    return [getattr(args, k) for k in ("isc", "voc", "imp", "vmp")]


def _check_source(parser, args):
    inline = _inline(args)
    given = [v is not None for v in inline]
    if args.input and any(given):
        parser.error("use either --input or the cardinal flags, not both")
    if not args.input and not all(given):
        missing = [f"--{k}" for k, g in zip(("isc", "voc", "imp", "vmp"), given) if not g]
        parser.error(f"missing {', '.join(missing)} (or pass --input)")


def _mapping(args) -> ColumnMapping:
    if args.mapping:
        with open(args.mapping, encoding="utf-8") as fh:
            return ColumnMapping.from_json(fh.read())
    return NREL_MAPPING if args.profile == "nrel" else NATIVE_MAPPING


def _load_records(args):
    with open(args.input, encoding="utf-8", newline="") as fh:
        records, diagnostics = parse_records(fh, _mapping(args))
    for d in diagnostics:
        print(f"line {d.line}: {d.reason}", file=sys.stderr)
    return records, diagnostics


def _inline_uncertain(args) -> UncertainCardinalPoints:
    return UncertainCardinalPoints(
        CardinalPoints(*_inline(args)),
        args.du_isc, args.du_voc, args.du_imp, args.du_vmp)


def _sources(args):
    """Yield ``(prefix_fields, UncertainCardinalPoints)`` per input curve."""
    if args.input:
        records, _ = _load_records(args)
        for rec in records:
            yield record_fields(rec), rec
    else:
        yield {}, None


def _selected_cardinal(args, rec=None) -> CardinalPoints:
    if rec is not None:
        ucp = to_uncertain(rec)
    elif hasattr(args, "du_isc"):
        ucp = _inline_uncertain(args)
    else:
        return CardinalPoints(*_inline(args))
    return realize(ucp, Realization(getattr(args, "realization", "nominal")))


# -- row builders -----------------------------------------------------------

def _domain_columns(suffix=""):
    return [f"a_max{suffix}_v", f"r_s_min{suffix}_ohm", f"selected_rule{suffix}",
            f"converged{suffix}", f"f_sh_residual{suffix}", f"f_mp_residual{suffix}"]


def _domain_fields(d, suffix=""):
    values = (d.a_max, d.r_s_min, d.selected_rule.value, d.converged,
              d.f_sh_residual, d.f_mp_residual)
    return dict(zip(_domain_columns(suffix), values))


INTERVAL_COLUMNS = (["a_max_lo_v", "a_max_hi_v", "r_s_min_lo_ohm", "r_s_min_hi_ohm"]
                    + _domain_columns("_low") + _domain_columns("_high"))
CORNER_COLUMNS = ["signs"] + _domain_columns() + ["error"]


def _param_fields(p):
    return {"i_ph_a": p.i_ph, "i_o_a": p.i_o, "a_v": p.a,
            "g_sh_s": p.g_sh, "r_s_ohm": p.r_s}


def _per_curve(args, fn, empty):
    """Run ``fn`` per input curve; file mode reports failures in-band."""
    rows = []
    for prefix, rec in _sources(args):
        if rec is None:
            rows.extend(fn(None))
            continue
        try:
            out = fn(rec)
            rows.extend({**prefix, **r, "status": "ok"} for r in out)
        except INPUT_ERRORS + CONVERGENCE_ERRORS as exc:
            rows.append({**prefix, **empty, "status": f"error: {exc}"})
    return rows


def cmd_domain(args, cfg):
    def run(rec):
        return [_domain_fields(compute_domain(_selected_cardinal(args, rec), cfg))]
    return _per_curve(args, run, dict.fromkeys(_domain_columns()))


def _uncertainty_rows(ucp, args, cfg):
    if args.corners:
        rows = []
        for c in corner_domains(ucp, cfg):
            row = {"signs": "".join("+" if s > 0 else "-" for s in c.signs)}
            if c.domain is not None:
                row.update(_domain_fields(c.domain))
                row["error"] = None
            else:
                row.update(dict.fromkeys(_domain_columns()))
                row["error"] = c.error
            rows.append(row)
        return rows
    low = CardinalPoints(*args.low) if args.low else realize(ucp, Realization.LOW)
    high = CardinalPoints(*args.high) if args.high else realize(ucp, Realization.HIGH)
    iv = interval_from_realizations(low, high, cfg)
    return [{
        "a_max_lo_v": iv.a_max_interval[0],
        "a_max_hi_v": iv.a_max_interval[1],
        "r_s_min_lo_ohm": iv.r_s_min_interval[0],
        "r_s_min_hi_ohm": iv.r_s_min_interval[1],
        **_domain_fields(iv.low, "_low"),
        **_domain_fields(iv.high, "_high"),
    }]


def cmd_uncertainty(args, cfg):
    def run(rec):
        ucp = to_uncertain(rec) if rec is not None else _inline_uncertain(args)
        return _uncertainty_rows(ucp, args, cfg)
    columns = CORNER_COLUMNS if args.corners else INTERVAL_COLUMNS
    return _per_curve(args, run, dict.fromkeys(columns))


def cmd_params(args, cfg):
    def run(rec):
        return [_param_fields(reduced_solution(_selected_cardinal(args, rec), args.a, cfg))]
    return _per_curve(args, run, dict.fromkeys(("i_ph_a", "i_o_a", "a_v", "g_sh_s", "r_s_ohm")))


def cmd_curve(args, cfg):
    if args.points < 2:
        raise CliError("--points must be >= 2", EXIT_INPUT, "ValidationError")

    def run(rec):
        p = reduced_solution(_selected_cardinal(args, rec), args.a, cfg)
        return [{"v_pv_v": pt.v_pv, "i_pv_a": pt.i_pv}
                for pt in sample_curve(p, args.points, cfg)]
    return _per_curve(args, run, {"v_pv_v": None, "i_pv_a": None})


def cmd_plot_data(args, cfg):
    def run(rec):
        cp = _selected_cardinal(args, rec)
        return [{"a_v": a, "r_s_sh_ohm": sh, "r_s_mp_ohm": mp,
                 "in_branch": "both" if sh is not None and mp is not None
                 else "sh" if sh is not None else "mp" if mp is not None else "none"}
                for a, sh, mp in boundary_traces(cp, args.a_grid, cfg)]
    return _per_curve(args, run, dict.fromkeys(("a_v", "r_s_sh_ohm", "r_s_mp_ohm", "in_branch")))


def cmd_stats(args, cfg):
    records, diagnostics = _load_records(args)
    if not records:
        raise CliError(f"no valid records ({len(diagnostics)} diagnostics)",
                       EXIT_INPUT, "EmptyInput")
    stats = summarize_uncertainties(records)
    rows = []
    for name in STAT_VARIABLES:
        s = stats[name].rounded(1)
        rows.append({"variable": name, "min_pct": s.min, "mean_pct": s.mean,
                     "max_pct": s.max, "sd_pct": s.sd})
    print(f"{len(records)} records, {len(diagnostics)} diagnostics", file=sys.stderr)
    return rows


COMMANDS = {
    "domain": cmd_domain,
    "uncertainty": cmd_uncertainty,
    "params": cmd_params,
    "curve": cmd_curve,
    "plot-data": cmd_plot_data,
    "stats": cmd_stats,
}


def _report_error(exc: CliError, fmt: str):
    if fmt == "json":
        obj = {"error": exc.kind, "message": str(exc), "exit_code": exc.exit_code}
        if exc.detail:
            obj["detail"] = exc.detail
        print(json.dumps(obj, sort_keys=True), file=sys.stderr)
    else:
        print(f"pvsdm1: {exc.kind}: {exc}", file=sys.stderr)


def _classify(exc: Exception) -> CliError:
    kind = type(exc).__name__
    if isinstance(exc, NonPositiveParameters):
        return CliError(str(exc), EXIT_CONVERGENCE, kind,
                        {"values": exc.values, "offending": exc.offending})
    if isinstance(exc, CONVERGENCE_ERRORS):
        return CliError(str(exc), EXIT_CONVERGENCE, kind)
    if isinstance(exc, INPUT_ERRORS):
        return CliError(str(exc), EXIT_INPUT, kind)
    return CliError(f"internal error: {exc!r}", EXIT_INTERNAL, kind)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "stats":
        _check_source(parser, args)
    fmt = args.format
    try:
        cfg = root_config_from_env()
        rows = COMMANDS[args.command](args, cfg)
        with _open_sink(args.output) as sink:
            write_results(rows, fmt, sink)
    except CliError as exc:
        _report_error(exc, fmt)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001 - mapped onto exit codes
        err = _classify(exc)
        _report_error(err, fmt)
        return err.exit_code
    return EXIT_OK


@contextlib.contextmanager
def _open_sink(path):
    if not path:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


if __name__ == "__main__":
    sys.exit(main())
