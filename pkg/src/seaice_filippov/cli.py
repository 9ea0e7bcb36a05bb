"""Command-line front end.

Every command resolves a full parameter set from ``--config`` (JSON) plus
inline overrides, runs one computation and writes CSV or JSON.  With
``--out DIR`` the results go to ``DIR/<command>.csv`` (or ``.json``);
otherwise to standard output.  Files start with ``#`` comment lines holding
the resolved parameters, so every output can be reproduced from itself.

Exit status: 0 on success, 2 for invalid usage or configuration, 1 when a
computation fails (the structured diagnostic is printed to stderr as JSON).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import bifurcation as bif
from . import branches as br
from .exceptions import ModelError, ParameterError
from .forcing import PARAM_KEYS, ForcingParams
from .param_map import StandardTarget, inverse_branches
from .sliding import detect_attracting, find_boundary_times
from .smoothed import poincare_fixed_points

WIDTH_DEFAULTS = {
    "dpsi": (-0.21, 0.0, 0.30, 0.51),
    "ftp": (1.45, 2.00, 2.64, 4.00),
    "ftm": (0.80, 1.41, 2.00, 2.50),
}


class UsageError(Exception):
    pass


# --- formatting ------------------------------------------------------------

def fmt(x: Any) -> str:
    """CSV cell: 17 significant digits for floats, 1/0 for booleans."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return "nan"
    return str(x)


def _jsonable(obj: Any) -> Any:
    """Replace non-finite floats with strings so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2)


def _header(command: str, params: ForcingParams, extra: dict | None = None) -> list[str]:
    lines = [f"# command: {command}", "# params: " + json.dumps(params.to_dict())]
    for key, val in (extra or {}).items():
        lines.append(f"# {key}: " + json.dumps(_jsonable(val)))
    return lines


def csv_text(command: str, params: ForcingParams, columns: Sequence[str], rows, extra: dict | None = None) -> str:
    buf = io.StringIO()
    for line in _header(command, params, extra):
        buf.write(line + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


# --- gnuplot ---------------------------------------------------------------

def _gnuplot(command: str, csv_name: str, columns: Sequence[str]) -> str:
    head = [
        f"# gnuplot script for {csv_name}",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key outside",
    ]
    col = {name: i + 1 for i, name in enumerate(columns)}
    if command == "diagram":
        body = [
            "set xlabel 'L_m'", "set ylabel 'min E'", "set xrange [*:*] reverse",
            f"plot '{csv_name}' every ::1 using {col['l_m']}:(strcol({col['stable']}) eq '1' ? ${col['min_e']} : NaN) "
            "with points pt 7 ps 0.3 title 'stable', \\",
            f"     '' every ::1 using {col['l_m']}:(strcol({col['stable']}) eq '0' ? ${col['min_e']} : NaN) "
            "with points pt 6 ps 0.3 title 'unstable', \\",
            f"     '' every ::1 using {col['l_m']}:(strcol({col['branch_kind']}) eq 'bifurcation' ? ${col['min_e']} : NaN) "
            "with points pt 5 ps 0.8 title 'events'",
        ]
    elif command == "trajectory":
        body = ["set xlabel 'tau'", "set ylabel 'E'",
                f"plot '{csv_name}' every ::1 using 1:2 with lines title 'E(tau)'"]
    elif command == "poincare":
        body = ["set xlabel 'E_0'", "set ylabel 'G = E_0 - P(E_0)'", "set grid",
                f"plot '{csv_name}' every ::1 using 1:3 with lines title 'G'"]
    elif command == "bifset":
        body = ["set xlabel 'secondary parameter'", "set ylabel 'L_m'",
                f"plot '{csv_name}' every ::1 using 1:2 with lines title 'l_o', \\",
                "     '' every ::1 using 1:3 with lines title 'l_i', \\",
                "     '' every ::1 using 1:4 with lines title 'l_sn1', \\",
                "     '' every ::1 using 1:5 with lines title 'l_sn2'"]
    elif command == "widths":
        body = ["set xlabel 'varied value'", "set ylabel 'sliding width'",
                f"plot '{csv_name}' every ::1 using {col['value']}:{col['width_s1']} with linespoints title '|S1|', \\",
                f"     '' every ::1 using {col['value']}:{col['width_s2']} with linespoints dt 2 title '|S2|'"]
    elif command == "jump-grid":
        body = ["set xlabel 'delta psi'", "set ylabel 'delta alpha'", "set view map",
                f"splot '{csv_name}' every ::1 using 1:2:4 with points pt 5 palette title 'Delta(min E)'"]
    else:
        body = [f"plot '{csv_name}' every ::1 using 1:2 with linespoints"]
    return "\n".join(head + body) + "\n"


# --- parsing helpers -------------------------------------------------------

def parse_range(text: str) -> np.ndarray:
    """``a:b:n`` -> ``linspace(a, b, n)``; a comma list is taken literally."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            count = int(n)
            if count < 1:
                raise UsageError(f"range {text!r} needs a positive point count")
            return np.linspace(float(a), float(b), count)
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse range {text!r}: expected a:b:n or a comma list") from exc
    if not values:
        raise UsageError(f"range {text!r} is empty")
    return np.array(values)


def load_params(args: argparse.Namespace) -> ForcingParams:
    data: dict[str, Any] = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object")
        raw = raw.get("params", raw)
        data.update(raw)
    if args.lm is not None:
        data["l_m"] = args.lm
    if args.delta_e is not None:
        data["delta_e"] = args.delta_e
    for item in args.set or []:
        key, _, val = item.partition("=")
        if key not in PARAM_KEYS:
            raise UsageError(f"unknown parameter {key!r} in --set (known: {', '.join(PARAM_KEYS)})")
        try:
            data[key] = float(val)
        except ValueError as exc:
            raise UsageError(f"--set {key} needs a number, got {val!r}") from exc
    try:
        return ForcingParams.from_dict(data)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


def require_lm(p: ForcingParams, command: str) -> None:
    if p.l_m is None:
        raise UsageError(f"missing required key 'l_m' for '{command}' (use --lm or set it in --config)")


def require_delta_e(p: ForcingParams, command: str) -> None:
    if not p.delta_e > 0.0:
        raise UsageError(f"'{command}' needs key 'delta_e' > 0 (use --delta-e)")


class Output:
    """Collects artifacts and writes them once at the end."""

    def __init__(self, args: argparse.Namespace):
        self.out = Path(args.out) if args.out else None
        self.plot = args.plot
        self.files: list[tuple[str, str]] = []
        if self.plot and self.out is None:
            raise UsageError("--plot needs --out DIR")

    def add(self, name: str, text: str) -> None:
        self.files.append((name, text))

    def flush(self) -> None:
        if self.out is None:
            for _, text in self.files:
                sys.stdout.write(text)
            return
        try:
            self.out.mkdir(parents=True, exist_ok=True)
            for name, text in self.files:
                (self.out / name).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write to {self.out}: {exc}") from exc


# --- commands --------------------------------------------------------------

def cmd_sliding(args, p: ForcingParams, out: Output) -> None:
    require_lm(p, "sliding")
    si = find_boundary_times(p)
    flag, witness = detect_attracting(p)
    out.add("sliding.json", dumps({"params": p.to_dict(), **si.to_dict(),
                                   "attracting": flag, "attracting_witness": witness}) + "\n")


def cmd_branches(args, p: ForcingParams, out: Output) -> None:
    require_lm(p, "branches")
    bps = br.all_branches(p, n_grid=args.n_grid)
    out.add("branches.json", dumps({"params": p.to_dict(), "branches": [bp.to_dict() for bp in bps]}) + "\n")


def cmd_trajectory(args, p: ForcingParams, out: Output) -> None:
    require_lm(p, "trajectory")
    cands = [bp for bp in br.all_branches(p) if bp.kind == args.kind]
    if not cands:
        raise ModelError(f"no {args.kind} periodic solution at l_m = {p.lm}", kind=args.kind, l_m=p.lm)
    if args.index >= len(cands):
        raise UsageError(f"--index {args.index} out of range: {len(cands)} {args.kind} solution(s)")
    bp = cands[args.index]
    traj = br.reconstruct_trajectory(bp, p, n_samples=args.samples)
    extra = {"branch": bp.to_dict(), "events": traj.events}
    out.add("trajectory.csv", csv_text("trajectory", p, ("tau", "e"), zip(traj.tau, traj.e), extra))
    if out.plot:
        out.add("trajectory.gp", _gnuplot("trajectory", "trajectory.csv", ("tau", "e")))


def cmd_poincare(args, p: ForcingParams, out: Output) -> None:
    require_lm(p, "poincare")
    require_delta_e(p, "poincare")
    scan = poincare_fixed_points(p, t0=args.t0, e_range=(args.emin, args.emax), n_grid=args.n)
    fps = [fp.to_dict() for fp in scan.fixed_points]
    extra = {"t0": args.t0, "fixed_points": fps}
    if scan.warnings:
        extra["warnings"] = scan.warnings
    rows = zip(scan.e_grid, scan.e_mapped, scan.g)
    out.add("poincare.csv", csv_text("poincare", p, ("e0", "image", "G"), rows, extra))
    if out.out is not None:
        out.add("poincare_fixed_points.json", dumps({"params": p.to_dict(), "t0": args.t0, "fixed_points": fps}) + "\n")
    if out.plot:
        out.add("poincare.gp", _gnuplot("poincare", "poincare.csv", ("e0", "image", "G")))


def cmd_diagram(args, p: ForcingParams, out: Output) -> None:
    base = p.replace(l_m=None)
    grid = np.linspace(args.lmin, args.lmax, args.n)
    if p.delta_e > 0.0:
        dg = bif.smoothed_diagram(base, grid)
        extra = {"delta_e": p.delta_e, "saddle_node_pairs": dg.saddle_node_pairs}
    else:
        dg = bif.branch_diagram(base, grid, refine=not args.no_refine,
                                exclude_attracting=not args.include_attracting)
        extra = {"delta_e": 0.0, "points": dg.points.to_dict() if dg.points else None,
                 "n_gaps": dg.n_gaps, "excluded": dg.excluded, "annotations": dg.annotations}
    rows = [(r.l_m, r.branch_kind, r.branch_id, r.min_e, r.floquet, r.stable) for r in dg.rows + dg.events]
    out.add("diagram.csv", csv_text("diagram", base, bif.DIAGRAM_COLUMNS, rows, extra))
    if out.plot:
        out.add("diagram.gp", _gnuplot("diagram", "diagram.csv", bif.DIAGRAM_COLUMNS))


def cmd_bifset(args, p: ForcingParams, out: Output) -> None:
    values = parse_range(args.values) if args.values else (
        np.linspace(0.05, 0.6, 12) if args.vary == "delta_alpha" else np.linspace(-0.5, 0.5, 21))
    l_range = (args.lmin, args.lmax) if args.lmin is not None and args.lmax is not None else None
    bs = bif.bifurcation_set(args.vary, values, p.replace(l_m=None), l_range)
    rows = [tuple(getattr(r, c) for c in bif.BIFSET_COLUMNS) for r in bs.rows]
    out.add("bifset.csv", csv_text("bifset", bs.base, bif.BIFSET_COLUMNS, rows, {"secondary": args.vary}))
    if out.plot:
        out.add("bifset.gp", _gnuplot("bifset", "bifset.csv", bif.BIFSET_COLUMNS))


WIDTH_COLUMNS = ("varied", "value", "gap_s1_lo", "gap_s1_hi", "gap_s2_lo", "gap_s2_hi", "width_s1", "width_s2",
                 "note")


def cmd_widths(args, p: ForcingParams, out: Output) -> None:
    values = parse_range(args.values) if args.values else np.array(WIDTH_DEFAULTS[args.vary])
    res = bif.sliding_width_sweep(args.vary, values)
    rows = []
    for r in res:
        g1 = r.gap_s1 or (math.nan, math.nan)
        g2 = r.gap_s2 or (math.nan, math.nan)
        rows.append((r.varied, r.value, g1[0], g1[1], g2[0], g2[1], r.width_s1, r.width_s2, r.note or "-"))
    extra = {"mapped_params": [None if r.params is None else r.params.to_dict() for r in res]}
    out.add("widths.csv", csv_text("widths", p.replace(l_m=None), WIDTH_COLUMNS, rows, extra))
    if out.plot:
        out.add("widths.gp", _gnuplot("widths", "widths.csv", WIDTH_COLUMNS))


JUMP_COLUMNS = ("delta_psi", "delta_alpha", "l_i", "delta_min_e", "outcome", "landing_min_e", "covered_min_e")


def cmd_jump_grid(args, p: ForcingParams, out: Output) -> None:
    dpsi = parse_range(args.dpsi)
    dalpha = parse_range(args.dalpha)
    base = p.replace(l_m=None)
    grid = bif.jump_grid(dpsi, dalpha, base, exclude_attracting=not args.include_attracting)
    rows = []
    for da, row in zip(dalpha, grid):
        for dp, jr in zip(dpsi, row):
            rows.append((dp, da, jr.l_i, jr.delta_min_e, jr.outcome, jr.landing_min_e, jr.covered_min_e))
    out.add("jump-grid.csv", csv_text("jump-grid", base, JUMP_COLUMNS, rows))
    if out.plot:
        out.add("jump-grid.gp", _gnuplot("jump-grid", "jump-grid.csv", JUMP_COLUMNS))


def cmd_map_params(args, p: ForcingParams, out: Output) -> None:
    try:
        raw = json.loads(Path(args.target).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read target {args.target}: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("target must be a JSON object")
    try:
        target = StandardTarget.from_dict(raw)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    branches = inverse_branches(target, b=p.b, zeta=p.zeta, delta_e=p.delta_e)
    chosen = branches[0] if args.root == "smaller" else branches[-1]
    doc = {"target": target.to_dict(), "root_choice": args.root,
           "params": None if chosen.error else chosen.params.to_dict(),
           "branches": [b.to_dict() for b in branches]}
    if chosen.error is not None:
        chosen.error.diagnostics["branches"] = doc["branches"]
        raise chosen.error
    out.add("map-params.json", dumps(doc) + "\n")


COMMANDS = {
    "sliding": cmd_sliding,
    "branches": cmd_branches,
    "trajectory": cmd_trajectory,
    "poincare": cmd_poincare,
    "diagram": cmd_diagram,
    "bifset": cmd_bifset,
    "widths": cmd_widths,
    "jump-grid": cmd_jump_grid,
    "map-params": cmd_map_params,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with parameters (flat or under 'params')")
    common.add_argument("--lm", type=float, help="annual-mean longwave parameter l_m")
    common.add_argument("--delta-e", type=float, help="albedo smoothing width; 0 selects the Filippov system")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any parameter")
    common.add_argument("--out", help="output directory (default: standard output)")
    common.add_argument("--plot", action="store_true", help="also write a gnuplot script next to the CSV")

    parser = _Parser(prog="seaice-filippov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sub.add_parser("sliding", parents=[common], help="boundary times and sliding classification")
    s = sub.add_parser("branches", parents=[common], help="all periodic solutions at one l_m")
    s.add_argument("--n-grid", type=int, default=2000)

    s = sub.add_parser("trajectory", parents=[common], help="one period of a periodic solution")
    s.add_argument("--kind", required=True, choices=(br.ICE_FREE, br.ICE_COVERED, br.SEASONAL))
    s.add_argument("--samples", type=int, default=1001)
    s.add_argument("--index", type=int, default=0, help="which solution when several share the kind")

    s = sub.add_parser("poincare", parents=[common], help="one-year map of the smoothed system")
    s.add_argument("--t0", type=float, default=0.0)
    s.add_argument("--emin", type=float, default=-3.0)
    s.add_argument("--emax", type=float, default=2.0)
    s.add_argument("--n", type=int, default=512)

    s = sub.add_parser("diagram", parents=[common], help="bifurcation diagram in l_m")
    s.add_argument("--lmin", type=float, default=bif.L_RANGE[0])
    s.add_argument("--lmax", type=float, default=bif.L_RANGE[1])
    s.add_argument("--n", type=int, default=bif.N_SWEEP)
    s.add_argument("--no-refine", action="store_true", help="skip grid refinement around events")
    s.add_argument("--include-attracting", action="store_true",
                   help="keep grid points with attracting sliding intervals (annotated)")

    s = sub.add_parser("bifset", parents=[common], help="bifurcation points against a secondary parameter")
    s.add_argument("--vary", required=True, choices=("delta_alpha", "phi"))
    s.add_argument("--values", help="a:b:n or comma list")
    s.add_argument("--lmin", type=float)
    s.add_argument("--lmax", type=float)

    s = sub.add_parser("widths", parents=[common], help="sliding widths at diagram-gap medians")
    s.add_argument("--vary", required=True, choices=tuple(WIDTH_DEFAULTS))
    s.add_argument("--values", help="a:b:n or comma list")

    s = sub.add_parser("jump-grid", parents=[common], help="Delta(min E) over a (delta_psi, delta_alpha) grid")
    s.add_argument("--dpsi", required=True, help="a:b:n or comma list")
    s.add_argument("--dalpha", required=True, help="a:b:n or comma list")
    s.add_argument("--include-attracting", action="store_true")

    s = sub.add_parser("map-params", parents=[common], help="standard-form target JSON to physical parameters")
    s.add_argument("target", help="JSON with f_bar_plus, f_bar_minus, f_tilde_plus, f_tilde_minus, delta_psi")
    s.add_argument("--root", choices=("smaller", "larger"), default="smaller")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        p = load_params(args)
        out = Output(args)
        COMMANDS[args.command](args, p, out)
        out.flush()
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except ModelError as exc:
        sys.stderr.write(dumps(exc.to_dict()) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
