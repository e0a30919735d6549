"""``catlink`` command line: outcome maps, success rates, sweeps, verification.

Every command writes a CSV (12 significant digits) and a JSON manifest next
to it recording the resolved configuration, version, wall time and the
sha256 of each output.

Exit codes: 0 ok, 2 usage, 3 numerical contract (GridTooCoarse, ZeroDensity,
TruncationError), 4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    REFINE_TOL,
    ProtocolConfig,
    heatmap,
    optimize_alpha,
    outcome_map,
    parse_range,
    success_curve,
)
from .errors import GridTooCoarse, TruncationError, ZeroDensity
from .measurement import JointOutcome, joint_outcomes
from .verify import run_lattice

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_ORACLE = 0, 2, 3, 4
FLOAT_FMT = "%.12g"


class UsageError(Exception):
    pass


def _range_arg(text: str) -> np.ndarray:
    try:
        return parse_range(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _alpha_range_arg(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    return lo, hi


def _common(p: argparse.ArgumentParser, alpha_required: bool = False):
    p.add_argument("--encoding", choices=["mod2", "mod4", "mod4p"], default="mod2")
    p.add_argument("--alpha", type=float, required=alpha_required)
    p.add_argument("--eta", type=float, help="sets eta1 = eta2")
    p.add_argument("--eta1", type=float)
    p.add_argument("--eta2", type=float)
    p.add_argument("--cutoff", type=float, default=0.9)
    p.add_argument("--grid-l", type=float, default=None)
    p.add_argument("--grid-n", type=int, default=401)
    p.add_argument("--out", type=Path, default=None, help="output CSV path")
    p.add_argument("--seedless", action="store_true",
                   help="accepted for reproducibility scripts; every command is deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catlink", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"catlink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="density and Bell fidelities over (q_a, q_b)")
    _common(p, alpha_required=True)
    p.add_argument("--outcome", default=None, help='e.g. "p=+1", "lambda=1", "pa=+1,pb=-1,lambda=2"')

    p = sub.add_parser("success", help="total success probability")
    _common(p, alpha_required=True)
    p.add_argument("--cutoff-grid", type=_range_arg, default=None)
    p.add_argument("--no-check", action="store_true", help="skip the grid refinement check")

    p = sub.add_parser("optimize", help="alpha maximizing the success probability")
    _common(p)
    p.add_argument("--alpha-range", type=_alpha_range_arg, default=(0.0, 3.0))
    p.add_argument("--alpha-step", type=float, default=0.05)
    p.add_argument("--no-check", action="store_true")

    p = sub.add_parser("heatmap", help="optimized success over (eta, cutoff)")
    _common(p)
    p.add_argument("--eta-grid", type=_range_arg, default=parse_range("0.5:1.0:0.05"))
    p.add_argument("--cutoff-grid", type=_range_arg, default=parse_range("0.5:1.0:0.025"))
    p.add_argument("--alpha-range", type=_alpha_range_arg, default=(0.0, 3.0))
    p.add_argument("--alpha-step", type=float, default=0.05)

    p = sub.add_parser("verify", help="closed-form engine against the Fock oracle")
    _common(p)
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--alpha-grid", type=float, nargs="+", default=None)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--no-parities", action="store_true")
    p.set_defaults(encoding=None)
    return parser


def _etas(args) -> tuple[float, float]:
    if args.eta is not None and (args.eta1 is not None or args.eta2 is not None):
        raise UsageError("--eta cannot be combined with --eta1/--eta2")
    if args.eta is not None:
        return args.eta, args.eta
    return (1.0 if args.eta1 is None else args.eta1, 1.0 if args.eta2 is None else args.eta2)


def _config(args, alpha=None) -> ProtocolConfig:
    eta1, eta2 = _etas(args)
    try:
        return ProtocolConfig(args.encoding, args.alpha if alpha is None else alpha, eta1, eta2,
                              grid_l=args.grid_l, n_pts=args.grid_n, cutoff=args.cutoff)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.asarray(rows, dtype=float).reshape(-1, len(header)), fmt=FLOAT_FMT,
               delimiter=",", header=",".join(header), comments="")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(csv_path: Path, command: str, config: dict, wall: float,
                   extra: dict | None = None) -> Path:
    """JSON sidecar ``<csv stem>.json`` describing one run."""
    manifest = {
        "command": command,
        "config": config,
        "version": __version__,
        "wall_time_s": round(wall, 6),
        "outputs": [{"path": str(csv_path), "sha256": _sha256(csv_path)}],
    }
    if extra:
        manifest.update(extra)
    out = csv_path.with_suffix(".json")
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def cmd_map(args) -> int:
    cfg = _config(args)
    if args.outcome is None:
        outcome = joint_outcomes(cfg.encoding)[0]
    else:
        try:
            outcome = JointOutcome.parse(args.outcome)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if (outcome.kind == "mod2") != (cfg.encoding == "mod2"):
        raise UsageError(f"outcome {outcome.label} does not belong to {cfg.encoding}")
    grid = outcome_map(cfg, outcome)
    out = args.out or Path("map.csv")
    _write_csv(out, ["q_a", "q_b", "density", "F_phi_plus", "F_phi_minus",
                     "F_psi_plus", "F_psi_minus"], grid.rows())
    conf = dict(cfg.as_dict(), outcome=outcome.label)
    write_manifest(out, "map", conf, time.perf_counter() - args._t0,
                   {"outcome_probability": grid.probability})
    print(f"{outcome.label}: probability {grid.probability:.12g}, peak at {grid.peak()}")
    return EXIT_OK


def cmd_success(args) -> int:
    cfg = _config(args)
    cutoffs = np.array([cfg.cutoff]) if args.cutoff_grid is None else args.cutoff_grid
    values = success_curve(cfg, cutoffs)
    if not args.no_check:
        fine = success_curve(cfg.refined(), cutoffs)
        shift = float(np.max(np.abs(fine - values)))
        if shift > REFINE_TOL:
            raise GridTooCoarse(f"refinement moved P_total by {shift:.3g}")
        values = fine
    out = args.out or Path("success.csv")
    _write_csv(out, ["cutoff", "p_total"], np.column_stack([cutoffs, values]))
    write_manifest(out, "success", cfg.as_dict(), time.perf_counter() - args._t0)
    for fc, v in zip(cutoffs, values):
        print(f"F_c={fc:.6g}  P_total={v:.12g}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    eta1, eta2 = _etas(args)
    _config(args, alpha=1.0)  # validates the shared flags
    res = optimize_alpha(args.encoding, eta1, eta2, args.cutoff, alpha_range=args.alpha_range,
                         step=args.alpha_step, n_pts=args.grid_n, check=not args.no_check)
    out = args.out or Path("optimize.csv")
    _write_csv(out, ["alpha", "p_total"], np.column_stack([res.scan_alphas, res.scan_values]))
    conf = {"encoding": args.encoding, "eta1": eta1, "eta2": eta2, "cutoff": args.cutoff,
            "alpha_range": list(args.alpha_range), "alpha_step": args.alpha_step,
            "n_pts": args.grid_n}
    write_manifest(out, "optimize", conf, time.perf_counter() - args._t0,
                   {"alpha_star": res.alpha_star, "p_star": res.p_star})
    print(f"alpha*={res.alpha_star:.6g}  P*={res.p_star:.12g}")
    return EXIT_OK


def cmd_heatmap(args) -> int:
    _config(args, alpha=1.0)
    hm = heatmap(args.encoding, args.eta_grid, args.cutoff_grid, alpha_range=args.alpha_range,
                 step=args.alpha_step, n_pts=args.grid_n,
                 progress=lambda eta: print(f"eta={eta:.6g} done", file=sys.stderr))
    ee, cc = np.meshgrid(hm.etas, hm.cutoffs, indexing="ij")
    rows = np.column_stack([ee.ravel(), cc.ravel(), hm.p_star.ravel(), hm.log10.ravel(),
                            hm.alpha_star.ravel()])
    out = args.out or Path("heatmap.csv")
    _write_csv(out, ["eta", "cutoff", "p_star", "log10_p_star", "alpha_star"], rows)
    conf = {"encoding": args.encoding, "eta_grid": hm.etas.tolist(),
            "cutoff_grid": hm.cutoffs.tolist(), "alpha_range": list(args.alpha_range),
            "alpha_step": args.alpha_step, "n_pts": args.grid_n}
    write_manifest(out, "heatmap", conf, time.perf_counter() - args._t0)
    print(f"wrote {out} ({rows.shape[0]} lattice points)")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.alpha_grid is not None:
        alphas = tuple(args.alpha_grid)
    elif args.alpha is not None:
        alphas = (args.alpha,)
    else:
        alphas = (0.5, 1.0, 1.5)
    if args.encoding is None:
        encodings = ("mod2", "mod4")
    else:
        encodings = ("mod2",) if args.encoding == "mod2" else ("mod4",)

    def show(c):
        flag = "ok" if c.passed else "FAIL"
        print(f"{flag:4s} {c.encoding} alpha={c.alpha:g} eta1={c.eta1:g} eta2={c.eta2:g} "
              f"nmax={c.nmax} dP={c.max_prob_delta:.2e} dens={c.max_density_delta:.2e} "
              f"TD={c.max_trace_distance:.2e} pairTD={c.pair_trace_distance:.2e}")

    report = run_lattice(alphas=alphas, encodings=encodings, n_points=args.points,
                         with_parities=not args.no_parities, nmax=args.nmax, progress=show)
    rows = [[c.alpha, c.eta1, c.eta2, 0 if c.encoding == "mod2" else 1, c.nmax,
             c.max_prob_delta, c.max_density_delta, c.max_trace_distance,
             c.pair_trace_distance, int(c.passed)] for c in report.cases]
    out = args.out or Path("verify.csv")
    _write_csv(out, ["alpha", "eta1", "eta2", "mod4", "nmax", "max_prob_delta",
                     "max_density_delta", "max_trace_distance", "pair_trace_distance",
                     "passed"], rows)
    conf = {"alphas": list(alphas), "encodings": list(encodings), "nmax": args.nmax,
            "points": args.points, "parities": not args.no_parities}
    write_manifest(out, "verify", conf, time.perf_counter() - args._t0,
                   {"passed": report.passed})
    print(f"worst: dP={report.worst('max_prob_delta'):.3e} "
          f"dens={report.worst('max_density_delta'):.3e} "
          f"TD={report.worst('max_trace_distance'):.3e} "
          f"pairTD={report.worst('pair_trace_distance'):.3e}  ({report.wall_time:.1f} s)")
    return EXIT_OK if report.passed else EXIT_ORACLE


COMMANDS = {"map": cmd_map, "success": cmd_success, "optimize": cmd_optimize,
            "heatmap": cmd_heatmap, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._t0 = time.perf_counter()
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"catlink: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GridTooCoarse, ZeroDensity, TruncationError) as exc:
        print(f"catlink: numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
