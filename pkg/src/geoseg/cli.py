"""Command-line front end: one subcommand per library operation."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict

import numpy as np

from . import io
from .baseline import W_MIN, build_graph, dijkstra_boundary, shortest_path
from .denoise import TVParams, tv_denoise
from .eikonal import DistanceMap, solve_2d, solve_3d, speed_inverse
from .metrics import HD_MODES, evaluate
from .phantom import PhantomSpec, make_phantom
from .pipeline import PipelineParams, SegmentationError, segment_bscan, segment_volume
from .trace import TraceParams, backtrack, path_to_boundary
from .weights import Polarity, Strategy, WeightStrategy, exponential_weight

log = logging.getLogger("geoseg")

EXIT_USAGE = 1
EXIT_SEGMENTATION = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Shared flag groups
# ---------------------------------------------------------------------------

def _weight_flags(p):
    p.add_argument("--lambda", dest="lam", type=float, default=10.0, help="weight sharpness")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.ADDITIVE.value)


def _solver_flags(p):
    p.add_argument("--tol", type=float, default=1e-6, help="sweep convergence tolerance")
    p.add_argument("--max-cycles", type=int, default=None, help="sweep cycle cap")


def _trace_flags(p):
    p.add_argument("--tau", type=float, default=0.8, help="backtracking step")


def _pipeline_flags(p):
    _weight_flags(p)
    _solver_flags(p)
    _trace_flags(p)
    p.add_argument("--ws", type=int, default=100, help="adaptive threshold window")
    p.add_argument("--C", type=float, default=0.01, help="adaptive threshold offset")
    p.add_argument("--no-denoise", action="store_true", help="skip TV denoising")
    p.add_argument("--tv-mu", type=float, default=15.0)
    p.add_argument("--tv-iterations", type=int, default=30)


def _pipeline_params(args) -> PipelineParams:
    kw = dict(lam=args.lam, tau=args.tau, ws=args.ws, C=args.C, strategy=Strategy(args.strategy),
              tol=args.tol, denoise=not args.no_denoise, tv_mu=args.tv_mu,
              tv_iterations=args.tv_iterations)
    if args.max_cycles is not None:
        kw["max_cycles"] = args.max_cycles
    return PipelineParams(**kw)


def _polarity(text) -> Polarity:
    return {"db": Polarity.DARK_TO_BRIGHT, "bd": Polarity.BRIGHT_TO_DARK}[text]


def _params_echo(params) -> dict:
    return {k: (v.value if hasattr(v, "value") else v) for k, v in asdict(params).items()}


def _load_2d(path):
    img = io.read_image(path)
    if img.ndim != 2:
        raise UsageError(f"{path}: expected a 2D image, got shape {img.shape}")
    return np.asarray(img, dtype=np.float64)


def _check_unit_range(img, path):
    if img.min() < 0 or img.max() > 1:
        raise UsageError(f"{path}: intensities must lie in [0, 1]")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_phantom(args):
    kw = dict(rows=args.rows, cols=args.cols, slices=args.slices, dip=args.dip,
              sigma=args.sigma, seed=args.seed, bump=args.bump)
    if args.dip_slice_width is not None:
        kw["dip_slice_width"] = args.dip_slice_width
    spec = PhantomSpec(**kw)
    img, truth = make_phantom(spec)
    io.write_image(args.out, img)
    if args.truth:
        io.write_boundaries(args.truth, truth, image_id=str(args.out),
                            params={k: v for k, v in asdict(spec).items() if k != "extra"})
    return 0


def cmd_denoise(args):
    img = _load_2d(args.input)
    _check_unit_range(img, args.input)
    io.write_image(args.output, tv_denoise(img, TVParams(args.mu, args.iterations)))
    return 0


def cmd_weights(args):
    img = _load_2d(args.input)
    _check_unit_range(img, args.input)
    w = exponential_weight(img, _polarity(args.polarity), WeightStrategy(Strategy(args.strategy), args.lam))
    io.write_grid(args.output, w.weights)
    return 0


def cmd_distance(args):
    field = np.asarray(io.read_grid(args.input), dtype=np.float64)
    f = field if args.cost else speed_inverse(field)
    cycles = 20 if args.max_cycles is None else args.max_cycles
    if field.ndim == 2:
        src = tuple(args.source) if args.source else (field.shape[0] // 2, 0)
        dist = solve_2d(f, src, args.tol, cycles)
    else:
        src = tuple(args.source) if args.source else (0, field.shape[1] // 2, 0)
        dist = solve_3d(f, src, args.tol, cycles)
    io.write_grid(args.output, dist.d)
    print(json.dumps({"converged": dist.converged, "cycles": dist.cycles, "sweeps": dist.sweeps_used}))
    return 0 if dist.converged else EXIT_SEGMENTATION


def cmd_trace(args):
    d = np.asarray(io.read_grid(args.input), dtype=np.float64)
    if d.ndim != 2:
        raise UsageError("trace needs a 2D distance map")
    seed = tuple(args.source)
    if d[seed] != 0:
        raise UsageError(f"source {seed} is not the seed of this map (value {d[seed]})")
    dist = DistanceMap(d, (seed,), True, 0)
    path = backtrack(dist, tuple(args.target), seed, TraceParams(args.tau))
    out = {"reached_seed": bool(path.reached_seed), "steps": int(path.steps), "points": path.points.tolist()}
    if path.reached_seed:
        out["depths"] = path_to_boundary(path, d.shape[1]).depths.tolist()
    text = json.dumps(out)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if path.reached_seed else EXIT_SEGMENTATION


def cmd_segment(args):
    img = _load_2d(args.input)
    _check_unit_range(img, args.input)
    params = _pipeline_params(args)
    res = segment_bscan(img, params)
    io.write_boundaries(args.output, res.boundaries, image_id=str(args.input), params=_params_echo(params))
    if args.overlay:
        io.write_ppm(args.overlay, io.render_overlay(img, res))
    return 0


def cmd_segment3d(args):
    vol = np.asarray(io.read_image(args.input), dtype=np.float64)
    if vol.ndim == 2:
        vol = vol[None]
    _check_unit_range(vol, args.input)
    params = _pipeline_params(args)
    _, sheets = segment_volume(vol, params, mode=args.mode, threads=args.threads)
    io.write_boundaries(args.output, sheets, image_id=str(args.input),
                        params=dict(_params_echo(params), mode=args.mode))
    return 0


def cmd_baseline(args):
    img = _load_2d(args.input)
    _check_unit_range(img, args.input)
    curve = dijkstra_boundary(img, _polarity(args.polarity), args.wmin, id=args.id)
    io.write_boundaries(args.output, {args.id: curve}, image_id=str(args.input),
                        params={"method": "dijkstra", "wmin": args.wmin, "polarity": args.polarity})
    return 0


def cmd_eval(args):
    det = io.read_boundaries(args.detected)
    truth = io.read_boundaries(args.truth)
    rec = evaluate(det, truth, scale=args.scale_um, hd_mode=args.hd_mode, col_pitch=args.col_um)
    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["boundary", "se", "ae", "hd"])
        for row in rec.rows():
            w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
    finally:
        if args.output:
            fh.close()
    return 0


def cmd_overlay(args):
    img = _load_2d(args.input)
    boundaries = io.read_boundaries(args.boundaries) if args.boundaries else {}
    if any(np.ndim(v) != 1 for v in boundaries.values()):
        raise UsageError("overlay needs per-image (1D) boundaries")
    io.write_ppm(args.output, io.render_overlay(img, boundaries))
    return 0


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def bench_ratios(rows: int, cols: int, repeats: int = 5, baseline: bool = True) -> dict:
    """Median times of constant-speed solves at one area and double the area."""
    small = np.ones((rows, cols))
    large = np.ones((rows, 2 * cols))
    solve_2d(np.ones((8, 8)), (0, 0))  # compile
    out = {"rows": rows, "cols": cols, "repeats": repeats}
    out["gdm_small"] = _median_time(lambda: solve_2d(small, (rows // 2, 0)), repeats)
    out["gdm_large"] = _median_time(lambda: solve_2d(large, (rows // 2, 0)), repeats)
    out["gdm_ratio"] = out["gdm_large"] / out["gdm_small"]
    if baseline:
        g_small = np.full((rows, cols), 0.5)
        g_large = np.full((rows, 2 * cols), 0.5)
        out["dijkstra_small"] = _median_time(lambda: shortest_path(build_graph(g_small, W_MIN)), repeats)
        out["dijkstra_large"] = _median_time(lambda: shortest_path(build_graph(g_large, W_MIN)), repeats)
        out["dijkstra_ratio"] = out["dijkstra_large"] / out["dijkstra_small"]
    return out


def cmd_bench(args):
    res = bench_ratios(args.rows, args.cols, args.repeats, not args.no_baseline)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["method", "small_s", "large_s", "ratio"])
    w.writerow(["gdm", f"{res['gdm_small']:.6f}", f"{res['gdm_large']:.6f}", f"{res['gdm_ratio']:.3f}"])
    if "dijkstra_ratio" in res:
        w.writerow(["dijkstra", f"{res['dijkstra_small']:.6f}", f"{res['dijkstra_large']:.6f}",
                    f"{res['dijkstra_ratio']:.3f}"])
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geoseg", description="Geodesic-distance layer segmentation toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("phantom", help="render a synthetic layered phantom")
    p.add_argument("--rows", type=int, default=256)
    p.add_argument("--cols", type=int, default=512)
    p.add_argument("--slices", type=int, default=1)
    p.add_argument("--dip", type=float, default=25.0, help="foveal dip amplitude (px)")
    p.add_argument("--dip-slice-width", type=float, default=None)
    p.add_argument("--bump", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.0, help="Gaussian noise level")
    p.add_argument("--seed", type=int, default=0, help="noise RNG seed")
    p.add_argument("--out", required=True, help=".pgm or grid file")
    p.add_argument("--truth", help="ground-truth boundary JSON")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("denoise", help="anisotropic TV denoising")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--mu", type=float, default=15.0)
    p.add_argument("--iterations", type=int, default=30)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("weights", help="write a polarity weight field")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--polarity", choices=["db", "bd"], default="db")
    _weight_flags(p)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("distance", help="solve the Eikonal equation on a weight grid")
    p.add_argument("input", help="grid of weights W (or costs with --cost)")
    p.add_argument("output")
    p.add_argument("--source", type=int, nargs="+", help="seed cell (row col, or slice row col)")
    p.add_argument("--cost", action="store_true", help="input already holds the cost 1/W")
    _solver_flags(p)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("trace", help="backtrack a minimal path on a distance map")
    p.add_argument("input")
    p.add_argument("--source", type=int, nargs=2, required=True, help="seed of the map")
    p.add_argument("--target", type=float, nargs=2, required=True, help="path start")
    p.add_argument("--output")
    _trace_flags(p)
    p.set_defaults(func=cmd_trace)

    for name, func, helptext in (("segment", cmd_segment, "nine boundaries on one B-scan"),
                                 ("segment3d", cmd_segment3d, "nine surfaces on a volume")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input")
        p.add_argument("output", help="boundary JSON")
        _pipeline_flags(p)
        if name == "segment":
            p.add_argument("--overlay", help="also write a PPM overlay")
        else:
            p.add_argument("--mode", choices=["2d", "3d"], default="2d")
            p.add_argument("--threads", type=int, default=1)
        p.set_defaults(func=func)

    p = sub.add_parser("baseline", help="graph-search boundary (Dijkstra)")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--polarity", choices=["db", "bd"], default="db")
    p.add_argument("--wmin", type=float, default=W_MIN)
    p.add_argument("--id", default="B1", help="boundary id written to the output")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="SE/AE/HD against ground truth as CSV")
    p.add_argument("detected")
    p.add_argument("truth")
    p.add_argument("--scale-um", type=float, default=1.0, help="micrometres per row")
    p.add_argument("--col-um", type=float, default=None, help="micrometres per column (axis mode)")
    p.add_argument("--hd-mode", choices=HD_MODES, default="pixel")
    p.add_argument("--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("overlay", help="draw boundaries over an image (PPM)")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--boundaries")
    p.set_defaults(func=cmd_overlay)

    p = sub.add_parser("bench", help="time constant-speed solves at doubled grid area")
    p.add_argument("--rows", type=int, default=256)
    p.add_argument("--cols", type=int, default=256)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--no-baseline", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SegmentationError as err:
        print(f"segmentation failed at {err}", file=sys.stderr)
        return EXIT_SEGMENTATION
    except (UsageError, io.FormatError, FileNotFoundError, ValueError) as err:
        print(f"geoseg: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
