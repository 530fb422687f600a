"""Command-line entry point: ``edgesplat <command> ...``.

Exit status is 0 on success, 1 when an operation fails and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .camera import normalize_cloud, project
from .config import RunConfig, load_config
from .errors import CloudParseError
from .fit import fit
from .gradcheck import format_report, run_gradcheck
from .metrics import eval_metrics
from .splat import splat
from .sweep import sigma_sweep
from .visual import sobel_edges, visual_maps


def _load_config(args):
    return load_config(args.config) if getattr(args, "config", None) else RunConfig()


def _add_view_args(p):
    p.add_argument("--azimuth", type=float, default=0.0, help="camera azimuth in degrees")
    p.add_argument("--elevation", type=float, default=0.0, help="camera elevation in degrees")
    p.add_argument("--config", help="run configuration file (key = value)")
    p.add_argument("--unit-cube", action="store_true",
                   help="normalize the cloud to the unit cube before rendering")


def _read_render_cloud(args):
    cloud = io.read_cloud(args.cloud)
    return normalize_cloud(cloud) if args.unit_cube else cloud


def cmd_project(args, out):
    cfg = _load_config(args)
    cloud = _read_render_cloud(args)
    img = splat(project(cloud, cfg.view(args.azimuth, args.elevation), cfg.intrinsics), cfg.splat)
    io.write_image(img, args.out, normalize=args.normalize)
    if args.raw:
        io.write_grid_text(img, args.raw)
    out.write(f"wrote {args.out} ({img.shape[0]}x{img.shape[1]}, max {img.max():.6g})\n")


def cmd_maps(args, out):
    cfg = _load_config(args)
    cloud = _read_render_cloud(args)
    coords = project(cloud, cfg.view(args.azimuth, args.elevation), cfg.intrinsics)
    maps = visual_maps(splat(coords, cfg.splat), cfg.visual)
    io.write_image(maps.edge, args.edge_out, normalize=args.normalize)
    io.write_image(maps.corner, args.corner_out, normalize=args.normalize)
    if args.raw:
        io.write_grid_text(maps.edge, f"{args.raw}.edge.txt")
        io.write_grid_text(maps.corner, f"{args.raw}.corner.txt")
    out.write(f"wrote {args.edge_out} and {args.corner_out}\n")


def cmd_sobel(args, out):
    edges = sobel_edges(io.read_image(args.image), args.threshold)
    io.write_image(edges, args.out, normalize=args.normalize)
    if args.raw:
        io.write_grid_text(edges, args.raw)
    out.write(f"wrote {args.out}\n")


def _pick(flag, fallback, what):
    value = flag or fallback
    if not value:
        raise ValueError(f"no {what} given (flag or config)")
    return value


def cmd_fit(args, out):
    cfg = _load_config(args)
    overrides = {
        "learning_rate": args.learning_rate,
        "phase1_steps": args.phase1_steps,
        "phase2_steps": args.phase2_steps,
        "snapshot_every": args.snapshot_every,
    }
    fit_cfg = dataclasses.replace(
        cfg.fit_config(),
        **{k: v for k, v in overrides.items() if v is not None},
        **({"seed": args.seed} if args.seed is not None else {}),
    )
    initial = io.read_cloud(_pick(args.initial, cfg.initial_path, "initial cloud"))
    target = io.read_cloud(_pick(args.target, cfg.target_path, "target cloud"))
    out_path = _pick(args.out, cfg.output_path, "output path")
    trace_path = args.trace or cfg.trace_path
    if not args.no_normalize:
        initial, target = normalize_cloud(initial), normalize_cloud(target)

    fitted, trace = fit(initial, target, cfg.pool(), fit_cfg, cfg.render)
    io.write_cloud(fitted, out_path)
    if trace_path:
        with open(trace_path, "w", encoding="ascii") as fh:
            for rec in trace.records():
                rec["phase"] = 1 if rec["step"] < fit_cfg.phase1_steps else 2
                fh.write(json.dumps(rec) + "\n")
    if args.snapshot_dir and trace.snapshots:
        snap_dir = Path(args.snapshot_dir)
        snap_dir.mkdir(parents=True, exist_ok=True)
        for step, cloud in trace.snapshots.items():
            io.write_cloud(cloud, snap_dir / f"step_{step:06d}.xyz")
    first, last = trace.history[0], trace.history[-1]
    out.write(
        f"steps {len(trace)}  total {first.total:.6g} -> {last.total:.6g}  "
        f"cd {first.cd:.6g} -> {last.cd:.6g}\nwrote {out_path}\n"
    )


def cmd_metrics(args, out):
    pred = io.read_cloud(args.pred)
    gt = io.read_cloud(args.gt)
    if not args.no_normalize:
        pred, gt = normalize_cloud(pred), normalize_cloud(gt)
    cd, em = eval_metrics(pred, gt, args.max_iters, args.tol)
    if args.format == "csv":
        name = args.name or Path(args.pred).stem
        out.write("name,cd_x100,emd_x100\n")
        out.write(f"{name},{cd:.4f},{em:.4f}\n")
    else:
        out.write(f"{cd:.2f} {em:.2f}\n")


def cmd_gradcheck(args, out):
    results = run_gradcheck(args.seed, args.instances)
    out.write(format_report(results))
    return 0 if all(r.passed for r in results) else 1


def _parse_values(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("variances must be positive")
    return values


def cmd_sweep_sigma(args, out):
    cfg = _load_config(args)
    cloud = _read_render_cloud(args)
    results = sigma_sweep(cloud, cfg.view(args.azimuth, args.elevation), args.values,
                          cfg.intrinsics, cfg.splat)
    # each panel scaled to [0, 255] independently, laid side by side
    strip = np.concatenate([io.to_bytes(img, normalize=True) for _, img, _ in results], axis=1)
    io.write_image(strip, args.out)
    if args.raw_dir:
        raw_dir = Path(args.raw_dir)
        raw_dir.mkdir(parents=True, exist_ok=True)
        for sigma2, img, _ in results:
            io.write_grid_text(img, raw_dir / f"sigma2_{sigma2!r}.txt")
    for sigma2, _, n in results:
        out.write(f"sigma2={sigma2!r} components={n}\n")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="edgesplat",
        description="Differentiable point-cloud projection, edge/corner maps and losses.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("project", help="render a cloud to a graymap")
    p.add_argument("cloud")
    p.add_argument("--out", required=True, help="output .pgm")
    p.add_argument("--raw", help="also write the float image as text")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True,
                   help="stretch [min, max] to [0, 255] (default) instead of clamping")
    _add_view_args(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("maps", help="render suppressed edge and corner maps")
    p.add_argument("cloud")
    p.add_argument("--edge-out", required=True)
    p.add_argument("--corner-out", required=True)
    p.add_argument("--raw", metavar="PREFIX", help="write PREFIX.edge.txt / PREFIX.corner.txt")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True)
    _add_view_args(p)
    p.set_defaults(func=cmd_maps)

    p = sub.add_parser("sobel", help="binarize an image and take Sobel edges")
    p.add_argument("image", help="input .pgm")
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=float, default=0.5, help="binarization level in [0, 1]")
    p.add_argument("--raw", help="also write the float edge image as text")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_sobel)

    p = sub.add_parser("fit", help="fit cloud coordinates to a target's edge/corner maps")
    p.add_argument("--initial", help="initial cloud (default: io.initial_path)")
    p.add_argument("--target", help="target cloud (default: io.target_path)")
    p.add_argument("--out", help="fitted cloud path (default: io.output_path)")
    p.add_argument("--trace", help="JSON-lines loss trace (default: io.trace_path)")
    p.add_argument("--config")
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--phase1-steps", type=int)
    p.add_argument("--phase2-steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--snapshot-every", type=int)
    p.add_argument("--snapshot-dir")
    p.add_argument("--no-normalize", action="store_true", help="skip unit-cube normalization")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("metrics", help="CD and EMD (x100, per point) after ICP alignment")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--name", help="row label for csv output (default: pred file stem)")
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--no-normalize", action="store_true", help="skip unit-cube normalization")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("gradcheck", help="finite-difference audit of all pullbacks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=20)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("sweep-sigma", help="render a cloud at several splat variances")
    p.add_argument("cloud")
    p.add_argument("--values", type=_parse_values, default=[0.1, 0.5, 1.0, 2.0],
                   help="comma-separated variances in px^2")
    p.add_argument("--out", required=True, help="output strip .pgm")
    p.add_argument("--raw-dir", help="directory for per-variance float images")
    _add_view_args(p)
    p.set_defaults(func=cmd_sweep_sigma)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code = args.func(args, out)
    except (ValueError, OSError, FloatingPointError) as exc:
        prefix = "" if isinstance(exc, CloudParseError) else f"{args.command}: "
        sys.stderr.write(f"edgesplat: error: {prefix}{exc}\n")
        return 1
    return code or 0


cli = main


if __name__ == "__main__":
    sys.exit(main())
