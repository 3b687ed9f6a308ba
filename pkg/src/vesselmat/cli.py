"""Batch command-line front end.

Subcommands: ``segment`` (one image -> mask/trimap/overlay PNGs), ``trimap``
(inspect the generated trimap), ``eval`` (score a dataset -> CSV + figures),
``sweep`` (threshold sensitivity -> CSV + figure).  Exit codes: 0 success,
1 pipeline failure, 2 usage or I/O problem.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import imgio, plots
from .errors import (ConfigError, FormatError, FovEstimationError,
                     ManifestError, PipelineError, VesselmatError)
from .evaluation import (evaluate_dataset, evaluate_entry, sweep as run_sweep,
                      write_metrics_csv, write_sweep_csv, SWEEP_PARAMS)
from .pipeline import PipelineConfig, run_pipeline
from .trimap import trimap_to_gray


def _parse_values(spec):
    """Parse '0.2:0.4:0.05' (inclusive when step divides the span) or '0.2,0.3'."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range spec must be start:stop:step, got {spec!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"bad range spec {spec!r}")
        count = int(round((stop - start) / step))
        values = [start + i * step for i in range(count + 1)]
        return [v for v in values if v <= stop + 1e-9]
    return [float(v) for v in spec.split(",") if v.strip()]


def _add_pipeline_flags(parser):
    g = parser.add_argument_group("pipeline parameters")
    g.add_argument("--se-length", type=int, default=None, dest="d",
                   help="line structuring element length / vessel diameter (21)")
    g.add_argument("--angles", default=None,
                   help="comma-separated orientation fan in degrees")
    g.add_argument("--iuwt-scales", default=None, help="wavelet scales, e.g. 2,3")
    g.add_argument("--iuwt-levels", type=int, default=None)
    g.add_argument("--p1", type=float, default=None)
    g.add_argument("--p2", type=float, default=None)
    g.add_argument("--epsilon", type=float, default=None)
    g.add_argument("--e1", type=float, default=None)
    g.add_argument("--e2", type=float, default=None)
    g.add_argument("--r", type=float, default=None)
    g.add_argument("--s", type=float, default=None)
    g.add_argument("--omega", type=float, default=None)
    g.add_argument("--window", type=int, default=None)
    g.add_argument("--metric", choices=("euclidean", "chebyshev"), default=None)
    g.add_argument("--fov-mode", choices=("auto", "estimate", "full"), default=None)
    g.add_argument("--gauss-seidel", action="store_true", default=None,
                   help="let intra-hierarchy updates see each other")
    g.add_argument("--no-postprocess", action="store_true", default=None)
    g.add_argument("--no-skeleton", action="store_true", default=None,
                   help="ablation: omit the vessel skeleton from the trimap")
    g.add_argument("--trimap-only", action="store_true", default=None,
                   help="ablation: label all unknown pixels background")
    g.add_argument("--full-frame", action="store_true", default=None,
                   help="compute metrics over the full frame, not the FOV")


def _build_config(args):
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    overrides = {}
    for attr, key in (
        ("d", "d"), ("iuwt_levels", "iuwt_levels"), ("p1", "p1"), ("p2", "p2"),
        ("epsilon", "epsilon"), ("e1", "e1"), ("e2", "e2"), ("r", "r"), ("s", "s"),
        ("omega", "omega"), ("window", "window"), ("metric", "metric"),
        ("fov_mode", "fov_mode"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "angles", None) is not None:
        overrides["angles"] = tuple(float(a) for a in args.angles.split(","))
    if getattr(args, "iuwt_scales", None) is not None:
        overrides["iuwt_scales"] = tuple(int(s) for s in args.iuwt_scales.split(","))
    if getattr(args, "gauss_seidel", None):
        overrides["gauss_seidel"] = True
    if getattr(args, "no_postprocess", None):
        overrides["do_postprocess"] = False
    if getattr(args, "no_skeleton", None):
        overrides["with_skeleton"] = False
    if getattr(args, "trimap_only", None):
        overrides["trimap_only"] = True
    if getattr(args, "full_frame", None):
        overrides["full_frame_metrics"] = True
    return config.with_overrides(**overrides) if overrides else config


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dataset_root(args):
    if args.root:
        return Path(args.root)
    env = os.environ.get("VESSELMAT_DATA")
    if env:
        root = Path(env) / args.dataset
        return root if root.exists() else Path(env)
    raise ManifestError("no dataset root: pass --root or set VESSELMAT_DATA")


def _run_degenerate_aware(rgb, config, provided_fov):
    """Run the pipeline; on FOV-estimation failure fall back to the full frame
    with a warning so degenerate (e.g. all-black) inputs still exit cleanly."""
    try:
        return run_pipeline(rgb, config, fov=provided_fov), False
    except PipelineError as exc:
        if isinstance(exc.cause, FovEstimationError):
            print(f"warning: {exc.cause}; treating full frame as FOV",
                  file=sys.stderr)
            fallback = config.with_overrides(fov_mode="full")
            return run_pipeline(rgb, fallback, fov=None), True
        raise


def cmd_segment(args):
    image_path = Path(args.image)
    if not image_path.is_file():
        print(f"error: image not found: {image_path}", file=sys.stderr)
        return 2
    for opt in ("fov", "gt"):
        p = getattr(args, opt)
        if p and not Path(p).is_file():
            print(f"error: --{opt} file not found: {p}", file=sys.stderr)
            return 2
    config = _build_config(args)
    rgb = imgio.load_image(image_path)
    provided = imgio.load_mask(args.fov) if args.fov else None
    result, _ = _run_degenerate_aware(rgb, config, provided)
    out = _outdir(args)
    imgio.save_mask(out / "mask.png", result.mask)
    imgio.save_gray_png(out / "trimap.png", trimap_to_gray(result.trimap))
    if args.gt:
        gt = imgio.load_mask(args.gt)
        plots.save_pair(gt, result.mask, out / "overlay.png")
    else:
        plots.save_pair(imgio.green_channel(rgb), result.mask, out / "overlay.png",
                        left_title="green channel")
    config.to_file(out / "resolved_config.txt")
    print(f"segmented {image_path.name} in {result.seconds:.3f} s "
          f"(vessel fraction {result.mask.mean():.4f})")
    return 0


def cmd_trimap(args):
    image_path = Path(args.image)
    if not image_path.is_file():
        print(f"error: image not found: {image_path}", file=sys.stderr)
        return 2
    config = _build_config(args)
    rgb = imgio.load_image(image_path)
    provided = imgio.load_mask(args.fov) if args.fov else None
    result, _ = _run_degenerate_aware(rgb, config, provided)
    out = _outdir(args)
    imgio.save_gray_png(out / "trimap.png", trimap_to_gray(result.trimap))
    if args.overlay:
        imgio.save_rgb_png(out / "trimap_overlay.png", plots.trimap_rgb(result.trimap))
    config.to_file(out / "resolved_config.txt")
    counts = {name: int((result.trimap == code).sum())
              for name, code in (("background", 0), ("unknown", 1), ("vessel", 2))}
    print(f"trimap for {image_path.name}: {counts}")
    return 0


def cmd_eval(args):
    config = _build_config(args)
    manifest = imgio.load_dataset(_dataset_root(args), args.dataset)
    out = _outdir(args)
    records, mean, failures = evaluate_dataset(manifest, config, jobs=args.jobs)
    all_records = records + ([mean] if mean else [])
    write_metrics_csv(out / "metrics.csv", all_records,
                      include_timing=not args.no_timing)
    if records:
        plots.save_eval_summary(records, out / "summary.png")
    if args.overlays:
        overlay_dir = out / "overlays"
        overlay_dir.mkdir(exist_ok=True)
        for entry in manifest.entries:
            try:
                _, result = evaluate_entry(entry, config)
            except Exception:
                continue  # already recorded as a failure by the scoring pass
            gt = imgio.load_mask(entry.ground_truth)
            plots.save_pair(gt, result.mask, overlay_dir / f"{entry.image.stem}.png")
    config.to_file(out / "resolved_config.txt")
    for failure in failures:
        print(f"failed: {failure}", file=sys.stderr)
    if mean:
        print(f"{manifest.name}: {len(records)} images  "
              f"acc={mean.acc:.4f} auc={mean.auc:.4f} "
              f"se={mean.se:.4f} sp={mean.sp:.4f}")
    return 1 if failures or not records else 0


def cmd_sweep(args):
    config = _build_config(args)
    manifest = imgio.load_dataset(_dataset_root(args), args.dataset)
    values = _parse_values(args.values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    out = _outdir(args)
    rows = run_sweep(manifest, args.param, values, config, jobs=args.jobs)
    write_sweep_csv(out / f"sweep_{args.param}.csv", args.param, rows)
    plots.save_sweep_plot(args.param, rows, out / f"sweep_{args.param}.png")
    config.to_file(out / "resolved_config.txt")
    for row in rows:
        acc = "nan" if row.mean_acc is None else f"{row.mean_acc:.6f}"
        print(f"{args.param}={row.value:g}  mean_acc={acc}  failures={len(row.failures)}")
    return 1 if any(row.failures for row in rows) else 0


def _parser():
    parser = argparse.ArgumentParser(
        prog="vesselmat",
        description="Retinal vessel segmentation via automatic trimaps and "
                    "hierarchical matting.",
    )
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel workers across images")
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved; the pipeline is deterministic")
    sub = parser.add_subparsers(dest="command", required=True)

    p_segment = sub.add_parser("segment", help="segment a single fundus image")
    p_segment.add_argument("image")
    p_segment.add_argument("--fov", default=None, help="FOV mask image")
    p_segment.add_argument("--gt", default=None,
                           help="ground-truth mask for the overlay panel")
    _add_pipeline_flags(p_segment)
    p_segment.set_defaults(func=cmd_segment)

    p_trimap = sub.add_parser("trimap", help="write the generated trimap")
    p_trimap.add_argument("image")
    p_trimap.add_argument("--fov", default=None)
    p_trimap.add_argument("--overlay", action="store_true",
                          help="also write a white/black/red color rendering")
    _add_pipeline_flags(p_trimap)
    p_trimap.set_defaults(func=cmd_trimap)

    p_eval = sub.add_parser("eval", help="evaluate a dataset against ground truth")
    p_eval.add_argument("--root", default=None, help="dataset root directory "
                        "(or manifest file for --dataset custom)")
    p_eval.add_argument("--dataset", default="DRIVE",
                        choices=("DRIVE", "STARE", "CHASE_DB1", "custom"))
    p_eval.add_argument("--overlays", action="store_true",
                        help="write per-image ground-truth/prediction panels")
    p_eval.add_argument("--no-timing", action="store_true",
                        help="write 0.000 in the seconds column (reproducible CSV)")
    _add_pipeline_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="threshold sensitivity sweep")
    p_sweep.add_argument("--root", default=None)
    p_sweep.add_argument("--dataset", default="DRIVE",
                         choices=("DRIVE", "STARE", "CHASE_DB1", "custom"))
    p_sweep.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p_sweep.add_argument("--values", required=True,
                         help="start:stop:step (inclusive) or comma list")
    _add_pipeline_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (ManifestError, FormatError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return 1
    except VesselmatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
