"""Command line entry point: ``flairbase {evaluate,predict,stats,phantom,info}``.

Exit codes: 0 success, 1 usage error, 2 data or parse error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .config import PRESETS, RADIOLOGIST_GT_THRESHOLD, ExperimentConfig, load_manifest
from .errors import DataError
from .nifti import describe, read_header
from .phantom import PhantomSpec, write_phantom_set
from .plots import write_curve_plots

log = logging.getLogger("flairbase")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser, default_preset: str) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS), default=default_preset,
                   help=f"slice window + resolution preset (default: {default_preset})")
    p.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"),
                   help="inclusive slice window, overrides the preset")
    p.add_argument("--resolution", type=int, nargs=2, metavar=("W", "H"),
                   help="in-plane resolution, overrides the preset")
    p.add_argument("--gt-threshold", type=float,
                   help=f"ground-truth binarization threshold (default 0.9; {RADIOLOGIST_GT_THRESHOLD} is the documented alternative)")
    p.add_argument("--bins", type=int, help="histogram bins (default 256)")
    p.add_argument("--min-size", type=int, help="minimum component size in voxels (default 20)")
    p.add_argument("--connectivity", type=int, choices=(6, 18, 26), help="3D neighbourhood (default 26)")
    p.add_argument("--n-thresholds", type=int, help="Dice search grid size (default 100)")
    p.add_argument("--scope", choices=("all_voxels", "brain_only"), help="voxels entering the metrics")
    p.add_argument("--equalize-scope", choices=("volume", "slice"), help="equalize per volume or per slice")


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_preset(args.preset)
    overrides = dict(
        slice_window=tuple(args.window) if args.window else None,
        resolution=tuple(args.resolution) if args.resolution else None,
        gt_threshold=args.gt_threshold,
        bins=args.bins,
        min_component_size=args.min_size,
        connectivity=args.connectivity,
        n_thresholds=args.n_thresholds,
        scope=args.scope,
        equalize_scope=args.equalize_scope,
    )
    overrides.update(getattr(args, "extra_overrides", {}))
    try:
        return cfg.with_overrides(**overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flairbase", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    ev = sub.add_parser("evaluate", help="run the pipeline on a manifest and report metrics")
    ev.add_argument("manifest", type=Path)
    _add_config_flags(ev, "experiment-1")
    ev.add_argument("--jobs", type=int, default=1, help="scans processed concurrently")
    ev.add_argument("--out", type=Path, help="report JSON path (default: stdout)")
    ev.add_argument("--curves", type=Path, help="curve CSV path")
    ev.add_argument("--plots", type=Path, help="directory for PR/ROC SVG plots")
    ev.add_argument("--curve-points", type=int, default=1000,
                    help="max curve points in the report and curve CSV (0 = all)")
    ev.add_argument("--exhaustive-ceiling", action="store_true",
                    help="also search every distinct score for the Dice ceiling")

    pr = sub.add_parser("predict", help="write the anomaly map for one FLAIR volume")
    pr.add_argument("input", type=Path)
    pr.add_argument("output", type=Path)
    _add_config_flags(pr, "native")
    pr.add_argument("--threshold", type=float, help="also write the binarized, filtered mask")
    pr.add_argument("--mask-out", type=Path, help="path for the binary mask")

    st = sub.add_parser("stats", help="connected-component statistics of the ground truth")
    st.add_argument("manifest", type=Path)
    _add_config_flags(st, "native")
    st.add_argument("--out", type=Path, help="CSV path (default: stdout)")

    ph = sub.add_parser("phantom", help="generate synthetic phantoms and a manifest")
    ph.add_argument("out_dir", type=Path)
    ph.add_argument("--n-scans", type=int, default=10)
    ph.add_argument("--seed", type=int, default=0)
    ph.add_argument("--dims", type=int, nargs=3, default=(128, 128, 140))
    ph.add_argument("--n-lesions", type=int, default=4)
    ph.add_argument("--radius", type=int, nargs=2, default=(5, 8), metavar=("MIN", "MAX"))
    ph.add_argument("--contrast", type=float, default=3.0)
    ph.add_argument("--blur", type=float, default=0.0, help="Gaussian sigma applied to the GT")
    ph.add_argument("--noise", type=float, default=0.1)
    ph.add_argument("--name", default="phantom")
    ph.add_argument("--gzip", action="store_true")

    info = sub.add_parser("info", help="print a NIfTI-1 header")
    info.add_argument("path", type=Path)
    return parser


def cmd_evaluate(args) -> int:
    args.extra_overrides = {"curve_points": args.curve_points, "exhaustive_ceiling": args.exhaustive_ceiling}
    cfg = _config(args)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    manifest = load_manifest(args.manifest)
    report = harness.evaluate(manifest, cfg, jobs=args.jobs)
    # every computation is done; outputs are written only now
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        harness.write_report(report, args.out)
    else:
        json.dump(report.to_dict(), sys.stdout, indent=2)
        sys.stdout.write("\n")
    if args.curves:
        harness.write_curve_csv(report.curve.decimate(cfg.curve_points), args.curves)
    if args.plots:
        write_curve_plots(report.curve.decimate(2000), args.plots, manifest.name)
    log.info(
        "%s: DSC ceiling %.3f (t=%.3f), AUPRC %.3f, AUROC %.3f",
        manifest.name, report.dsc_ceiling, report.best_threshold, report.auprc, report.auroc,
    )
    return 0


def cmd_predict(args) -> int:
    cfg = _config(args)
    harness.predict(args.input, args.output, cfg, args.threshold, args.mask_out)
    return 0


def cmd_stats(args) -> int:
    cfg = _config(args)
    rows = harness.dataset_stats(load_manifest(args.manifest), cfg)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            harness.write_stats_csv(rows, fh)
    else:
        harness.write_stats_csv(rows, sys.stdout)
    return 0


def cmd_phantom(args) -> int:
    spec = PhantomSpec(
        seed=args.seed,
        dims=tuple(args.dims),
        n_lesions=args.n_lesions,
        lesion_radius_range=tuple(args.radius),
        lesion_contrast=args.contrast,
        registration_blur=args.blur,
        noise=args.noise,
    )
    try:
        spec.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    path = write_phantom_set(spec, args.out_dir, args.n_scans, args.name, args.gzip)
    print(path)
    return 0


def cmd_info(args) -> int:
    hdr = read_header(args.path)
    for key, value in describe(hdr):
        print(f"{key}: {value}")
    return 0


COMMANDS = {
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "stats": cmd_stats,
    "phantom": cmd_phantom,
    "info": cmd_info,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"flairbase: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, json.JSONDecodeError) as exc:
        print(f"flairbase: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"flairbase: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
