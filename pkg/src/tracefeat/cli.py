"""Command-line entry point: ``tracefeat <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ._accel import BACKENDS, HAVE_NUMBA
from .errors import ContractError, DataError

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

log = logging.getLogger("tracefeat")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config_flags(p):
    g = p.add_argument_group("configuration")
    g.add_argument("--config", metavar="FILE", help="plain-text key = value configuration")
    g.add_argument("--nphi", type=int, dest="n_phi")
    g.add_argument("--nrho", type=int, dest="n_rho")
    g.add_argument("--nxi", type=int, dest="n_xi")
    g.add_argument("--functional", choices=["radon", "if2"])
    g.add_argument("--q", type=float)
    g.add_argument("--r", type=float)
    g.add_argument("--keep", metavar="Y,CB,CR", help="kept values per channel, or 'full'")
    g.add_argument("--classifier", choices=["svm", "gnb"])
    g.add_argument("--folds", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--threads", type=int)
    g.add_argument("--cache", metavar="CSV", help="feature cache path")


def _build_config(args):
    from .pipeline.config import PipelineConfig, parse_keep

    cfg = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    changes = {}
    for key in ("n_phi", "n_rho", "n_xi", "functional", "q", "r", "classifier", "folds", "seed",
                "threads", "cache"):
        value = getattr(args, key, None)
        if value is not None:
            changes[key] = value
    if getattr(args, "keep", None) is not None:
        changes["keep"] = parse_keep(args.keep)
    return cfg.replace(**changes) if changes else cfg


def cmd_ingest(args):
    from .pipeline.corpus import ingest

    manifest = ingest(args.root)
    for name, n in manifest.class_counts().items():
        print(f"{name}\t{n}")
    print(f"{len(manifest)} images, {len(manifest.class_names)} classes, {len(manifest.skipped)} skipped")
    if args.manifest:
        manifest.write_csv(args.manifest)
    return EXIT_OK


def cmd_extract(args):
    from .pipeline.corpus import ingest
    from .pipeline.features import extract_features

    cfg = _build_config(args)
    manifest = ingest(args.root)
    res = extract_features(manifest, cfg, strict=args.strict, backend=args.backend, force=args.force)
    print(f"{res.path}: {res.computed} extracted, {res.reused} reused, {len(res.failed)} failed"
          f"{'' if res.written else ' (unchanged)'}")
    return EXIT_OK


def _print_report(rep):
    print(f"accuracy {rep.accuracy:.4f} over {rep.confusion.total} instances, {len(rep.attributes)} attributes")
    for m in rep.per_class:
        print(f"  {m.name:<20} P={m.precision:.3f} R={m.recall:.3f} F={m.f_measure:.3f}")
    for key, path in rep.files.items():
        print(f"  wrote {key}: {path}")


def cmd_evaluate(args):
    from .pipeline.evaluation import run_evaluation

    cfg = _build_config(args)
    _print_report(run_evaluation(cfg.cache, cfg, args.out))
    return EXIT_OK


def cmd_fss(args):
    from .pipeline.evaluation import run_evaluation

    cfg = _build_config(args)
    if args.patience is not None:
        cfg = cfg.replace(fss_patience=args.patience)

    def progress(step, attr, acc, accepted):
        print(f"step {step}: attribute {attr} -> {acc:.4f}{'' if accepted else ' (no gain)'}", flush=True)

    _print_report(run_evaluation(cfg.cache, cfg, args.out, fss=True, n_jobs=args.jobs, progress=progress))
    return EXIT_OK


def _parse_row(text):
    try:
        row = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NPHI,NRHO,NXI, got {text!r}")
    if len(row) != 3:
        raise argparse.ArgumentTypeError(f"expected NPHI,NRHO,NXI, got {text!r}")
    return row


def cmd_mask(args):
    from .pipeline.bench import MASK_ROWS, analyze_mask
    from .trace import format_mask_table

    rows = args.row or MASK_ROWS
    print(format_mask_table(analyze_mask(rows, args.width, args.height, backend=args.backend)))
    return EXIT_OK


def cmd_bench(args):
    import numpy as np

    from . import preproc
    from .pipeline.bench import bench_stages, format_stages, format_sweep, sweep, synthetic_image
    from .pipeline.corpus import load_rgb

    cfg = _build_config(args)
    rgb = load_rgb(args.image) if args.image else synthetic_image(args.width, args.height, cfg.seed)
    backends = [b for b in BACKENDS if b != "numba" or HAVE_NUMBA] if args.backend == "both" else [args.backend]
    for backend in backends:
        print(f"[{backend or 'default'}] image {rgb.shape[1]}x{rgb.shape[0]}, "
              f"n_phi={cfg.n_phi} n_rho={cfg.n_rho} n_xi={cfg.n_xi}")
        if args.sweep:
            plane = preproc.rgb_to_ycbcr(preproc.ImagePlanes.from_rgb8(rgb)).planes[0]
            if args.values:
                values = [int(v) for v in args.values.split(",")]
            elif args.sweep == "n_xi":
                values = [100, 200, 300, 400, 500]
            else:
                values = [32, 48, 64, 80, 96]
            print(format_sweep(sweep(args.sweep, values, cfg.trace_params(), plane,
                                     repeats=args.repeats, backend=backend)))
        else:
            print(format_stages(bench_stages(cfg, rgb, repeats=args.repeats, backend=backend)))
    return EXIT_OK


def cmd_export_graph(args):
    from .learn import graph_to_dot, misclassification_graph, read_confusion_csv, write_edge_list

    try:
        cm = read_confusion_csv(args.confusion)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc))
    edges = misclassification_graph(cm)
    if args.format == "dot":
        text = graph_to_dot(edges, cm.class_names)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        write_edge_list(edges, cm.class_names, args.out or "/dev/stdout")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="tracefeat", description="Trace-transform colour image descriptors and domain classification.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", help="list a class-per-directory image corpus")
    s.add_argument("root")
    s.add_argument("--manifest", metavar="CSV", help="write the manifest here")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("extract", help="extract descriptors into the feature cache")
    s.add_argument("root")
    _config_flags(s)
    s.add_argument("--strict", action="store_true", help="abort on the first failing image")
    s.add_argument("--force", action="store_true", help="overwrite a cache built with another configuration")
    s.add_argument("--backend", choices=BACKENDS)
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("evaluate", help="k-fold cross-validation report from the feature cache")
    _config_flags(s)
    s.add_argument("--out", default="report", help="output directory")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("fss", help="greedy wrapper feature-subset selection, then evaluate")
    _config_flags(s)
    s.add_argument("--out", default="report", help="output directory")
    s.add_argument("--patience", type=int)
    s.add_argument("--jobs", type=int, default=1, help="parallel candidate evaluations")
    s.set_defaults(func=cmd_fss)

    s = sub.add_parser("mask", help="sampling-coverage table of the contribution mask")
    s.add_argument("--width", type=int, default=384)
    s.add_argument("--height", type=int, default=256)
    s.add_argument("--row", type=_parse_row, action="append", metavar="NPHI,NRHO,NXI")
    s.add_argument("--backend", choices=BACKENDS)
    s.set_defaults(func=cmd_mask)

    s = sub.add_parser("bench", help="time extraction stages or sweep a sampling parameter")
    _config_flags(s)
    s.add_argument("--image", help="benchmark on this image instead of a synthetic one")
    s.add_argument("--width", type=int, default=384)
    s.add_argument("--height", type=int, default=256)
    s.add_argument("--repeats", type=int, default=20)
    s.add_argument("--sweep", choices=["n_xi", "n_phi", "n_rho", "n_phi_n_rho"])
    s.add_argument("--values", help="comma-separated sweep values")
    s.add_argument("--backend", choices=list(BACKENDS) + ["both"])
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("export-graph", help="misclassification graph from a confusion-matrix CSV")
    s.add_argument("confusion")
    s.add_argument("--format", choices=["dot", "edges"], default="dot")
    s.add_argument("--out")
    s.set_defaults(func=cmd_export_graph)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ContractError as exc:
        print(f"tracefeat: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError) as exc:
        print(f"tracefeat: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
