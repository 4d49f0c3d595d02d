"""Command-line interface.

Exit codes: 0 success, 1 at least one sample failed, 2 configuration or
usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import (
    AnalysisConfig,
    ConfigError,
    build_config,
    build_phantom_spec,
    load_config,
    parse_emit,
)
from .imaging import save_image
from .phantom import build_series, synth_sample
from .pipeline import Sample, render_sample, run_analysis
from .pso import optimize_threshold
from .report import canonical_real, write_report

EXIT_OK, EXIT_SAMPLE_FAILED, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("swarmseg")


def _bounds_arg(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}") from None
    return lo, hi


def _emit_arg(text: str) -> tuple[str, ...]:
    try:
        return parse_emit(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _config_from(args) -> AnalysisConfig:
    values = load_config(args.config) if getattr(args, "config", None) else {}
    cfg = build_config(values)
    pso_over = {}
    if getattr(args, "seed", None) is not None:
        pso_over["seed"] = args.seed
    if getattr(args, "swarm_size", None) is not None:
        pso_over["swarm_size"] = args.swarm_size
    if getattr(args, "iterations", None) is not None:
        pso_over["max_iterations"] = args.iterations
    if getattr(args, "bounds", None) is not None:
        pso_over["bounds"] = args.bounds
    over = {}
    if pso_over:
        try:
            over["pso"] = replace(cfg.pso, **pso_over)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if getattr(args, "input", None):
        over["inputs"] = tuple(args.input)
    if getattr(args, "out", None):
        over["output_dir"] = args.out
    if getattr(args, "emit", None) is not None:
        over["emit"] = args.emit
    return replace(cfg, **over)


def cmd_analyze(args) -> int:
    cfg = _config_from(args)
    report = run_analysis(cfg)
    out = Path(cfg.output_dir)
    write_report(report, out / "report.json")
    for rec in report.samples:
        status = f"error: {rec.error}" if rec.error else f"threshold={rec.threshold} holes={rec.hole_count}"
        print(f"{rec.sample_id}: {status}")
    print(f"report written to {out / 'report.json'}")
    return EXIT_SAMPLE_FAILED if report.failed else EXIT_OK


def cmd_synth(args) -> int:
    values = load_config(args.spec)
    base = build_phantom_spec(values)
    if args.seed is not None:
        base = replace(base, seed=args.seed)
    if args.series:
        specs = build_series(base, args.count)
    else:
        specs = [replace(base, seed=base.seed + i) for i in range(args.count)]
    out = Path(args.out)
    truth_dir = out / "groundtruth"
    truth_dir.mkdir(parents=True, exist_ok=True)
    for i, spec in enumerate(specs):
        name = f"phantom_{i:03d}"
        image, truth = synth_sample(spec)
        save_image(image, out / f"{name}.pgm")
        save_image(truth.deposit, truth_dir / f"{name}_deposit.pgm")
        save_image(truth.voids, truth_dir / f"{name}_voids.pgm")
        meta = {
            "seed": spec.seed,
            "midpoint": spec.midpoint,
            "void_count": len(spec.voids),
            "voids": [[v.cx, v.cy, v.rx, v.ry] for v in spec.voids],
            "interface": [canonical_real(y) for y in truth.interface],
        }
        (truth_dir / f"{name}.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        print(out / f"{name}.pgm")
    return EXIT_OK


def _single_sample(path: str) -> Sample:
    return Sample(Path(path).stem, path)


def cmd_optimize(args) -> int:
    cfg = _config_from(args)
    from .imaging import load_image

    image = load_image(args.input)
    result = optimize_threshold(image, cfg.pso, cfg.fitness)
    print(json.dumps({
        "threshold": int(result.best_threshold),
        "best_fitness": canonical_real(result.best_fitness),
        "iterations": len(result.history),
        "evaluations": result.evaluations,
        "seed": cfg.pso.seed,
    }))
    return EXIT_OK


def cmd_render(args) -> int:
    cfg = _config_from(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    record = render_sample(_single_sample(args.input), args.threshold, cfg, out)
    print(json.dumps(record.to_dict(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarmseg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="optimise, segment and render a batch of images")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--input", action="append", help="image file or directory (repeatable)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--swarm-size", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--bounds", type=_bounds_arg, metavar="LO,HI")
    p.add_argument("--emit", type=_emit_arg, help="all, none, or comma list of mask,overlay,composite,saliency")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="generate synthetic deposit phantoms")
    p.add_argument("--spec", required=True, help="phantom.* key = value file")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--series", action="store_true", help="vary U geometry across samples, voids in the middle one")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("optimize", help="print the optimal threshold of one image as JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("render", help="render visualizations at a given threshold")
    p.add_argument("--input", required=True)
    p.add_argument("--threshold", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"swarmseg: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"swarmseg: {exc}", file=sys.stderr)
        return EXIT_SAMPLE_FAILED


if __name__ == "__main__":
    sys.exit(main())
