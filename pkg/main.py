"""
SketchNet CLI Entry Point.

Face photo to sketch synthesis with a fully convolutional network trained by
mini-batch SGD on a generative loss plus a discriminative regularizer.

Usage:
    python main.py synth --count 12 --out-dir data/synth
    python main.py train --manifest data/synth/manifest.csv --arch small --iters 2000 --out-model out/small.model
    python main.py generate --model out/small.model --photo face.ppm --out face_sketch.pgm --timing
    python main.py evaluate --model out/small.model --manifest data/test.csv --ranks 1,3,5,10 --report out/eval.csv
    python main.py evaluate --baseline-grayscale --manifest data/test.csv
    python main.py ablate --manifest data/train.csv --test-manifest data/test.csv --subset-sizes 5,27,44,88 --iters 2000
    python main.py benchmark --repeat 10

Exit codes: 0 on success, 2 on invalid arguments or configuration, 1 on
runtime failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from pydantic import ValidationError

from core.config import (
    DEFAULT_ALPHA,
    DEFAULT_BATCH_SIZE,
    DEFAULT_LAMBDA,
    DEFAULT_LEARNING_RATE,
    LOG_LEVEL,
    threads_from_env,
    validate_config,
)
from core.errors import ArgumentError, ManifestError, SketchNetError, UsageError

logging.basicConfig(
    level=getattr(logging, LOG_LEVEL, logging.INFO),
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
)
logger = logging.getLogger("sketchnet")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _print_banner():
    print("""
╔═══════════════════════════════════════════╗
║          ✏️   S K E T C H N E T            ║
║     Face Photo → Sketch, Fully Conv.      ║
╚═══════════════════════════════════════════╝
""")


# ── Commands ─────────────────────────────────────────────────────────────────

def cmd_synth(args: argparse.Namespace) -> int:
    from pipeline.run_config import SynthRun, parse_run
    from tools.image_io import save_image
    from tools.manifest import ManifestRecord, write_manifest
    from tools.synth import synth_pairs

    run: SynthRun = parse_run(SynthRun, vars(args))
    dataset = synth_pairs(run.seed, run.count)
    records = []
    for pair in dataset.pairs:
        photo = save_image(pair.photo, run.out_dir / "photos" / f"{pair.identity}.ppm")
        sketch = save_image(pair.sketch, run.out_dir / "sketches" / f"{pair.identity}.pgm")
        records.append(ManifestRecord(photo, sketch, pair.identity))
    manifest = write_manifest(records, run.out_dir / "manifest.csv", header=f"synthetic pairs, seed={run.seed}")
    print(f"  → {len(records)} pairs, manifest {manifest}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    from core.model_io import save_model
    from core.network import parameter_count
    from pipeline.run_config import TrainRun, parse_run
    from pipeline.trainer import train, validate_train_config
    from tools.export_tools import LossLogWriter, loss_log_header, write_run_summary
    from tools.manifest import load_dataset

    run: TrainRun = parse_run(TrainRun, vars(args))
    spec = run.network_spec()
    cfg = run.train_config(checkpoint_every=run.checkpoint_every)
    dataset = load_dataset(run.manifest, "train", align=not run.pre_aligned, threads=run.threads)
    validate_train_config(cfg, len(dataset), spec)

    header = loss_log_header(cfg.loss, cfg.learning_rate, {
        "arch": run.arch,
        "params": parameter_count(spec),
        "iters": cfg.iterations,
        "batch": cfg.batch_size,
        "seed": cfg.seed,
        "xy": cfg.xy_channels,
        "crop": cfg.crop_size,
    })
    with LossLogWriter(run.log_path, header) as log:
        net, history = train(dataset, spec, cfg, checkpoint_to=run.out_model, on_record=log.write)
    save_model(net, run.out_model)

    final = history[-1]
    print(f"  ✓ {cfg.iterations} iterations, final L_total={final['total']:.6g}")
    print(f"  → model {run.out_model}")
    print(f"  → log   {run.log_path}")
    if run.summary is not None:
        write_run_summary({
            "model": run.out_model,
            "log": run.log_path,
            "manifest": run.manifest,
            "arch": run.arch,
            "spec": spec.model_dump(),
            "config": cfg.model_dump(by_alias=True),
            "final": final,
        }, run.summary)
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    import statistics

    import numpy as np

    from core.config import PHOTO_HEIGHT, PHOTO_WIDTH
    from core.errors import DimensionError
    from core.model_io import load_model
    from pipeline.benchmark import time_forward
    from pipeline.run_config import GenerateRun, parse_run
    from tools.image_io import load_image, save_image
    from tools.preprocess import clamp_pixels, prepare_photo, xy_channels_for

    run: GenerateRun = parse_run(GenerateRun, vars(args))
    net = load_model(run.model)
    xy = xy_channels_for(net.spec.in_channels)
    img = load_image(run.photo)
    eyes = None
    if run.eyes is not None:
        lx, ly, rx, ry = run.eyes
        eyes = ((lx, ly), (rx, ry))
    elif img.shape[1] < PHOTO_HEIGHT or img.shape[2] < PHOTO_WIDTH:
        raise DimensionError(
            f"photo is {img.shape[2]}x{img.shape[1]} (width x height); the model expects an aligned "
            f"{PHOTO_WIDTH}x{PHOTO_HEIGHT} photo, or pass --eyes to align a larger one"
        )
    x = prepare_photo(img, eyes, xy_channels=xy).astype(net.dtype)

    out, timings = time_forward(net, x, run.repeat if run.timing else 1)
    path = save_image(clamp_pixels(np.asarray(out)), run.out)
    print(f"  → {path} ({out.shape[2]}x{out.shape[1]})")
    if run.timing:
        print(f"  forward: median {statistics.median(timings):.2f} ms over {len(timings)} runs")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    from core.model_io import load_model
    from pipeline.evaluator import (
        check_model_fits,
        evaluate_baseline,
        evaluate_identity_gallery,
        evaluate_model,
        grayscale_baseline,
        mprl_report,
    )
    from pipeline.run_config import EvaluateRun, parse_run
    from tools.export_tools import cms_frame, default_output, mprl_mean_frame, write_evaluation_report
    from tools.image_io import save_image
    from tools.manifest import load_dataset

    run: EvaluateRun = parse_run(EvaluateRun, vars(args))
    baseline = run.baseline_grayscale or run.identity_gallery
    net = None if baseline else load_model(run.model)
    if net is not None:
        check_model_fits(net, run.crop)
    test_set = load_dataset(run.manifest, "test", align=not run.pre_aligned, threads=run.threads)
    if max(run.ranks) > len(test_set):
        raise ArgumentError(f"rank {max(run.ranks)} exceeds the gallery size {len(test_set)}")

    mprl = None
    if run.identity_gallery:
        mode = "identity gallery"
        report = evaluate_identity_gallery(test_set, run.ranks)
    elif run.baseline_grayscale:
        mode = "grayscale baseline"
        report = evaluate_baseline(test_set, run.ranks, run.threads)
        mprl = mprl_report([
            (p.sketch, g, p.identity) for p, g in zip(test_set.pairs, grayscale_baseline(test_set))
        ])
    else:
        mode = f"model {run.model}"
        report, mprl, pseudo = evaluate_model(net, test_set, run.ranks, run.crop, run.threads)
        if run.save_sketches is not None:
            for sketch, identity in zip(pseudo, test_set.identities):
                save_image(sketch, run.save_sketches / f"{identity}.pgm")
            print(f"  → {len(pseudo)} pseudo-sketches in {run.save_sketches}")

    path = write_evaluation_report(
        run.report or default_output("evaluation"),
        report,
        mprl,
        comments=[f"mode={mode}", f"manifest={run.manifest}"],
        with_reported=run.with_reported,
    )
    print(cms_frame(report).to_string(index=False))
    if mprl is not None:
        print()
        print(mprl_mean_frame(mprl).to_string(index=False))
    print(f"\n  → report {path}")
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    from pipeline.ablation import run_sweep
    from pipeline.run_config import AblateRun, parse_run
    from tools.dataset import Dataset
    from tools.export_tools import default_output, write_sweep_report
    from tools.manifest import load_dataset

    run: AblateRun = parse_run(AblateRun, vars(args))
    spec = run.network_spec()
    cfg = run.train_config()
    align = not run.pre_aligned
    train_set = load_dataset(run.manifest, "train", align=align, threads=run.threads)
    if run.test_manifest is not None:
        test_set = load_dataset(run.test_manifest, "test", align=align, threads=run.threads)
    elif run.train_pairs is not None:
        train_set, test_set = train_set.split_at(run.train_pairs)
    else:
        test_set = Dataset(train_set.pairs, "test")
    too_big = [s for s in run.subset_sizes if s > len(train_set)]
    if too_big:
        raise ArgumentError(f"subset sizes {too_big} exceed the {len(train_set)} training pairs")

    rows = run_sweep(train_set, test_set, spec, cfg, run.subset_sizes, run.alphas)
    path = write_sweep_report(rows, run.report or default_output("sweep"), comments=[
        f"arch={run.arch} iters={cfg.iterations} lr={cfg.learning_rate:g} lambda={cfg.loss.lambda_:g} "
        f"seed={cfg.seed} test_pairs={len(test_set)}",
    ])
    for row in rows:
        print(f"  size={row['subset_size']:>4}  alpha={row['alpha']:<8g} rank-1={row['rank1']:.1f}%")
    print(f"  → report {path}")
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace) -> int:
    from pipeline.benchmark import benchmark_architectures
    from pipeline.run_config import BenchmarkRun, parse_run
    from tools.export_tools import default_output, write_benchmark_report

    run: BenchmarkRun = parse_run(BenchmarkRun, vars(args))
    rows = benchmark_architectures(run.archs, run.repeat, run.seed)
    path = write_benchmark_report(rows, run.report or default_output("benchmark"))
    for row in rows:
        print(f"  {row['arch']:<7} {row['params']:>9,} params  {row['median_ms']:9.1f} ms")
    print(f"  → report {path}")
    return EXIT_OK


# ── Parser ───────────────────────────────────────────────────────────────────

def _add_training_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="Training manifest (photo,sketch,identity[,eyes])")
    p.add_argument("--arch", default="medium", help="sr | small | medium | large | path to a JSON layer list")
    p.add_argument("--iters", type=int, required=True, help="Number of SGD iterations")
    p.add_argument("--lr", type=float, default=DEFAULT_LEARNING_RATE, help="Learning rate (default: %(default)g)")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="Regularizer weight (default: %(default)g)")
    p.add_argument("--lambda", dest="lambda_", type=float, default=DEFAULT_LAMBDA,
                   help="Distance scale inside the regularizer (default: %(default)g)")
    p.add_argument("--batch", type=int, default=DEFAULT_BATCH_SIZE, help="Batch size (default: %(default)d)")
    p.add_argument("--seed", type=int, default=0, help="Seed for initialization and batch sampling")
    p.add_argument("--no-xy", action="store_true", help="Train without the XY coordinate channels")
    p.add_argument("--crop", type=int, help="Train on centered square photo windows of this side")
    p.add_argument("--threads", type=int, default=threads_from_env(),
                   help="Workers for the deterministic parallel mode (default: SKETCHNET_THREADS or 1)")
    p.add_argument("--pre-aligned", action="store_true", help="Ignore manifest eye coordinates")
    p.add_argument("--dtype", choices=["float32", "float64"], default="float32")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchnet",
        description="SketchNet: fully convolutional face photo-to-sketch synthesis",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="Write synthetic photo/sketch pairs and a manifest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="Train a network on a manifest")
    _add_training_options(p)
    p.add_argument("--out-model", type=Path, required=True)
    p.add_argument("--log", type=Path, help="Loss log path (default: <out-model stem>.log.csv)")
    p.add_argument("--checkpoint-every", type=int, default=0, help="Write a checkpoint every N iterations")
    p.add_argument("--summary", type=Path, help="Also write a JSON run summary")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="Generate one pseudo-sketch")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--photo", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--eyes", help="lx,ly,rx,ry eye centers for alignment (pixels, x = column)")
    p.add_argument("--timing", action="store_true", help="Report per-image forward milliseconds")
    p.add_argument("--repeat", type=int, default=5, help="Forward passes timed with --timing")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="CMS verification and MPRL on a test manifest")
    p.add_argument("--model", type=Path)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--ranks", default="1,3,5,10")
    p.add_argument("--report", type=Path)
    p.add_argument("--baseline-grayscale", action="store_true", help="Grayscale photos as pseudo-sketches")
    p.add_argument("--identity-gallery", action="store_true", help="Sanity mode: match sketches to themselves")
    p.add_argument("--with-reported", action="store_true", help="Append published comparison numbers")
    p.add_argument("--save-sketches", type=Path, help="Directory for the generated pseudo-sketches")
    p.add_argument("--crop", type=int, help="Evaluate on centered windows (for crop-trained models)")
    p.add_argument("--threads", type=int, default=threads_from_env())
    p.add_argument("--pre-aligned", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="Training-set-size sweep with and without the regularizer")
    _add_training_options(p)
    p.add_argument("--test-manifest", type=Path, help="Held-out pairs (default: the training manifest)")
    p.add_argument("--train-pairs", type=int,
                   help="Train on the first N pairs of --manifest and test on the rest")
    p.add_argument("--subset-sizes", required=True, help="Comma-separated, e.g. 5,27,44,88")
    p.add_argument("--with-alpha", action="store_true")
    p.add_argument("--without-alpha", action="store_true")
    p.add_argument("--report", type=Path)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("benchmark", help="Time single-image forward passes per builtin architecture")
    p.add_argument("--archs", default="sr,small,medium,large")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", type=Path)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    _print_banner()
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    problems = validate_config()
    if problems:
        print(f"⚠ Configuration problems: {'; '.join(problems)}", file=sys.stderr)
        print("  Check .env against .env.example.\n", file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("\nInterrupted.")
        return EXIT_RUNTIME
    except (UsageError, ArgumentError, ManifestError, ValidationError) as e:
        print(f"Usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (SketchNetError, OSError) as e:
        print(f"{args.command} failed: {e}", file=sys.stderr)
        logger.exception("%s error", args.command)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
