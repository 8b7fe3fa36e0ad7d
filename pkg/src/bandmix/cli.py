"""Command-line entry point.

Subcommands: augment, spectrum, lowpass-eval, train-demo, mce, shape-bias,
bench. Everything is deterministic given --seed (default: ROBUSTMIX_SEED
environment variable, then 0). Output is CSV or JSON on stdout unless an
--out path is given.

Exit codes: 0 success, 1 usage error (bad flags or flag values), 2 data
error (missing or malformed files, shape mismatches), 3 numeric failure
(zero-energy batch, diverged training).
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .augment import POLICIES, POLICY_BASELINE, AugmentConfig, apply_policy
from .dct import flop_estimate, get_plan
from .errors import (
    CutoffOutOfRange,
    DivergedTraining,
    EmptyTable,
    InvalidAlpha,
    InvalidSize,
    InvalidSpec,
    InvalidTau,
    BandmixError,
    ShapeMismatch,
    ZeroEnergyBatch,
)
from .filters import band_split
from .metrics import (
    curve_to_csv,
    cumulative_energy_curve,
    lowpass_accuracy_sweep,
    mean_corruption_error,
    read_corruption_table,
    corruption_error,
)
from .sampling import make_rng
from .tensor_io import read_image, read_tensor, write_tensor
from .toy import (
    SyntheticSpec,
    compare_policies,
    generate_synthetic_dataset,
    load_model,
    save_model,
    train,
    evaluate,
)

ENV_SEED = "ROBUSTMIX_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # unknown flags and malformed values raise instead of exiting 2
    def error(self, message):
        raise UsageError(message)


def _parse_cutoffs(text: str):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise UsageError(f"bad cutoff list {text!r}") from None
    if not values:
        raise UsageError("cutoff list is empty")
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise CutoffOutOfRange(f"cutoff {v} outside [0, 1]")
    return values


def _resolve_seed(value):
    if value is not None:
        return value
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{ENV_SEED}={env!r} is not an integer") from None
    return 0


def _emit(text: str, out_path):
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text)


def _fmt(v) -> str:
    return repr(float(v))


# ---------------------------------------------------------------------------
# Subcommands


def cmd_augment(args) -> int:
    cfg = AugmentConfig(
        policy=args.policy, alpha=args.alpha, tau=args.tau, seed=_resolve_seed(args.seed)
    )
    images = read_tensor(args.in_path)
    labels = read_tensor(args.labels)
    if images.ndim != 4:
        raise ShapeMismatch(f"expected rank-4 image batch, got shape {images.shape}")
    batch = apply_policy(images, labels, cfg, make_rng(cfg.seed), threads=args.threads)
    write_tensor(batch.images, args.out_images)
    write_tensor(batch.labels, args.out_labels)
    print(
        json.dumps(
            {
                "policy": cfg.policy,
                "seed": cfg.seed,
                "lambda_low": batch.draw.lambda_low,
                "lambda_high": batch.draw.lambda_high,
                "cutoff": batch.draw.cutoff,
                "energy_weight": batch.draw.energy_weight,
            },
            sort_keys=True,
        )
    )
    return 0


def _load_corpus(directory):
    d = Path(directory)
    if not d.is_dir():
        raise UsageError(f"--corpus {directory} is not a directory")
    tensors = []
    for path in sorted(d.iterdir()):
        if path.suffix.lower() in (".pgm", ".ppm"):
            tensors.append(read_image(path))
        elif path.suffix.lower() == ".rten":
            tensors.append(read_tensor(path))
    if not tensors:
        raise EmptyTable(f"no .pgm/.ppm/.rten files in {directory}")
    return tensors


def cmd_spectrum(args) -> int:
    corpus = _load_corpus(args.corpus)
    curve = cumulative_energy_curve(corpus, _parse_cutoffs(args.cutoffs))
    _emit(curve.to_csv(), args.out)
    return 0


def cmd_lowpass_eval(args) -> int:
    model, _ = load_model(args.model)
    images = read_tensor(args.images)
    labels = read_tensor(args.labels)
    curve = lowpass_accuracy_sweep(
        model.scores, images, labels, _parse_cutoffs(args.cutoffs), threads=args.threads
    )
    _emit(curve.to_csv(), args.out)
    return 0


def cmd_train_demo(args) -> int:
    try:
        if "," in args.seeds:
            seeds = [int(s) for s in args.seeds.split(",")]
        else:
            seeds = list(range(int(args.seeds)))
    except ValueError:
        raise UsageError(f"bad --seeds value {args.seeds!r}") from None
    if not seeds:
        raise UsageError("--seeds must name at least one seed")
    policies = args.policies.split(",")
    for p in policies:
        if p not in POLICIES:
            raise UsageError(f"unknown policy {p!r}, want one of {POLICIES}")
    spec = SyntheticSpec(
        size=args.size,
        classes=args.classes,
        train_size=args.train_size,
        test_size=args.test_size,
        noise_std=args.noise_std,
        distractor_amplitude=args.distractor_amplitude,
    )
    sweep = _parse_cutoffs(args.sweep_cutoffs) if args.sweep_cutoffs else None
    report = compare_policies(
        spec,
        policies,
        seeds,
        alpha=args.alpha,
        tau=args.tau,
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        sweep_cutoffs=sweep,
        threads=args.threads,
    )

    lines = ["policy,seed,test_accuracy"]
    for policy in policies:
        for seed, acc in zip(seeds, report["policies"][policy]["accuracies"]):
            lines.append(f"{policy},{seed},{_fmt(acc)}")
    lines.append("policy,mean_accuracy,std_accuracy")
    for policy in policies:
        r = report["policies"][policy]
        lines.append(f"{policy},{_fmt(r['mean'])},{_fmt(r['std'])}")
    _emit("\n".join(lines) + "\n", args.out)

    if args.out_json:
        Path(args.out_json).write_text(json.dumps(report, indent=2, sort_keys=True))

    if args.save_models:
        for seed in seeds:
            dataset = generate_synthetic_dataset(
                SyntheticSpec(
                    size=args.size,
                    classes=args.classes,
                    train_size=args.train_size,
                    test_size=args.test_size,
                    noise_std=args.noise_std,
                    distractor_amplitude=args.distractor_amplitude,
                    seed=seed,
                )
            )
            for policy in policies:
                cfg = AugmentConfig(policy=policy, alpha=args.alpha, tau=args.tau, seed=seed)
                model = train(
                    dataset.train_images,
                    dataset.train_labels,
                    cfg,
                    epochs=args.epochs,
                    learning_rate=args.lr,
                    batch_size=args.batch_size,
                    threads=args.threads,
                )
                manifest = {
                    "policy": policy,
                    "seed": seed,
                    "alpha": args.alpha,
                    "tau": args.tau,
                    "epochs": args.epochs,
                    "learning_rate": args.lr,
                    "batch_size": args.batch_size,
                    "test_accuracy": evaluate(
                        model, dataset.test_images, dataset.test_labels
                    ),
                }
                save_model(
                    model, Path(args.save_models) / f"{policy}_seed{seed}", manifest
                )
    return 0


def cmd_mce(args) -> int:
    table = read_corruption_table(args.table)
    lines = []
    for name in table.corruptions():
        lines.append(f"CE_{name},{_fmt(corruption_error(*table.errors_for(name)))}")
    lines.append(f"mCE,{_fmt(mean_corruption_error(table))}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_shape_bias(args) -> int:
    from .metrics import shape_bias

    value = shape_bias(args.correct_shape, args.correct_texture)
    print(f"shape_bias,{_fmt(value)}")
    return 0


def cmd_bench(args) -> int:
    n, c, b = args.size, args.channels, args.batch
    macs = flop_estimate(n, n, c)
    rng = make_rng(_resolve_seed(args.seed))
    batch = rng.random((b, n, n, c), dtype=np.float32)
    get_plan(n)  # exclude plan construction from timing
    best = float("inf")
    for _ in range(args.repeats):
        t0 = time.perf_counter()
        band_split(batch, 0.5, threads=args.threads)
        best = min(best, time.perf_counter() - t0)
    per_image = best / b
    print(
        json.dumps(
            {
                "size": n,
                "channels": c,
                "batch": b,
                "repeats": args.repeats,
                "threads": args.threads,
                "macs_per_image": macs,
                "model_gflops_per_image": macs / 1e9,
                "seconds_per_image": per_image,
                "images_per_second": 1.0 / per_image,
                "effective_gmacs_per_second": macs / per_image / 1e9,
                "mac_convention": "1 MAC = 1 FLOP",
                "note": "high band is derived by subtraction, so measured work "
                "is below the 6-product model",
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bandmix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    threads_default = os.cpu_count() or 1

    p = sub.add_parser("augment", help="augment an image batch and write it back out")
    p.add_argument("--policy", choices=POLICIES, default="robustmix")
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=threads_default)
    p.add_argument("--in", dest="in_path", required=True, metavar="IMAGES.rten")
    p.add_argument("--labels", required=True, metavar="LABELS.rten")
    p.add_argument("--out-images", required=True)
    p.add_argument("--out-labels", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("spectrum", help="cumulative low-band energy of a corpus")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument(
        "--cutoffs",
        default="0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95,1",
    )
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("lowpass-eval", help="accuracy under low-pass filtering")
    p.add_argument("--model", required=True, metavar="DIR")
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--cutoffs", default="0,0.125,0.25,0.375,0.5,0.625,0.75,0.875,1")
    p.add_argument("--threads", type=int, default=threads_default)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_lowpass_eval)

    p = sub.add_parser("train-demo", help="policy comparison on the synthetic task")
    p.add_argument("--policies", default="baseline,mixup,robustmix,robustmix_no_energy_weight")
    p.add_argument("--seeds", default="5", help="count, or comma list of seeds")
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--tau", type=float, default=0.25)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--train-size", type=int, default=256)
    p.add_argument("--test-size", type=int, default=2048)
    p.add_argument("--noise-std", type=float, default=0.25)
    p.add_argument("--distractor-amplitude", type=float, default=1.0)
    p.add_argument("--sweep-cutoffs", default=None)
    p.add_argument("--threads", type=int, default=threads_default)
    p.add_argument("--out", default=None)
    p.add_argument("--out-json", default=None)
    p.add_argument("--save-models", default=None, metavar="DIR")
    p.set_defaults(func=cmd_train_demo)

    p = sub.add_parser("mce", help="per-corruption and mean corruption error")
    p.add_argument("--table", required=True, metavar="CSV")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_mce)

    p = sub.add_parser("shape-bias", help="shape over shape-plus-texture decisions")
    p.add_argument("--correct-shape", type=int, required=True)
    p.add_argument("--correct-texture", type=int, required=True)
    p.set_defaults(func=cmd_shape_bias)

    p = sub.add_parser("bench", help="band-split throughput vs the MAC model")
    p.add_argument("--size", type=int, default=224)
    p.add_argument("--channels", type=int, default=3)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=threads_default)
    p.set_defaults(func=cmd_bench)

    return parser


USAGE_ERRORS = (
    UsageError,
    InvalidAlpha,
    InvalidTau,
    InvalidSize,
    InvalidSpec,
    CutoffOutOfRange,
    ValueError,
)
NUMERIC_ERRORS = (ZeroEnergyBatch, DivergedTraining)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except USAGE_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    try:
        return args.func(args)
    except NUMERIC_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except USAGE_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (BandmixError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
