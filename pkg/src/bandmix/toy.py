"""Desk-scale trainer for demonstrating low-frequency bias.

The synthetic task plants the true class signal in a low frequency band and a
spurious distractor pattern in a high band. During training the distractor is
perfectly correlated with the label; at test time it is drawn independently,
so any weight a model puts on it turns into noise. A linear softmax model
makes the effect directly measurable: test accuracy tracks how much the model
leaned on the low band.

Training is plain mini-batch gradient descent on softmax cross-entropy
against soft labels, single-threaded, bitwise deterministic for a given seed.
"""

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .augment import AugmentConfig, apply_policy
from .dct import get_plan, idct2d
from .errors import DivergedTraining, InvalidSpec, ShapeMismatch
from .filters import keep_count
from .sampling import make_rng
from .tensor_io import read_tensor, write_tensor


@dataclass(frozen=True)
class SyntheticSpec:
    size: int = 32
    classes: int = 4
    signal_cutoff: float = 0.25
    distractor_amplitude: float = 1.0
    train_size: int = 256
    test_size: int = 2048
    noise_std: float = 0.25
    # probability that the training distractor matches the label; below 1 so
    # the distractor is predictive (spurious) rather than a perfect copy of
    # the class signal in another band
    train_distractor_match: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.signal_cutoff < 1.0:
            raise InvalidSpec(f"signal cutoff must be in (0, 1), got {self.signal_cutoff}")
        if self.size < 4:
            raise InvalidSpec(f"image size must be >= 4, got {self.size}")
        if self.classes < 2:
            raise InvalidSpec(f"need at least 2 classes, got {self.classes}")
        if self.train_size < self.classes or self.test_size < self.classes:
            raise InvalidSpec("dataset sizes must be at least the class count")
        if self.distractor_amplitude < 0 or self.noise_std < 0:
            raise InvalidSpec("amplitudes must be nonnegative")
        if not 0.0 <= self.train_distractor_match <= 1.0:
            raise InvalidSpec("train distractor match must be a probability")


@dataclass
class SyntheticDataset:
    train_images: np.ndarray  # (N, n, n, 1)
    train_labels: np.ndarray  # (N, K) one-hot
    test_images: np.ndarray
    test_labels: np.ndarray
    class_patterns: np.ndarray  # (K, n, n), unit norm, low band only
    distractor_patterns: np.ndarray  # (K, n, n), unit norm, high band only
    spec: SyntheticSpec


def _orthonormal_band_patterns(count, n, band, rng):
    """Random unit-norm spatial patterns whose spectra live in one square band."""
    lo, hi = band
    dim = (hi - lo) ** 2
    if dim < count:
        raise InvalidSpec(f"band {band} too small for {count} patterns")
    basis, _ = np.linalg.qr(rng.standard_normal((dim, count)))
    spectra = np.zeros((count, n, n))
    spectra[:, lo:hi, lo:hi] = basis.T.reshape(count, hi - lo, hi - lo)
    plan = get_plan(n)
    return idct2d(spectra.astype(np.float32), plan, plan)


def generate_synthetic_dataset(spec: SyntheticSpec) -> SyntheticDataset:
    """Build train/test splits with a class-correlated high-band distractor
    in train and an independent one in test."""
    n, k = spec.size, spec.classes
    rng = make_rng(spec.seed)

    k_sig = keep_count(n, spec.signal_cutoff)
    hi_lo = n // 2
    if k_sig < 1 or k_sig > hi_lo:
        raise InvalidSpec(
            f"signal band [0, {k_sig}) must end at or before the distractor band "
            f"[{hi_lo}, {n})"
        )
    class_patterns = _orthonormal_band_patterns(k, n, (0, k_sig), rng)
    distractors = _orthonormal_band_patterns(k, n, (hi_lo, n), rng)

    def assemble(count, correlated):
        labels = np.arange(count) % k
        labels = labels[rng.permutation(count)]
        if correlated:
            match = rng.random(count) < spec.train_distractor_match
            dis = np.where(match, labels, rng.integers(0, k, size=count))
        else:
            dis = rng.integers(0, k, size=count)
        images = (
            0.5
            + class_patterns[labels]
            + spec.distractor_amplitude * distractors[dis]
            + spec.noise_std * rng.standard_normal((count, n, n))
        ).astype(np.float32)[..., None]
        one_hot = np.zeros((count, k), dtype=np.float32)
        one_hot[np.arange(count), labels] = 1.0
        return images, one_hot

    train_x, train_y = assemble(spec.train_size, correlated=True)
    test_x, test_y = assemble(spec.test_size, correlated=False)
    return SyntheticDataset(
        train_x, train_y, test_x, test_y, class_patterns, distractors, spec
    )


# ---------------------------------------------------------------------------
# Model


@dataclass
class LinearModel:
    weights: np.ndarray  # (K, F) float32
    bias: np.ndarray  # (K,) float32

    def scores(self, images) -> np.ndarray:
        flat = np.asarray(images).reshape(len(images), -1)
        if flat.shape[1] != self.weights.shape[1]:
            raise ShapeMismatch(
                f"model expects {self.weights.shape[1]} features, got {flat.shape[1]}"
            )
        return flat @ self.weights.T + self.bias

    def predict(self, images) -> np.ndarray:
        return np.argmax(self.scores(images), axis=1)


def softmax(logits):
    shifted = logits - np.max(logits, axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=1, keepdims=True)


def loss_and_grad(weights, bias, inputs, soft_labels):
    """Mean softmax cross-entropy against soft labels plus its gradient.

    Uses the exact log-softmax form, so the loss only becomes non-finite
    when the logits themselves blow up. Works in whatever float dtype the
    arguments carry, so a float64 call can be checked against finite
    differences.
    """
    logits = inputs @ weights.T + bias
    shifted = logits - np.max(logits, axis=1, keepdims=True)
    log_probs = shifted - np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))
    loss = -np.mean(np.sum(soft_labels * log_probs, axis=1))
    dlogits = (np.exp(log_probs) - soft_labels) / len(inputs)
    grad_w = dlogits.T @ inputs
    grad_b = np.sum(dlogits, axis=0)
    return loss, grad_w, grad_b


def train(
    images,
    labels,
    cfg: AugmentConfig,
    epochs: int = 300,
    learning_rate: float = 0.05,
    batch_size: int = 32,
    rng=None,
    threads: int = 1,
) -> LinearModel:
    """Mini-batch gradient descent with the policy applied per batch.

    Deterministic given cfg.seed (shuffling and augmentation share one
    stream). Raises DivergedTraining on a non-finite loss.
    """
    images = np.asarray(images, dtype=np.float32)
    labels = np.asarray(labels, dtype=np.float32)
    if images.shape[0] != labels.shape[0]:
        raise ShapeMismatch("image/label batch sizes differ")
    if rng is None:
        rng = make_rng(cfg.seed)

    count = images.shape[0]
    features = int(np.prod(images.shape[1:]))
    classes = labels.shape[1]
    weights = np.zeros((classes, features), dtype=np.float32)
    bias = np.zeros(classes, dtype=np.float32)
    lr = float(learning_rate)

    for _ in range(epochs):
        order = rng.permutation(count)
        for start in range(0, count, batch_size):
            idx = order[start : start + batch_size]
            batch = apply_policy(images[idx], labels[idx], cfg, rng, threads)
            flat = batch.images.reshape(len(idx), -1)
            loss, grad_w, grad_b = loss_and_grad(weights, bias, flat, batch.labels)
            if not np.isfinite(loss):
                raise DivergedTraining(f"loss became {loss}")
            weights -= lr * grad_w
            bias -= lr * grad_b
    return LinearModel(weights, bias)


def evaluate(model: LinearModel, images, labels) -> float:
    """Fraction of argmax-correct predictions; ties go to the lowest index."""
    truth = np.asarray(labels)
    if truth.ndim == 2:
        truth = np.argmax(truth, axis=1)
    preds = model.predict(np.asarray(images, dtype=np.float32))
    if preds.shape[0] != truth.shape[0]:
        raise ShapeMismatch("image/label batch sizes differ")
    return float(np.mean(preds == truth))


# ---------------------------------------------------------------------------
# Checkpoints


def save_model(model: LinearModel, directory, manifest: dict) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_tensor(model.weights, d / "weights.rten")
    write_tensor(model.bias, d / "bias.rten")
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def load_model(directory):
    d = Path(directory)
    weights = read_tensor(d / "weights.rten")
    bias = read_tensor(d / "bias.rten")
    manifest = json.loads((d / "manifest.json").read_text())
    return LinearModel(weights, bias), manifest


# ---------------------------------------------------------------------------
# Policy comparison driver


def compare_policies(
    spec: SyntheticSpec,
    policies,
    seeds,
    alpha: float = 0.4,
    tau: float = 0.25,
    epochs: int = 300,
    learning_rate: float = 0.05,
    batch_size: int = 32,
    sweep_cutoffs=None,
    threads: int = 1,
):
    """Train each policy on a fresh dataset per seed and report test accuracy.

    Returns {policy: {"accuracies": [...], "mean": m, "std": s}} plus, when
    sweep_cutoffs is given, {"sweeps": {policy: mean accuracy per cutoff}}.
    """
    from .metrics import lowpass_accuracy_sweep  # local import, avoids cycle

    results = {p: {"accuracies": []} for p in policies}
    sweep_acc = {p: None for p in policies}
    for seed in seeds:
        dataset = generate_synthetic_dataset(replace(spec, seed=int(seed)))
        for policy in policies:
            cfg = AugmentConfig(policy=policy, alpha=alpha, tau=tau, seed=int(seed))
            model = train(
                dataset.train_images,
                dataset.train_labels,
                cfg,
                epochs=epochs,
                learning_rate=learning_rate,
                batch_size=batch_size,
                threads=threads,
            )
            acc = evaluate(model, dataset.test_images, dataset.test_labels)
            results[policy]["accuracies"].append(acc)
            if sweep_cutoffs is not None:
                curve = lowpass_accuracy_sweep(
                    model.scores,
                    dataset.test_images,
                    dataset.test_labels,
                    sweep_cutoffs,
                    threads=threads,
                )
                got = np.asarray(curve.accuracies)
                if sweep_acc[policy] is None:
                    sweep_acc[policy] = got
                else:
                    sweep_acc[policy] = sweep_acc[policy] + got

    for policy in policies:
        accs = results[policy]["accuracies"]
        results[policy]["mean"] = float(np.mean(accs))
        results[policy]["std"] = float(np.std(accs))
    out = {"policies": results}
    if sweep_cutoffs is not None:
        out["sweep_cutoffs"] = [float(c) for c in sweep_cutoffs]
        out["sweeps"] = {
            p: (sweep_acc[p] / len(seeds)).tolist() for p in policies
        }
    return out
