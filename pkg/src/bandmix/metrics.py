"""Robustness measurement formulas and curve sweeps.

Corruption error for one corruption is the model's error summed over
severities, normalized by a reference model's summed error, times 100; the
mean over corruptions is the mCE. Shape bias is correct-shape decisions over
correct-shape plus correct-texture decisions. Both calculators take
externally produced error tables, CSV schema
``corruption,severity,model_error,ref_error``.

Curves are emitted as two-column CSV ``cutoff,value``.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyTable,
    LengthMismatch,
    MalformedTable,
    NoCorrectDecisions,
    ShapeMismatch,
    ZeroReference,
)
from .filters import _as_planes, _energy_profile, _forward, _fraction_at, keep_count, low_pass, _square_extent
from .dct import _resolve

TABLE_HEADER = ["corruption", "severity", "model_error", "ref_error"]


@dataclass
class CorruptionRow:
    corruption: str
    severity: int
    model_error: float
    ref_error: float


@dataclass
class CorruptionTable:
    """Per-corruption, per-severity error rates with matching reference errors."""

    rows: list[CorruptionRow] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for r in self.rows:
            key = (r.corruption, r.severity)
            if key in seen:
                raise MalformedTable(f"duplicate entry for {key}")
            seen.add(key)
            if not 0.0 <= r.model_error <= 1.0:
                raise MalformedTable(
                    f"model error {r.model_error} for {key} outside [0, 1]"
                )
            if not 0.0 < r.ref_error <= 1.0:
                raise MalformedTable(
                    f"reference error {r.ref_error} for {key} outside (0, 1]"
                )

    def corruptions(self) -> list[str]:
        names = []
        for r in self.rows:
            if r.corruption not in names:
                names.append(r.corruption)
        return names

    def errors_for(self, corruption: str):
        rows = sorted(
            (r for r in self.rows if r.corruption == corruption),
            key=lambda r: r.severity,
        )
        model = [r.model_error for r in rows]
        ref = [r.ref_error for r in rows]
        return model, ref


def corruption_error(model_errors, ref_errors) -> float:
    """100 * sum(model errors) / sum(reference errors) over severities."""
    model = [float(v) for v in model_errors]
    ref = [float(v) for v in ref_errors]
    if len(model) != len(ref):
        raise LengthMismatch(f"{len(model)} model errors vs {len(ref)} reference")
    if len(model) == 0:
        raise LengthMismatch("no severities given")
    ref_sum = math.fsum(ref)
    if ref_sum <= 0.0:
        raise ZeroReference("reference error sum must be positive")
    return 100.0 * math.fsum(model) / ref_sum


def mean_corruption_error(table: CorruptionTable) -> float:
    """Unweighted mean of per-corruption errors."""
    names = table.corruptions()
    if not names:
        raise EmptyTable("table has no corruptions")
    ces = [corruption_error(*table.errors_for(name)) for name in names]
    return math.fsum(ces) / len(ces)


def shape_bias(correct_shape: int, correct_texture: int) -> float:
    """correct shapes / (correct shapes + correct textures)."""
    if correct_shape < 0 or correct_texture < 0:
        raise NoCorrectDecisions("counts must be nonnegative")
    total = correct_shape + correct_texture
    if total == 0:
        raise NoCorrectDecisions("no correct shape or texture decisions")
    return correct_shape / total


# ---------------------------------------------------------------------------
# CSV


def read_corruption_table(path) -> CorruptionTable:
    with open(path, newline="") as f:
        return parse_corruption_table(f)


def parse_corruption_table(f) -> CorruptionTable:
    reader = csv.reader(f)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedTable("empty file") from None
    if [h.strip() for h in header] != TABLE_HEADER:
        raise MalformedTable(f"header {header} != {TABLE_HEADER}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != 4:
            raise MalformedTable(f"line {lineno}: expected 4 fields, got {len(rec)}")
        try:
            rows.append(
                CorruptionRow(rec[0], int(rec[1]), float(rec[2]), float(rec[3]))
            )
        except ValueError as e:
            raise MalformedTable(f"line {lineno}: {e}") from None
    return CorruptionTable(rows)


def write_corruption_table(table: CorruptionTable, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(TABLE_HEADER)
        for r in table.rows:
            w.writerow(
                [r.corruption, r.severity, repr(float(r.model_error)), repr(float(r.ref_error))]
            )


def curve_to_csv(cutoffs, values) -> str:
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(["cutoff", "value"])
    for c, v in zip(cutoffs, values):
        w.writerow([repr(float(c)), repr(float(v))])
    return out.getvalue()


# ---------------------------------------------------------------------------
# Curves


@dataclass(frozen=True)
class EnergyCurve:
    cutoffs: tuple
    fractions: tuple

    def to_csv(self) -> str:
        return curve_to_csv(self.cutoffs, self.fractions)


@dataclass(frozen=True)
class SweepCurve:
    cutoffs: tuple
    accuracies: tuple

    def to_csv(self) -> str:
        return curve_to_csv(self.cutoffs, self.accuracies)


def _check_cutoff_grid(cutoffs):
    cutoffs = [float(c) for c in cutoffs]
    if not cutoffs:
        raise ValueError("need at least one cutoff")
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError(f"cutoffs must be strictly increasing, got {cutoffs}")
    return cutoffs


def cumulative_energy_curve(corpus, cutoffs, plan=None) -> EnergyCurve:
    """Pooled low-band energy fraction of a corpus at each cutoff.

    All corpus tensors must share one square plane size. The spectra are
    computed once; fractions are exactly nondecreasing with endpoints 0 at
    cutoff 0 and 1 at cutoff 1.
    """
    cutoffs = _check_cutoff_grid(cutoffs)
    if not corpus:
        raise EmptyTable("empty corpus")
    stacks = []
    for t in corpus:
        planes, _ = _as_planes(np.asarray(t, dtype=np.float32))
        stacks.append(planes)
    n = _square_extent(stacks[0])
    for planes in stacks[1:]:
        if planes.shape[-2:] != (n, n):
            raise ShapeMismatch("corpus mixes plane sizes")
    planes = np.concatenate(stacks, axis=0)
    plan = _resolve(plan, n)
    spectra = _forward(planes, plan, 1)
    profile = _energy_profile(spectra)
    fractions = [_fraction_at(profile, keep_count(n, c)) for c in cutoffs]
    return EnergyCurve(tuple(cutoffs), tuple(fractions))


def accuracy(scores, labels) -> float:
    """Argmax accuracy; ties resolve to the lowest class index."""
    scores = np.asarray(scores)
    truth = np.asarray(labels)
    if truth.ndim == 2:
        truth = np.argmax(truth, axis=1)
    if scores.shape[0] != truth.shape[0]:
        raise ShapeMismatch(f"{scores.shape[0]} scores vs {truth.shape[0]} labels")
    return float(np.mean(np.argmax(scores, axis=1) == truth))


def lowpass_accuracy_sweep(
    predict, images, labels, cutoffs, plan=None, threads: int = 1
) -> SweepCurve:
    """Accuracy of ``predict`` on low-pass filtered inputs at each cutoff.

    ``predict`` maps an image batch to per-class scores. The all-pass cutoff
    feeds the unfiltered batch through, so the accuracy there is the clean
    accuracy, prediction for prediction.
    """
    cutoffs = _check_cutoff_grid(cutoffs)
    images = np.asarray(images, dtype=np.float32)
    accs = []
    for c in cutoffs:
        filtered = low_pass(images, c, plan, threads)
        accs.append(accuracy(predict(filtered), labels))
    return SweepCurve(tuple(cutoffs), tuple(accs))
