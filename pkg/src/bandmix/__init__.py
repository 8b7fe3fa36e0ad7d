"""Frequency-band mixup augmentation engine with spectral robustness metrics."""

__version__ = "0.1.0"

from .augment import (
    AugmentConfig,
    MixedBatch,
    POLICIES,
    apply_policy,
    mix,
    mixup_batch,
    robustmix_batch,
    robustmix_no_energy_weight_batch,
    robustmix_no_inband_mix_batch,
)
from .dct import DctPlan, dct2d, flop_estimate, get_plan, idct2d, make_plan
from .filters import (
    band_energy_fraction,
    band_mask,
    band_split,
    high_pass,
    keep_count,
    low_pass,
)
from .metrics import (
    CorruptionTable,
    EnergyCurve,
    SweepCurve,
    corruption_error,
    cumulative_energy_curve,
    lowpass_accuracy_sweep,
    mean_corruption_error,
    read_corruption_table,
    shape_bias,
    write_corruption_table,
)
from .sampling import RobustmixDraw, make_rng, sample_beta, sample_cutoff, sample_draw, split_rng
from .tensor_io import read_image, read_tensor, write_image, write_tensor
from .toy import (
    LinearModel,
    SyntheticDataset,
    SyntheticSpec,
    compare_policies,
    evaluate,
    generate_synthetic_dataset,
    load_model,
    save_model,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
