import numpy as np
import pytest

from bandmix import make_rng, sample_beta, sample_cutoff, sample_draw, split_rng
from bandmix.errors import InvalidAlpha, InvalidTau

from oracles import beta_symmetric_cdf, ks_distance

N_DRAWS = 100_000
# asymptotic KS critical value at significance 0.01
KS_CRIT_01 = 1.628 / np.sqrt(N_DRAWS)


def draws(fn, n=N_DRAWS, seed=42):
    rng = make_rng(seed)
    return np.array([fn(rng) for _ in range(n)])


def test_same_seed_same_sequence():
    a = [sample_draw(0.2, 0.0, make_rng(7)) for _ in range(3)]
    b = [sample_draw(0.2, 0.0, make_rng(7)) for _ in range(3)]
    assert a[0] == b[0]
    seq_a = make_rng(7)
    seq_b = make_rng(7)
    for _ in range(50):
        assert sample_beta(0.4, seq_a) == sample_beta(0.4, seq_b)


def test_split_streams_differ():
    rng = make_rng(1)
    kids = split_rng(rng, 3)
    vals = [sample_beta(1.0, k) for k in kids]
    assert len(set(vals)) == 3


def test_invalid_alpha():
    with pytest.raises(InvalidAlpha):
        sample_beta(0.0, make_rng(0))
    with pytest.raises(InvalidAlpha):
        sample_beta(-1.0, make_rng(0))


def test_invalid_tau():
    with pytest.raises(InvalidTau):
        sample_cutoff(-0.01, make_rng(0))
    with pytest.raises(InvalidTau):
        sample_cutoff(1.01, make_rng(0))


def test_beta_support_and_symmetry():
    for alpha in (0.2, 1.0, 3.0):
        xs = draws(lambda r: sample_beta(alpha, r), n=20_000, seed=int(alpha * 10))
        assert xs.min() >= 0.0 and xs.max() <= 1.0
        assert abs(xs.mean() - 0.5) < 0.01


def test_beta_alpha1_is_uniform():
    # Beta(1,1) = U(0,1): KS goodness of fit at significance 0.01
    xs = draws(lambda r: sample_beta(1.0, r))
    assert ks_distance(xs, xs) < KS_CRIT_01


@pytest.mark.parametrize("alpha", [0.2, 0.4, 1.0])
def test_beta_matches_quadrature_cdf(alpha):
    xs = draws(lambda r: sample_beta(alpha, r))
    d = ks_distance(xs, beta_symmetric_cdf(xs, alpha))
    assert d < 0.01


def test_cutoff_tau_one_pins_to_one():
    rng = make_rng(3)
    assert all(sample_cutoff(1.0, rng) == 1.0 for _ in range(100))


def test_cutoff_tau_zero_mean():
    xs = draws(lambda r: sample_cutoff(0.0, r))
    assert abs(xs.mean() - 0.5) < 0.01


def test_cutoff_respects_minimum():
    xs = draws(lambda r: sample_cutoff(0.1, r))
    assert xs.min() >= 0.1
    assert xs.max() <= 1.0


def test_draw_order_and_ranges():
    # lambda_low, lambda_high, then cutoff, from one stream
    rng = make_rng(9)
    ref = (sample_beta(0.3, rng), sample_beta(0.3, rng), sample_cutoff(0.2, rng))
    d = sample_draw(0.3, 0.2, make_rng(9))
    assert (d.lambda_low, d.lambda_high, d.cutoff) == ref
    assert d.energy_weight is None
    assert 0.0 <= d.lambda_low <= 1.0 and 0.0 <= d.lambda_high <= 1.0
    assert 0.2 <= d.cutoff <= 1.0


def test_draws_are_python_floats():
    d = sample_draw(0.5, 0.0, make_rng(2))
    assert type(d.lambda_low) is float
    assert type(d.cutoff) is float
