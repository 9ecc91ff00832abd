import numpy as np
import pytest

from qrzero.model import ConfigurationError
from qrzero.simstudy import SimSpec, generate, run_replication, run_study
from qrzero.stochastic import make_rng


def test_huge_zero_intercept_gives_only_true_zeros():
    spec = SimSpec(n=300, gamma_true=(50.0, 0.0, 0.0))
    data, true_c = generate(spec, make_rng(1))
    assert np.all(data.y == 0)
    assert true_c.sum() == 0


def test_large_location_removes_censoring():
    spec = SimSpec(n=2000, beta_true=(20.0, 0.0, 1.5))
    data, true_c = generate(spec, make_rng(2))
    assert true_c.sum() == 0
    assert np.all(data.y[data.y > 0] > 10)


def test_true_zero_fraction_default_design():
    # z'gamma = 10 (x1 - x2) is symmetric around 0 for uniform covariates
    spec = SimSpec(n=20_000)
    data, true_c = generate(spec, make_rng(3))
    true_zero = (data.y == 0) & (true_c == 0)
    assert abs(true_zero.mean() - 0.5) < 0.05
    # censored zeros only come from the continuous part
    assert np.all(data.y[true_c == 1] == 0)


def test_generate_replays():
    spec = SimSpec(n=50)
    a, ca = generate(spec, make_rng(9, (0, 0)))
    b, cb = generate(spec, make_rng(9, (0, 0)))
    np.testing.assert_array_equal(a.y, b.y)
    np.testing.assert_array_equal(ca, cb)


def test_single_replication_smoke():
    spec = SimSpec(n=120, replications=1, iters=300, burnin=100, taus=(0.5,))
    rows = run_replication(spec, 0)
    assert len(rows) == 1
    r = rows[0]
    assert r.tau == 0.5 and len(r.beta_mean) == 3 and len(r.gamma_mean) == 3
    assert 0 <= r.zeta_c <= 1 and 0 <= r.zeta_d <= 1
    assert 0 < r.zero_fraction < 1


def test_study_rows_and_determinism():
    spec = SimSpec(n=80, replications=2, iters=150, burnin=50, taus=(0.25, 0.75))
    a = run_study(spec)
    b = run_study(spec)
    assert [(r.replication, r.tau) for r in a] == [(0, 0.25), (0, 0.75), (1, 0.25), (1, 0.75)]
    assert a == b


@pytest.mark.parametrize("bad", [
    {"n": 0},
    {"gamma_true": [0.0, 1.0]},
    {"noise_sd": -1.0},
    {"taus": [1.5]},
    {"replications": 0},
    {"covariate_low": 1.0, "covariate_high": 0.0},
    {"nonsense": 1},
])
def test_spec_validation(bad):
    with pytest.raises((ConfigurationError, ValueError)):
        SimSpec.from_dict(bad)


def test_spec_dict_round_trip():
    spec = SimSpec(n=10, taus=(0.3,))
    assert SimSpec.from_dict(spec.to_dict()) == spec
