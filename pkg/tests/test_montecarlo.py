"""Ensemble machinery, tail estimates, and the hand-rolled statistics."""
import math

import numpy as np
import pytest
import scipy.special
import scipy.stats

from mbpm import (
    Constant,
    DeterministicImmigration,
    DeterministicInitial,
    IndependentOffspring,
    MigrationComponent,
    MigrationSpec,
    ModelSpec,
    OffspringSpec,
    TableOffspring,
    ecdf,
    estimate_explosion,
    gamma_cdf,
    gof_report,
    ks_statistic,
    moment_check,
    normal_cdf,
    run_ensemble,
    simulate_path,
    stream_for,
    wilson_interval,
)


def deterministic_spec():
    """Each individual has exactly one child; +1 immigration every step."""
    offspring = OffspringSpec(
        laws=(IndependentOffspring(components=(TableOffspring(values=(1,), probs=(1.0,)),)),)
    )
    comp = MigrationComponent(
        prob_none=Constant(0.0),
        prob_imm=Constant(1.0),
        prob_em=Constant(0.0),
        immigration=DeterministicImmigration(value=1),
        emigration=None,
    )
    return ModelSpec(offspring, MigrationSpec(components=(comp,)),
                     DeterministicInitial(state=(1,)))


# ---------------------------------------------------------------------------
# seed streams and ensembles
# ---------------------------------------------------------------------------


def test_stream_for_reproducible():
    a = stream_for(123, 7).integers(0, 2**63, size=5)
    b = stream_for(123, 7).integers(0, 2**63, size=5)
    assert np.array_equal(a, b)
    c = stream_for(123, 8).integers(0, 2**63, size=5)
    assert not np.array_equal(a, c)


def test_stream_for_validation():
    with pytest.raises(ValueError):
        stream_for(-1, 0)
    with pytest.raises(ValueError):
        stream_for(0, 2**64)


def test_ensemble_matches_direct_simulation(gamma_spec):
    ens = run_ensemble(gamma_spec, n=40, R=3, master_seed=99)
    direct = simulate_path(gamma_spec, 40, stream_for(99, 1))
    assert np.array_equal(ens.terminal[1], direct.states[-1])


def test_ensemble_identical_across_worker_counts(gamma_spec):
    kw = dict(n=30, R=10, master_seed=17, store_paths=True)
    one = run_ensemble(gamma_spec, workers=1, **kw)
    two = run_ensemble(gamma_spec, workers=2, **kw)
    five = run_ensemble(gamma_spec, workers=5, **kw)
    assert np.array_equal(one.terminal, two.terminal)
    assert np.array_equal(one.terminal, five.terminal)
    assert np.array_equal(one.paths, five.paths)


def test_ensemble_paths_consistent(gamma_spec):
    ens = run_ensemble(gamma_spec, n=25, R=4, master_seed=5,
                       store_paths=True)
    assert ens.paths.shape == (4, 26, 1)
    assert np.array_equal(ens.paths[:, -1, :], ens.terminal)
    assert np.array_equal(ens.paths[:, 0, 0], np.ones(4))


def test_ensemble_deterministic_model():
    ens = run_ensemble(deterministic_spec(), n=10, R=5, master_seed=1)
    assert (ens.terminal == 11).all()  # 1 + one immigrant per step


def test_ensemble_summary_and_weighting(gamma_spec):
    ens = run_ensemble(gamma_spec, n=20, R=8, master_seed=2)
    s = ens.summary()
    assert s["replicates"] == 8
    assert s["n"] == 20
    assert "terminal_mean" in s and "fraction_null" in s
    w = ens.terminal_weighted(np.array([1.0]))
    assert w.shape == (8,)
    assert np.array_equal(w, ens.terminal[:, 0].astype(float))


# ---------------------------------------------------------------------------
# explosion probability
# ---------------------------------------------------------------------------


def test_estimate_explosion_pure_death(pure_death_spec):
    ens = run_ensemble(pure_death_spec, n=20, R=100, master_seed=3)
    est = estimate_explosion(ens, K=10.0)
    assert est.value == 0.0
    assert est.low == 0.0
    assert est.high < 0.05


def test_estimate_explosion_monotone_in_threshold(gamma_spec):
    ens = run_ensemble(gamma_spec, n=100, R=200, master_seed=4)
    ks = [10.0, 100.0, 300.0, 1e6]
    points = [estimate_explosion(ens, K=k).value for k in ks]
    assert all(a >= b for a, b in zip(points, points[1:]))
    assert points[-1] == 0.0


def test_estimate_explosion_validation(gamma_spec):
    ens = run_ensemble(gamma_spec, n=10, R=10, master_seed=5)
    with pytest.raises(ValueError):
        estimate_explosion(ens, K=-1.0)


def test_wilson_interval_hand_values():
    low, high = wilson_interval(5, 10)
    assert low == pytest.approx(0.2366, abs=2e-4)
    assert high == pytest.approx(0.7634, abs=2e-4)
    low0, high0 = wilson_interval(0, 50)
    assert low0 == 0.0 and high0 > 0.0
    low1, high1 = wilson_interval(50, 50)
    assert high1 == 1.0 and low1 < 1.0


# ---------------------------------------------------------------------------
# empirical distribution helpers
# ---------------------------------------------------------------------------


def test_ecdf_right_continuous():
    f = ecdf(np.array([1.0, 2.0, 2.0, 3.0]))
    assert f(0.5) == 0.0
    assert f(1.0) == 0.25
    assert f(1.999) == 0.25
    assert f(2.0) == 0.75
    assert f(10.0) == 1.0
    out = f(np.array([1.0, 2.0]))
    assert np.allclose(out, [0.25, 0.75])


def test_ks_statistic_single_point():
    d = ks_statistic(np.array([0.5]), lambda x: np.clip(x, 0.0, 1.0))
    assert d == pytest.approx(0.5)


def test_ks_statistic_ideal_quantiles():
    n = 100
    sample = (np.arange(n) + 0.5) / n
    d = ks_statistic(sample, lambda x: np.clip(x, 0.0, 1.0))
    assert d == pytest.approx(0.5 / n)


def test_ks_statistic_disjoint_support():
    d = ks_statistic(np.array([-5.0, -4.0]), lambda x: gamma_cdf(x, 2.0, 1.0))
    assert d == pytest.approx(1.0)


def test_ks_statistic_brute_force_agreement():
    rng = np.random.default_rng(21)
    for _ in range(100):
        n = int(rng.integers(1, 50))
        sample = rng.normal(size=n)
        d = ks_statistic(sample, lambda x: normal_cdf(x))
        xs = np.sort(sample)
        fe = ecdf(sample)
        grid = np.concatenate([xs, xs - 1e-9, [-10.0, 10.0]])
        brute = np.abs(fe(grid) - normal_cdf(grid)).max()
        assert d >= brute - 1e-9
        i = np.arange(1, n + 1)
        fx = normal_cdf(xs)
        exact = max((i / n - fx).max(), (fx - (i - 1) / n).max())
        assert d == pytest.approx(exact, abs=1e-12)


def test_ks_statistic_against_scipy():
    rng = np.random.default_rng(22)
    sample = rng.gamma(shape=3.0, scale=2.0, size=500)
    ours = ks_statistic(sample, lambda x: gamma_cdf(x, 3.0, 2.0))
    theirs = scipy.stats.kstest(sample, scipy.stats.gamma(a=3.0, scale=2.0).cdf)
    assert ours == pytest.approx(theirs.statistic, abs=1e-12)


# ---------------------------------------------------------------------------
# hand-rolled distribution functions
# ---------------------------------------------------------------------------


def test_normal_cdf_values():
    assert normal_cdf(0.0) == pytest.approx(0.5)
    assert normal_cdf(1.959963984540054) == pytest.approx(0.975, abs=1e-9)
    grid = np.linspace(-8.0, 8.0, 401)
    assert np.abs(normal_cdf(grid) - scipy.stats.norm.cdf(grid)).max() < 1e-12


def test_gamma_cdf_special_cases():
    assert gamma_cdf(0.0, 2.0, 1.0) == 0.0
    assert gamma_cdf(-3.0, 2.0, 1.0) == 0.0
    # shape 1 is the exponential law
    assert gamma_cdf(1.0, 1.0, 1.0) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)


def test_gamma_cdf_against_scipy():
    shapes = [0.3, 1.0, 2.5, 4.0, 10.0, 50.0]
    scales = [0.5, 1.0, 2.0]
    for a in shapes:
        for s in scales:
            x = np.linspace(0.0, a * s * 5, 200)
            ours = gamma_cdf(x, a, s)
            theirs = scipy.special.gammainc(a, x / s)
            assert np.abs(ours - theirs).max() < 1e-10, (a, s)


def test_gof_report_fields(gamma_spec):
    rng = np.random.default_rng(23)
    sample = rng.gamma(shape=4.0, scale=0.5, size=2000)
    rep = gof_report(sample, lambda x: gamma_cdf(x, 4.0, 0.5), "gamma",
                     {"shape": 4.0, "scale": 0.5}, threshold=0.05)
    assert rep.passed
    assert rep.statistic == "ks"
    assert rep.value < 0.05
    assert rep.reference == "gamma"
    bad = gof_report(sample, lambda x: gamma_cdf(x, 1.0, 1.0), "gamma",
                     {"shape": 1.0, "scale": 1.0}, threshold=0.05)
    assert not bad.passed


# ---------------------------------------------------------------------------
# one-step moment verification
# ---------------------------------------------------------------------------


def test_moment_check_deterministic_model():
    rep = moment_check(deterministic_spec(), np.array([5]), N=10_000, seed=6)
    assert rep.passed
    assert rep.max_mean_sigmas == 0.0


def test_moment_check_rejects_tiny_samples(gamma_spec):
    with pytest.raises(ValueError):
        moment_check(gamma_spec, np.array([5]), N=100, seed=7)


def test_moment_check_detects_wrong_model(gamma_spec, sqrt_spec):
    # check the gamma model's samples against the sqrt model's moments
    from mbpm import cond_mean, sample_step_batch

    z = np.array([100])
    batch = sample_step_batch(gamma_spec, z, 100_000, stream_for(8, 0))
    wrong = cond_mean(sqrt_spec, z)
    se = math.sqrt(batch.var() / len(batch))
    assert abs(batch.mean() - wrong[0]) > 10 * se
