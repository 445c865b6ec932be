"""Reproducible ensembles and the statistics used by the experiment suites.

Replicate r of an ensemble draws from a counter-based generator keyed by
(master_seed, r), so results are bit-identical however the replicates are
scheduled across workers.  On top of the ensembles sit the estimators the
suites share: explosion probabilities with binomial confidence intervals,
empirical CDFs, the Kolmogorov-Smirnov sup-distance, reference gamma and
normal CDFs accurate to 1e-10, and a one-step moment checker that compares
empirical means and covariances against the exact formulas.

KS thresholds are deliberately experiment-level constants rather than
p-values: the sampled laws are only asymptotically the reference laws, so
a classical test would reject at large R no matter what.  A threshold
encodes "as close as the asymptotics promise at this horizon".
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import ModelSpec, simulate_path, spec_digest, spec_from_dict, spec_to_dict
from .moments import cond_mean, cond_var

_Z95 = 1.959963984540054  # two-sided 95% normal quantile
_EPS_GUARD = 1e-12


def stream_for(master_seed: int, replicate: int):
    """The generator for one replicate: counter-based, keyed, overlap-free."""
    if not 0 <= master_seed < 2**64:
        raise ValueError("master_seed must be an integer in [0, 2**64)")
    if not 0 <= replicate < 2**64:
        raise ValueError("replicate must be an integer in [0, 2**64)")
    key = np.array([master_seed, replicate], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class Ensemble:
    """Replicated trajectories of one model, regenerable from the seed."""

    spec_digest: str
    n: int
    replicates: int
    master_seed: int
    terminal: np.ndarray  # (R, p) int64
    paths: Optional[np.ndarray] = None  # (R, n+1, p) int64 when stored
    build_seconds: float = 0.0

    def terminal_weighted(self, u):
        """Scalar reduction u . Z_n per replicate."""
        return self.terminal @ np.asarray(u, dtype=float)

    def summary(self) -> dict:
        norms = np.abs(self.terminal).sum(axis=1)
        return {
            "spec_digest": self.spec_digest,
            "n": self.n,
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "terminal_mean": self.terminal.mean(axis=0).tolist(),
            "terminal_l1_median": float(np.median(norms)),
            "terminal_l1_max": int(norms.max()),
            "fraction_null": float((norms == 0).mean()),
            "build_seconds": self.build_seconds,
        }


def _simulate_block(args):
    doc, n, master_seed, lo, hi, store_paths = args
    spec = spec_from_dict(doc)
    term = np.empty((hi - lo, spec.dim), dtype=np.int64)
    paths = np.empty((hi - lo, n + 1, spec.dim), dtype=np.int64) if store_paths else None
    for r in range(lo, hi):
        traj = simulate_path(spec, n, stream_for(master_seed, r), stream=(master_seed, r))
        term[r - lo] = traj.states[-1]
        if store_paths:
            paths[r - lo] = traj.states
    return lo, term, paths


def run_ensemble(
    spec: ModelSpec,
    n: int,
    R: int,
    master_seed: int,
    store_paths: bool = False,
    workers: Optional[int] = None,
) -> Ensemble:
    """R independent trajectories of length n, merged by replicate index.

    workers defaults to the MBPM_WORKERS environment variable (1 when
    unset).  Any worker count yields the same ensemble bit for bit.
    """
    if R < 1:
        raise ValueError("need at least one replicate")
    if workers is None:
        workers = int(os.environ.get("MBPM_WORKERS", "1"))
    workers = max(1, min(workers, R))
    t0 = time.perf_counter()
    doc = spec_to_dict(spec)

    bounds = np.linspace(0, R, workers + 1).astype(int)
    jobs = [
        (doc, n, master_seed, int(lo), int(hi), store_paths)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    terminal = np.empty((R, spec.dim), dtype=np.int64)
    paths = np.empty((R, n + 1, spec.dim), dtype=np.int64) if store_paths else None
    if len(jobs) == 1:
        results = [_simulate_block(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_simulate_block, jobs))
    for lo, term_block, path_block in results:
        terminal[lo : lo + term_block.shape[0]] = term_block
        if store_paths:
            paths[lo : lo + path_block.shape[0]] = path_block

    return Ensemble(
        spec_digest=spec_digest(spec),
        n=n,
        replicates=R,
        master_seed=master_seed,
        terminal=terminal,
        paths=paths,
        build_seconds=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class ProbabilityEstimate:
    """A binomial fraction with its 95% Wilson confidence interval."""

    value: float
    low: float
    high: float
    successes: int
    trials: int
    threshold: float

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "ci95": [self.low, self.high],
            "successes": self.successes,
            "trials": self.trials,
            "threshold": self.threshold,
        }


def wilson_interval(successes: int, trials: int, z: float = _Z95):
    """95% score interval for a binomial proportion (no continuity correction)."""
    if trials < 1:
        raise ValueError("need at least one trial")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4 * trials * trials)) / denom
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


def estimate_explosion(ensemble: Ensemble, K: float) -> ProbabilityEstimate:
    """Fraction of replicates whose terminal l1 norm exceeds K."""
    if K < 0:
        raise ValueError("threshold must be nonnegative")
    norms = np.abs(ensemble.terminal).sum(axis=1)
    hits = int((norms > K).sum())
    low, high = wilson_interval(hits, ensemble.replicates)
    return ProbabilityEstimate(
        value=hits / ensemble.replicates,
        low=low,
        high=high,
        successes=hits,
        trials=ensemble.replicates,
        threshold=float(K),
    )


def ecdf(sample) -> Callable:
    """Right-continuous empirical CDF of the sample, usable as a reference law."""
    xs = np.sort(np.asarray(sample, dtype=float))
    if xs.size == 0:
        raise ValueError("empty sample")

    def F(x):
        return np.searchsorted(xs, x, side="right") / xs.size

    return F


def ks_statistic(sample, cdf: Callable) -> float:
    """Sup-distance between the sample's empirical CDF and a reference CDF.

    Both one-sided gaps are evaluated at the order statistics:
    max(i/n - F(x_i), F(x_i) - (i-1)/n).
    """
    xs = np.sort(np.asarray(sample, dtype=float))
    n = xs.size
    if n == 0:
        raise ValueError("empty sample")
    try:
        F = np.asarray(cdf(xs), dtype=float)
        if F.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        F = np.array([float(cdf(x)) for x in xs])
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def normal_cdf(x) -> float:
    """Standard normal distribution function via the complementary error function."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * np.vectorize(math.erfc)(-x / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def _lower_gamma_series(a: float, x: float) -> float:
    # P(a, x) by the ascending series, valid and fast for x < a + 1
    term = 1.0 / a
    total = term
    n = 0
    while True:
        n += 1
        term *= x / (a + n)
        total += term
        if abs(term) < abs(total) * 1e-16 or n > 10_000:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_gamma_cf(a: float, x: float) -> float:
    # Q(a, x) by the continued fraction (modified Lentz), for x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def _reg_lower_gamma(a: float, x: float) -> float:
    if x < 0.0:
        raise ValueError("gamma CDF argument must be nonnegative")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return min(1.0, _lower_gamma_series(a, x))
    return min(1.0, max(0.0, 1.0 - _upper_gamma_cf(a, x)))


def gamma_cdf(x, shape: float, scale: float):
    """Gamma distribution function: regularized lower incomplete gamma of x/scale."""
    if shape <= 0.0 or scale <= 0.0:
        raise ValueError("shape and scale must be positive")
    x = np.asarray(x, dtype=float)
    flat = np.clip(x, 0.0, None) / scale
    out = np.vectorize(lambda t: _reg_lower_gamma(shape, t))(flat)
    out = np.where(x < 0.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GoFReport:
    """One goodness-of-fit comparison against a reference law."""

    statistic: str
    value: float
    sample_size: int
    reference: str
    params: dict
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "value": self.value,
            "sample_size": self.sample_size,
            "reference": self.reference,
            "params": self.params,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def gof_report(sample, cdf: Callable, reference: str, params: dict, threshold: float) -> GoFReport:
    d = ks_statistic(sample, cdf)
    return GoFReport(
        statistic="ks",
        value=d,
        sample_size=len(sample),
        reference=reference,
        params=dict(params),
        threshold=threshold,
        passed=bool(d <= threshold),
    )


@dataclass(frozen=True)
class MomentCheckReport:
    """One-step empirical moments against the exact formulas, with 4 SE bands."""

    z: np.ndarray
    n_samples: int
    mean_exact: np.ndarray
    mean_empirical: np.ndarray
    mean_se: np.ndarray
    cov_exact: np.ndarray
    cov_empirical: np.ndarray
    cov_se: np.ndarray
    max_mean_sigmas: float
    max_cov_sigmas: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "z": np.asarray(self.z).tolist(),
            "n_samples": self.n_samples,
            "mean_exact": self.mean_exact.tolist(),
            "mean_empirical": self.mean_empirical.tolist(),
            "mean_se": self.mean_se.tolist(),
            "cov_exact": self.cov_exact.tolist(),
            "cov_empirical": self.cov_empirical.tolist(),
            "cov_se": self.cov_se.tolist(),
            "max_mean_sigmas": self.max_mean_sigmas,
            "max_cov_sigmas": self.max_cov_sigmas,
            "passed": self.passed,
        }


def moment_check(
    spec: ModelSpec, z, N: int = 1_000_000, seed: int = 0, batches: int = 100
) -> MomentCheckReport:
    """Compare N one-step samples against the exact mean and covariance.

    Mean bands use the exact covariance (known, not estimated).  Covariance
    entry bands come from batch means: the N samples are cut into
    `batches` blocks, the per-block sample covariances give the spread of
    the full-sample estimate.  Pass iff every entry is within 4 SE (plus a
    tiny absolute guard so exact-zero-variance models compare equal).
    """
    from .model import sample_step_batch

    if N < 10_000:
        raise ValueError("moment_check needs at least 1e4 samples")
    z = np.asarray(z, dtype=np.int64)
    rng = stream_for(seed, 0)
    batch = sample_step_batch(spec, z, N, rng).astype(float)

    mean_exact = cond_mean(spec, z)
    cov_exact = cond_var(spec, z)
    mean_emp = batch.mean(axis=0)
    mean_se = np.sqrt(np.clip(np.diag(cov_exact), 0.0, None) / N)

    cov_emp = np.atleast_2d(np.cov(batch, rowvar=False, ddof=1))
    block = N // batches
    p = spec.dim
    per_block = np.empty((batches, p, p))
    for b in range(batches):
        seg = batch[b * block : (b + 1) * block]
        per_block[b] = np.atleast_2d(np.cov(seg, rowvar=False, ddof=1))
    cov_se = per_block.std(axis=0, ddof=1) / math.sqrt(batches)

    mean_gap = np.abs(mean_emp - mean_exact)
    cov_gap = np.abs(cov_emp - cov_exact)
    mean_sigmas = float(np.max(mean_gap / (mean_se + _EPS_GUARD)))
    cov_sigmas = float(np.max(cov_gap / (cov_se + _EPS_GUARD)))
    passed = bool(
        (mean_gap <= 4.0 * mean_se + _EPS_GUARD).all()
        and (cov_gap <= 4.0 * cov_se + _EPS_GUARD).all()
    )
    return MomentCheckReport(
        z=z,
        n_samples=N,
        mean_exact=mean_exact,
        mean_empirical=mean_emp,
        mean_se=mean_se,
        cov_exact=cov_exact,
        cov_empirical=cov_emp,
        cov_se=cov_se,
        max_mean_sigmas=mean_sigmas,
        max_cov_sigmas=cov_sigmas,
        passed=passed,
    )
