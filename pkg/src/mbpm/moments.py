"""Exact conditional moments of one transition.

With h(z) = E[M(z)] the mean migration adjustment, one step from z has

    E[Z' | z]   = m (z + h(z))
    Var[Z' | z] = (z + h(z)) (.) Sigma + m Var[M(z)] m^T

where (.) mixes a vector with the per-type offspring covariance matrices
(algebra.odot) and Var[M(z)] is diagonal because migration components are
independent across types.  The scalar variance of the weighted size u . Z'
is sigma2.  Everything here is closed-form; Monte Carlo appears only in
tests, as the independent check of these formulas.

Raw migration moments use that each component M_i is a three-way mixture:
0 with the no-migration probability, +I_i with the immigration
probability, -D_i with the emigration probability, so

    E[M_i^k] = q_i E[I_i^k] + (-1)^k r_i E[D_i^k].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import odot
from .model import MigrationSpec, ModelSpec, OffspringSpec


def offspring_moments(spec: OffspringSpec):
    """Mean matrix (column per parent type) and per-type covariance matrices."""
    return spec.mean_matrix(), spec.cov_tensor()


def _component_raw(comp, k: int, z, u, zi: int) -> float:
    """Raw moment E[M_i^k] of one component's migration adjustment."""
    _, pi, pe = comp.branch_probs(z, u, zi)
    out = 0.0
    if pi > 0.0:
        out += pi * comp.immigration.raw_moment(k, z, u)
    if pe > 0.0:
        sign = -1.0 if k % 2 else 1.0
        out += sign * pe * comp.emigration.raw_moment(k, zi)
    return out


def migration_mean(spec: MigrationSpec, z, u=None):
    """Mean migration adjustment h(z), one entry per type."""
    z = np.asarray(z, dtype=np.int64)
    return np.array(
        [
            _component_raw(comp, 1, z, u, int(z[i]))
            for i, comp in enumerate(spec.components)
        ]
    )


def migration_var(spec: MigrationSpec, z, u=None):
    """Covariance of M(z): diagonal under across-type independence."""
    z = np.asarray(z, dtype=np.int64)
    diag = []
    for i, comp in enumerate(spec.components):
        zi = int(z[i])
        m1 = _component_raw(comp, 1, z, u, zi)
        m2 = _component_raw(comp, 2, z, u, zi)
        diag.append(m2 - m1 * m1)
    return np.diag(diag)


def migration_kappa(spec: MigrationSpec, z, u=None):
    """Fourth central moments E[(M_i - h_i)^4], one entry per type."""
    z = np.asarray(z, dtype=np.int64)
    out = []
    for i, comp in enumerate(spec.components):
        zi = int(z[i])
        m1 = _component_raw(comp, 1, z, u, zi)
        m2 = _component_raw(comp, 2, z, u, zi)
        m3 = _component_raw(comp, 3, z, u, zi)
        m4 = _component_raw(comp, 4, z, u, zi)
        out.append(m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1**4)
    return np.array(out)


def migration_atoms(spec: MigrationSpec, i: int, z, u=None, tail: float = 1e-12):
    """Support and probabilities of component i's adjustment M_i at z.

    Used for exact fractional moments in the growth criteria.  Values are
    floats (they include negatives); probabilities may undershoot 1 by the
    enumeration tail of unbounded immigration supports.
    """
    z = np.asarray(z, dtype=np.int64)
    comp = spec.components[i]
    zi = int(z[i])
    pn, pi, pe = comp.branch_probs(z, u, zi)
    values = [np.zeros(1)]
    probs = [np.array([pn])]
    if pi > 0.0:
        iv, ip = comp.immigration.atoms(z, u, tail)
        values.append(iv.astype(float))
        probs.append(pi * ip)
    if pe > 0.0:
        dv, dp = comp.emigration.atoms(zi)
        values.append(-dv.astype(float))
        probs.append(pe * dp)
    return np.concatenate(values), np.concatenate(probs)


def cond_mean(spec: ModelSpec, z):
    """Conditional mean of the next state: m (z + h(z))."""
    z = np.asarray(z, dtype=np.int64)
    h = migration_mean(spec.migration, z, spec.size_weights())
    return spec.mean_matrix() @ (z + h)


def cond_var(spec: ModelSpec, z):
    """Conditional covariance of the next state."""
    z = np.asarray(z, dtype=np.int64)
    u = spec.size_weights()
    h = migration_mean(spec.migration, z, u)
    m = spec.mean_matrix()
    branching = odot(z + h, spec.cov_tensor())
    return branching + m @ migration_var(spec.migration, z, u) @ m.T


def sigma2(spec: ModelSpec, u, z) -> float:
    """Conditional variance of the weighted size u . Z' given Z = z.

    Under criticality (u^T m = u^T) this equals u^T cond_var u; the direct
    form below avoids the matrix products.
    """
    z = np.asarray(z, dtype=np.int64)
    u = np.asarray(u, dtype=float)
    h = migration_mean(spec.migration, z, u)
    inner = odot(z + h, spec.cov_tensor()) + migration_var(spec.migration, z, u)
    return float(u @ inner @ u)


@dataclass(frozen=True)
class MomentReport:
    """Exact one-step moment summary at a state."""

    z: np.ndarray
    h: np.ndarray
    cond_mean: np.ndarray
    cond_cov: np.ndarray
    varM: np.ndarray
    sigma2: float
    kappa: np.ndarray

    def to_dict(self) -> dict:
        return {
            "z": self.z.tolist(),
            "h": self.h.tolist(),
            "cond_mean": self.cond_mean.tolist(),
            "cond_cov": self.cond_cov.tolist(),
            "varM": self.varM.tolist(),
            "sigma2": self.sigma2,
            "kappa": self.kappa.tolist(),
        }


def moment_report(spec: ModelSpec, z, u=None) -> MomentReport:
    """All exact moment quantities at z in one bundle.

    ``u`` defaults to the spec's own left Perron weights when available;
    sigma2 needs some weight vector, so constant-migration specs on
    non-primitive mean matrices must pass one explicitly.
    """
    z = np.asarray(z, dtype=np.int64)
    if u is None:
        u = spec.size_weights()
    if u is None:
        try:
            u = spec.spectral().u
        except ValueError:
            u = np.full(spec.dim, 1.0 / spec.dim)
    mig = spec.migration
    return MomentReport(
        z=z.copy(),
        h=migration_mean(mig, z, u),
        cond_mean=cond_mean(spec, z),
        cond_cov=cond_var(spec, z),
        varM=migration_var(mig, z, u),
        sigma2=sigma2(spec, u, z),
        kappa=migration_kappa(mig, z, u),
    )
