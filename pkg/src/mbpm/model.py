"""Model specification and sampling.

A model couples three ingredients: per-type offspring laws, a per-type
migration component (no change / immigration / emigration with
state-dependent probabilities), and an initial law.  One step from state z
draws the migration adjustment M, then sums z_i + M_i independent
offspring vectors of each type i:

    Z' = sum_i sum_{j <= z_i + M_i} X_{j,i}

Emigration is only possible from types with a positive count (the branch
is folded into "no migration" at z_i = 0, where removing is a no-op), so
states never leave the nonnegative orthant.

The mean matrix convention is column-per-parent: mean_matrix()[i, j] is
the expected number of type-i children of one type-j parent, and the
conditional mean acts as a left matrix product.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import algebra
from .laws import (
    BernoulliOffspring,
    Clamp,
    Constant,
    DeterministicEmigration,
    DeterministicImmigration,
    EmigrationLaw,
    FiniteOffspring,
    GeometricOffspring,
    ImmigrationLaw,
    IndependentOffspring,
    InverseCubeEmigration,
    OffspringLaw,
    PoissonOffspring,
    Power,
    ShiftedPoissonImmigration,
    StateFunction,
    Table,
    TableImmigration,
    TableOffspring,
    TruncatedGeometricEmigration,
    UniformEmigration,
)


class SpecFormatError(ValueError):
    """Malformed specification document; ``field`` names the offending entry."""

    def __init__(self, field_path: str, message: str):
        self.field = field_path
        super().__init__(f"{field_path}: {message}")


_PROB_TOL = 1e-12


@dataclass(frozen=True)
class OffspringSpec:
    """One joint offspring law per parent type."""

    laws: tuple

    def __post_init__(self):
        p = len(self.laws)
        if p == 0:
            raise ValueError("offspring spec needs at least one type")
        for i, law in enumerate(self.laws):
            if law.dim != p:
                raise ValueError(
                    f"offspring law for type {i} produces {law.dim}-vectors "
                    f"in a {p}-type model"
                )

    @property
    def dim(self) -> int:
        return len(self.laws)

    def mean_matrix(self):
        # column j = mean children vector of a type-j parent
        return np.stack([law.mean_vec() for law in self.laws], axis=1)

    def cov_tensor(self):
        # cov_tensor()[i] = covariance of the children vector of a type-i parent
        return np.stack([law.cov() for law in self.laws], axis=0)


@dataclass(frozen=True)
class MigrationComponent:
    """Migration behaviour of one type: nothing / immigration / emigration."""

    prob_none: StateFunction
    prob_imm: StateFunction
    prob_em: StateFunction
    immigration: Optional[ImmigrationLaw] = None
    emigration: Optional[EmigrationLaw] = None

    def branch_probs(self, z, u, zi: int):
        """Effective (none, immigration, emigration) probabilities at z.

        Emigration is folded into "none" when the type's count is zero:
        there is nothing to remove, so the branch is a no-op there.
        """
        pn = self.prob_none(z, u)
        pi = self.prob_imm(z, u)
        pe = self.prob_em(z, u)
        if zi <= 0 or self.emigration is None:
            pn += pe
            pe = 0.0
        if self.immigration is None:
            pn += pi
            pi = 0.0
        return pn, pi, pe


@dataclass(frozen=True)
class MigrationSpec:
    components: tuple

    @property
    def dim(self) -> int:
        return len(self.components)

    def needs_size(self) -> bool:
        """Whether any state function here depends on the scalar size u . z."""

        def depends(f) -> bool:
            if isinstance(f, Constant):
                return False
            if isinstance(f, Clamp):
                return depends(f.inner)
            return True

        for comp in self.components:
            if any(depends(f) for f in (comp.prob_none, comp.prob_imm, comp.prob_em)):
                return True
            if isinstance(comp.immigration, ShiftedPoissonImmigration) and depends(
                comp.immigration.mean_fn
            ):
                return True
        return False


@dataclass(frozen=True)
class DeterministicInitial:
    state: tuple

    def __post_init__(self):
        s = np.asarray(self.state)
        if (s < 0).any() or not np.array_equal(s, s.astype(int)):
            raise ValueError("initial state must have nonnegative integer entries")

    @property
    def dim(self) -> int:
        return len(self.state)

    def sample(self, rng):
        return np.asarray(self.state, dtype=np.int64).copy()

    def mean_norm(self) -> float:
        return float(np.sum(self.state))


@dataclass(frozen=True)
class TableInitial:
    states: tuple  # of int tuples
    probs: tuple

    def __post_init__(self):
        s = np.asarray(self.states)
        p = np.asarray(self.probs, dtype=float)
        if s.ndim != 2 or s.shape[0] != p.shape[0] or s.size == 0:
            raise ValueError("initial table needs one probability per state")
        if (s < 0).any() or not np.array_equal(s, s.astype(int)):
            raise ValueError("initial states must have nonnegative integer entries")
        if (p < 0).any() or abs(p.sum() - 1.0) > _PROB_TOL:
            raise ValueError("initial probabilities must be nonnegative and sum to 1")

    @property
    def dim(self) -> int:
        return len(self.states[0])

    def sample(self, rng):
        idx = rng.choice(len(self.states), p=self.probs)
        return np.asarray(self.states[idx], dtype=np.int64).copy()

    def mean_norm(self) -> float:
        return float(np.asarray(self.states).sum(axis=1) @ np.asarray(self.probs))


InitialLaw = DeterministicInitial | TableInitial


class ModelSpec:
    """Offspring + migration + initial law, with cached spectral data."""

    def __init__(self, offspring: OffspringSpec, migration: MigrationSpec, initial: InitialLaw):
        if offspring.dim != migration.dim:
            raise ValueError(
                f"offspring describes {offspring.dim} types but migration "
                f"describes {migration.dim}"
            )
        if initial.dim != offspring.dim:
            raise ValueError(
                f"initial law produces {initial.dim}-vectors in a {offspring.dim}-type model"
            )
        self.offspring = offspring
        self.migration = migration
        self.initial = initial
        self._spectral = None

    @property
    def dim(self) -> int:
        return self.offspring.dim

    def mean_matrix(self):
        return self.offspring.mean_matrix()

    def cov_tensor(self):
        return self.offspring.cov_tensor()

    def spectral(self) -> algebra.SpectralData:
        if self._spectral is None:
            self._spectral = algebra.perron(self.mean_matrix())
        return self._spectral

    def size_weights(self):
        """Left Perron weights u when the migration needs them, else None.

        Constant-only specs stay usable on models whose mean matrix is not
        primitive (the weights are never evaluated there).
        """
        if not self.migration.needs_size():
            return None
        try:
            return self.spectral().u
        except ValueError as exc:
            raise ValueError(
                "migration uses size-dependent state functions, which need the "
                "left Perron weights, but the offspring mean matrix is not "
                "primitive"
            ) from exc

    def validate(self):
        """Check probability and immigration-mean invariants at probe states."""
        p = self.dim
        u = self.size_weights()
        probes = [np.zeros(p, dtype=np.int64)]
        probes.extend(np.eye(p, dtype=np.int64))
        probes.append(np.full(p, 5, dtype=np.int64))
        probes.append(np.arange(1, p + 1, dtype=np.int64) * 7)
        for z in probes:
            for i, comp in enumerate(self.migration.components):
                vals = {
                    "prob_none": comp.prob_none(z, u),
                    "prob_imm": comp.prob_imm(z, u),
                    "prob_em": comp.prob_em(z, u),
                }
                for name, v in vals.items():
                    if not 0.0 <= v <= 1.0 + _PROB_TOL:
                        raise ValueError(
                            f"migration[{i}].{name} = {v} at z={z.tolist()} "
                            "is outside [0, 1]"
                        )
                total = sum(vals.values())
                if abs(total - 1.0) > _PROB_TOL:
                    raise ValueError(
                        f"migration[{i}] branch probabilities sum to {total} "
                        f"at z={z.tolist()}"
                    )
                if comp.immigration is None and vals["prob_imm"] > 0.0:
                    raise ValueError(
                        f"migration[{i}] has immigration probability {vals['prob_imm']} "
                        f"at z={z.tolist()} but no immigration law"
                    )
                if comp.emigration is None and vals["prob_em"] > 0.0 and z[i] > 0:
                    raise ValueError(
                        f"migration[{i}] has emigration probability {vals['prob_em']} "
                        f"at z={z.tolist()} but no emigration law"
                    )
                if comp.immigration is not None:
                    mean = comp.immigration.mean(z, u)
                    if mean < 1.0 - _PROB_TOL:
                        raise ValueError(
                            f"migration[{i}] immigration mean {mean} at "
                            f"z={z.tolist()} is below 1"
                        )
        return self


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray  # (n+1, p) int64
    stream: Optional[tuple] = None  # (master_seed, replicate) provenance

    def __len__(self) -> int:
        return self.states.shape[0]


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_migration(spec: MigrationSpec, z, rng, u=None):
    """Draw the migration adjustment vector M at state z."""
    z = np.asarray(z, dtype=np.int64)
    out = np.zeros(spec.dim, dtype=np.int64)
    for i, comp in enumerate(spec.components):
        zi = int(z[i])
        pn, pi, pe = comp.branch_probs(z, u, zi)
        x = rng.random()
        if x < pn:
            continue
        if x < pn + pi:
            out[i] = comp.immigration.sample(rng, z, u)
        elif pe > 0.0:
            out[i] = -comp.emigration.sample(rng, zi)
    return out


def step(spec: ModelSpec, z, rng):
    """One transition: migration adjustment, then offspring of the survivors."""
    z = np.asarray(z, dtype=np.int64)
    mig = sample_migration(spec.migration, z, rng, u=spec.size_weights())
    counts = z + mig
    out = np.zeros(spec.dim, dtype=np.int64)
    for i, law in enumerate(spec.offspring.laws):
        c = int(counts[i])
        if c > 0:
            out += law.sample_sum(rng, c)
    return out


def simulate_path(spec: ModelSpec, n: int, rng, stream: Optional[tuple] = None) -> Trajectory:
    if n < 0:
        raise ValueError("horizon must be nonnegative")
    states = np.empty((n + 1, spec.dim), dtype=np.int64)
    states[0] = spec.initial.sample(rng)
    u = spec.size_weights()
    mig = spec.migration
    laws = spec.offspring.laws
    z = states[0]
    for k in range(n):
        m = sample_migration(mig, z, rng, u=u)
        counts = z + m
        nxt = np.zeros(spec.dim, dtype=np.int64)
        for i, law in enumerate(laws):
            c = int(counts[i])
            if c > 0:
                nxt += law.sample_sum(rng, c)
        states[k + 1] = nxt
        z = nxt
    return Trajectory(states=states, stream=stream)


def sample_step_batch(spec: ModelSpec, z, size: int, rng):
    """``size`` independent one-step transitions from the same state z.

    Vectorized per type: a batch of migration branch draws, then the
    closed-form offspring sums.  Equal in law to ``size`` calls of
    ``step``; the draw order differs, so it is not stream-identical.
    """
    z = np.asarray(z, dtype=np.int64)
    u = spec.size_weights()
    counts = np.empty((size, spec.dim), dtype=np.int64)
    for i, comp in enumerate(spec.migration.components):
        zi = int(z[i])
        pn, pi, pe = comp.branch_probs(z, u, zi)
        x = rng.random(size)
        mi = np.zeros(size, dtype=np.int64)
        if pi > 0.0:
            mask = (x >= pn) & (x < pn + pi)
            k = int(mask.sum())
            if k:
                mi[mask] = comp.immigration.sample_batch(rng, k, z, u)
        if pe > 0.0:
            mask = x >= pn + pi
            k = int(mask.sum())
            if k:
                mi[mask] = -comp.emigration.sample_batch(rng, k, zi)
        counts[:, i] = zi + mi
    out = np.zeros((size, spec.dim), dtype=np.int64)
    for i, law in enumerate(spec.offspring.laws):
        out += law.sample_sum_batch(rng, counts[:, i])
    return out


# ---------------------------------------------------------------------------
# Serialization: JSON-compatible document schema (see README for the schema)
# ---------------------------------------------------------------------------


def _require(d: dict, key: str, path: str):
    if not isinstance(d, dict):
        raise SpecFormatError(path, f"expected a mapping, got {type(d).__name__}")
    if key not in d:
        raise SpecFormatError(f"{path}.{key}" if path else key, "missing required field")
    return d[key]


def _statefn_from_dict(d, path: str) -> StateFunction:
    kind = _require(d, "kind", path)
    try:
        if kind == "constant":
            return Constant(float(_require(d, "value", path)))
        if kind == "power":
            return Power(float(_require(d, "coeff", path)), float(_require(d, "exponent", path)))
        if kind == "table":
            return Table(
                tuple(float(x) for x in _require(d, "breaks", path)),
                tuple(float(x) for x in _require(d, "values", path)),
            )
        if kind == "clamp":
            inner = _statefn_from_dict(_require(d, "inner", path), f"{path}.inner")
            lo = d.get("lo")
            hi = d.get("hi")
            return Clamp(inner, None if lo is None else float(lo), None if hi is None else float(hi))
    except SpecFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(path, str(exc)) from exc
    raise SpecFormatError(f"{path}.kind", f"unknown state function kind {kind!r}")


def _statefn_to_dict(f: StateFunction) -> dict:
    if isinstance(f, Constant):
        return {"kind": "constant", "value": f.value}
    if isinstance(f, Power):
        return {"kind": "power", "coeff": f.coeff, "exponent": f.exponent}
    if isinstance(f, Table):
        return {"kind": "table", "breaks": list(f.breaks), "values": list(f.values)}
    if isinstance(f, Clamp):
        d = {"kind": "clamp", "inner": _statefn_to_dict(f.inner)}
        if f.lo is not None:
            d["lo"] = f.lo
        if f.hi is not None:
            d["hi"] = f.hi
        return d
    raise TypeError(f"not a state function: {f!r}")


def _marginal_from_dict(d, path: str):
    fam = _require(d, "family", path)
    try:
        if fam == "poisson":
            return PoissonOffspring(float(_require(d, "mean", path)))
        if fam == "bernoulli":
            return BernoulliOffspring(float(_require(d, "prob", path)))
        if fam == "geometric":
            return GeometricOffspring(float(_require(d, "mean", path)))
        if fam == "deterministic":
            return TableOffspring((int(_require(d, "value", path)),), (1.0,))
        if fam == "table":
            return TableOffspring(
                tuple(int(v) for v in _require(d, "values", path)),
                tuple(float(x) for x in _require(d, "probs", path)),
            )
    except SpecFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(path, str(exc)) from exc
    raise SpecFormatError(f"{path}.family", f"unknown offspring family {fam!r}")


def _marginal_to_dict(law) -> dict:
    if isinstance(law, PoissonOffspring):
        return {"family": "poisson", "mean": law.mean}
    if isinstance(law, BernoulliOffspring):
        return {"family": "bernoulli", "prob": law.prob}
    if isinstance(law, GeometricOffspring):
        return {"family": "geometric", "mean": law.mean}
    if isinstance(law, TableOffspring):
        return {"family": "table", "values": list(law.values), "probs": list(law.probs)}
    raise TypeError(f"not a scalar offspring law: {law!r}")


def _offspring_law_from_dict(d, path: str) -> OffspringLaw:
    kind = _require(d, "kind", path)
    try:
        if kind == "independent":
            comps = _require(d, "components", path)
            return IndependentOffspring(
                tuple(
                    _marginal_from_dict(c, f"{path}.components[{j}]")
                    for j, c in enumerate(comps)
                )
            )
        if kind == "table":
            return FiniteOffspring(
                tuple(tuple(int(x) for x in v) for v in _require(d, "vectors", path)),
                tuple(float(x) for x in _require(d, "probs", path)),
            )
    except SpecFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(path, str(exc)) from exc
    raise SpecFormatError(f"{path}.kind", f"unknown offspring law kind {kind!r}")


def _offspring_law_to_dict(law) -> dict:
    if isinstance(law, IndependentOffspring):
        return {
            "kind": "independent",
            "components": [_marginal_to_dict(c) for c in law.components],
        }
    if isinstance(law, FiniteOffspring):
        return {
            "kind": "table",
            "vectors": [list(v) for v in law.vectors],
            "probs": list(law.probs),
        }
    raise TypeError(f"not an offspring law: {law!r}")


def _immigration_from_dict(d, path: str) -> ImmigrationLaw:
    fam = _require(d, "family", path)
    try:
        if fam == "shifted_poisson":
            return ShiftedPoissonImmigration(
                _statefn_from_dict(_require(d, "mean", path), f"{path}.mean")
            )
        if fam == "deterministic":
            return DeterministicImmigration(int(_require(d, "value", path)))
        if fam == "table":
            return TableImmigration(
                tuple(int(v) for v in _require(d, "values", path)),
                tuple(float(x) for x in _require(d, "probs", path)),
            )
    except SpecFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(path, str(exc)) from exc
    raise SpecFormatError(f"{path}.family", f"unknown immigration family {fam!r}")


def _immigration_to_dict(law) -> dict:
    if isinstance(law, ShiftedPoissonImmigration):
        return {"family": "shifted_poisson", "mean": _statefn_to_dict(law.mean_fn)}
    if isinstance(law, DeterministicImmigration):
        return {"family": "deterministic", "value": int(law.value)}
    if isinstance(law, TableImmigration):
        return {"family": "table", "values": list(law.values), "probs": list(law.probs)}
    raise TypeError(f"not an immigration law: {law!r}")


def _emigration_from_dict(d, path: str) -> EmigrationLaw:
    fam = _require(d, "family", path)
    try:
        if fam == "uniform":
            return UniformEmigration()
        if fam == "truncated_geometric":
            return TruncatedGeometricEmigration(float(_require(d, "ratio", path)))
        if fam == "inverse_cube":
            return InverseCubeEmigration()
        if fam == "deterministic":
            return DeterministicEmigration(int(_require(d, "value", path)))
    except SpecFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(path, str(exc)) from exc
    raise SpecFormatError(f"{path}.family", f"unknown emigration family {fam!r}")


def _emigration_to_dict(law) -> dict:
    if isinstance(law, UniformEmigration):
        return {"family": "uniform"}
    if isinstance(law, TruncatedGeometricEmigration):
        return {"family": "truncated_geometric", "ratio": law.ratio}
    if isinstance(law, InverseCubeEmigration):
        return {"family": "inverse_cube"}
    if isinstance(law, DeterministicEmigration):
        return {"family": "deterministic", "value": int(law.value)}
    raise TypeError(f"not an emigration law: {law!r}")


def _component_from_dict(d, path: str) -> MigrationComponent:
    imm = d.get("immigration") if isinstance(d, dict) else None
    emi = d.get("emigration") if isinstance(d, dict) else None
    return MigrationComponent(
        prob_none=_statefn_from_dict(_require(d, "prob_none", path), f"{path}.prob_none"),
        prob_imm=_statefn_from_dict(_require(d, "prob_imm", path), f"{path}.prob_imm"),
        prob_em=_statefn_from_dict(_require(d, "prob_em", path), f"{path}.prob_em"),
        immigration=None if imm is None else _immigration_from_dict(imm, f"{path}.immigration"),
        emigration=None if emi is None else _emigration_from_dict(emi, f"{path}.emigration"),
    )


def _component_to_dict(c: MigrationComponent) -> dict:
    d = {
        "prob_none": _statefn_to_dict(c.prob_none),
        "prob_imm": _statefn_to_dict(c.prob_imm),
        "prob_em": _statefn_to_dict(c.prob_em),
    }
    if c.immigration is not None:
        d["immigration"] = _immigration_to_dict(c.immigration)
    if c.emigration is not None:
        d["emigration"] = _emigration_to_dict(c.emigration)
    return d


def _initial_from_dict(d, path: str) -> InitialLaw:
    kind = _require(d, "kind", path)
    try:
        if kind == "deterministic":
            return DeterministicInitial(tuple(int(x) for x in _require(d, "state", path)))
        if kind == "table":
            return TableInitial(
                tuple(tuple(int(x) for x in s) for s in _require(d, "states", path)),
                tuple(float(x) for x in _require(d, "probs", path)),
            )
    except SpecFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(path, str(exc)) from exc
    raise SpecFormatError(f"{path}.kind", f"unknown initial law kind {kind!r}")


def _initial_to_dict(law) -> dict:
    if isinstance(law, DeterministicInitial):
        return {"kind": "deterministic", "state": list(law.state)}
    if isinstance(law, TableInitial):
        return {"kind": "table", "states": [list(s) for s in law.states], "probs": list(law.probs)}
    raise TypeError(f"not an initial law: {law!r}")


def spec_from_dict(doc: dict) -> ModelSpec:
    """Build and validate a ModelSpec from a configuration document.

    Unknown top-level keys are allowed (experiment layers attach e.g. a
    ``limit`` block); unknown or missing fields inside the model blocks
    raise SpecFormatError naming the field.
    """
    offspring_doc = _require(doc, "offspring", "")
    if not isinstance(offspring_doc, (list, tuple)):
        raise SpecFormatError("offspring", "expected a list of per-type offspring laws")
    offspring = OffspringSpec(
        tuple(
            _offspring_law_from_dict(d, f"offspring[{i}]") for i, d in enumerate(offspring_doc)
        )
    )
    migration_doc = _require(doc, "migration", "")
    if not isinstance(migration_doc, (list, tuple)):
        raise SpecFormatError("migration", "expected a list of per-type components")
    if len(migration_doc) != offspring.dim:
        raise SpecFormatError(
            "migration", f"{len(migration_doc)} components for {offspring.dim} types"
        )
    migration = MigrationSpec(
        tuple(
            _component_from_dict(d, f"migration[{i}]") for i, d in enumerate(migration_doc)
        )
    )
    initial = _initial_from_dict(_require(doc, "initial", ""), "initial")
    try:
        spec = ModelSpec(offspring, migration, initial)
        spec.validate()
    except SpecFormatError:
        raise
    except ValueError as exc:
        raise SpecFormatError("spec", str(exc)) from exc
    return spec


def spec_to_dict(spec: ModelSpec) -> dict:
    return {
        "dim": spec.dim,
        "offspring": [_offspring_law_to_dict(law) for law in spec.offspring.laws],
        "migration": [_component_to_dict(c) for c in spec.migration.components],
        "initial": _initial_to_dict(spec.initial),
    }


def load_spec(path) -> ModelSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecFormatError("document", f"not valid JSON: {exc}") from exc
    return spec_from_dict(doc)


def save_spec(spec: ModelSpec, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")


def spec_digest(spec: ModelSpec) -> str:
    """Stable content hash of the model (formatting-independent)."""
    canonical = json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
