#!/usr/bin/env python3
"""Diffusion approximation of the rescaled population path.

Viewed on the right scale, the whole trajectory (not just its endpoint)
of a critical model with constant migration surplus converges to a
Feller branching diffusion with immigration:

    dY = b dt + sqrt(a * max(Y, 0)) dW,   Y_0 = 0,

where the drift b is the weighted migration surplus and the diffusion
coefficient a is the reproduction variance seen through the Perron
weights.  This script extracts (b, a) from the model, simulates the
rescaled step functions t -> Z_{floor(n t)} / n, integrates the SDE
with an Euler scheme, and compares the two endpoint distributions.
"""
import numpy as np

from mbpm import (
    ecdf,
    euler_maruyama,
    feller_params,
    ks_statistic,
    load_spec,
    run_ensemble,
    scaled_path,
    simulate_path,
    stream_for,
)

spec = load_spec("specs/gamma_single_type.json")
drift, diffusion = feller_params(spec)
print(f"diffusion limit: dY = {drift} dt + sqrt({diffusion} * max(Y,0)) dW")

# ---------------------------------------------------------------------------
# one rescaled trajectory, as a step function on [0, 1]
# ---------------------------------------------------------------------------

n = 300
traj = simulate_path(spec, n=n, rng=stream_for(7, 0))
path = scaled_path(traj, n=n, T=1.0, grid=10)
print("\none rescaled path Z_{floor(nt)}/n:")
print("t:", np.array2string(path.times, precision=1))
print("Y:", np.array2string(path.values[:, 0], precision=3))

# ---------------------------------------------------------------------------
# endpoint law: rescaled ensemble versus Euler integration of the SDE
# ---------------------------------------------------------------------------

R = 800
print(f"\nsimulating {R} trajectories of length {n} ...")
ens = run_ensemble(spec, n=n, R=R, master_seed=16021, store_paths=True)
w_model = ens.paths[:, n, 0] / float(n)

print(f"integrating {R} Euler paths with dt = 1e-3 ...")
_, y = euler_maruyama(drift, diffusion, T=1.0, dt=1e-3, rng=stream_for(16021, R), n_paths=R)
w_sde = y[:, -1]

print(f"\nmodel endpoint:     mean {w_model.mean():.4f}, std {w_model.std(ddof=1):.4f}")
print(f"diffusion endpoint: mean {w_sde.mean():.4f}, std {w_sde.std(ddof=1):.4f}")

ks = ks_statistic(w_model, ecdf(w_sde))
print(f"two-sample KS distance: {ks:.4f}")

# quantile fan of the two endpoint samples
print(f"\n{'quantile':>9} {'model':>8} {'diffusion':>10}")
for q in (0.1, 0.25, 0.5, 0.75, 0.9):
    print(
        f"{q:9.2f} {np.quantile(w_model, q):8.3f} {np.quantile(w_sde, q):10.3f}"
    )

assert ks < 0.10, "rescaled endpoints strayed from the diffusion law"
print("\nPASS: rescaled paths match the Feller diffusion")
