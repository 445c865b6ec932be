#!/usr/bin/env python3
"""Criticality of a multitype mean matrix as offspring production varies.

A multitype branching process is subcritical, critical, or supercritical
according to whether the Perron root (dominant eigenvalue) of its mean
matrix is below, at, or above one.  This script sweeps a scale factor
across a fixed mixing pattern, reports the Perron root and the left and
right weight vectors at each point, and shows the classification
flipping at the critical scale.  It also demonstrates the primitivity
check that the spectral routines rely on.
"""
import numpy as np

from mbpm import criticality, is_primitive, perron

# mixing pattern: each type-0 parent favours type-0 children, type-1
# parents split evenly; scaling the whole matrix moves the Perron root
# without changing the eigenvectors
base = np.array([[0.6, 0.5], [0.4, 0.5]])

print(f"base pattern primitive: {is_primitive(base)}")
print()
print(f"{'scale':>7} {'rho':>12} {'class':>13}   u (left)            v (right)")
print("-" * 75)
for scale in (0.80, 0.95, 1.00, 1.05, 1.25):
    m = scale * base
    sd = perron(m)
    label = criticality(m)
    u_txt = np.array2string(sd.u, precision=4)
    v_txt = np.array2string(sd.v, precision=4)
    print(f"{scale:7.2f} {sd.rho:12.8f} {label:>13}   {u_txt:<18}  {v_txt}")

# ---------------------------------------------------------------------------
# the weight vectors satisfy u m = rho u and m v = rho v with the
# normalizations sum(u) = 1 and u . v = 1
# ---------------------------------------------------------------------------

sd = perron(base)
print()
print(f"residual |u m - rho u| = {np.max(np.abs(sd.u @ base - sd.rho * sd.u)):.2e}")
print(f"residual |m v - rho v| = {np.max(np.abs(base @ sd.v - sd.rho * sd.v)):.2e}")
print(f"sum(u) - 1             = {np.sum(sd.u) - 1.0:.2e}")
print(f"u . v - 1              = {np.dot(sd.u, sd.v) - 1.0:.2e}")

# ---------------------------------------------------------------------------
# primitivity: the spectral routines require some power of the matrix to
# be strictly positive; a two-cycle pattern fails and is rejected
# ---------------------------------------------------------------------------

cycle = np.array([[0.0, 1.0], [1.0, 0.0]])
print(f"\ntwo-cycle pattern primitive: {is_primitive(cycle)}")
try:
    perron(cycle)
except ValueError as exc:
    print(f"perron() rejects it: {exc}")
