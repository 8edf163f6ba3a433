"""
Importance Clifford sampling
============================

Error-sensitive Clifford circuits drawn with probability proportional to 3^w
(non-uniform) or uniformly by Metropolis-Hastings, and the phenomenological
error rates they estimate.
"""

import numpy as np

from qem_ics.circuits import FrameFamily, FrameKind, build_frame, frame_from_gates, haar_unitaries, ideal_values
from qem_ics.density import evolve_batch, expectations
from qem_ics.ics import (
    enumerate_es_circuits,
    estimate_phenomenological,
    exact_eta,
    sample_nonuniform_indices,
    sample_uniform_indices,
)
from qem_ics.noise import NoiseModel
from qem_ics.pauli import CZ
from qem_ics.stabilizer import noisy_expectations

# A frame small enough to enumerate every error-sensitive binding
tiny = frame_from_gates(2, [CZ(0, 1)], "ZI")
rows, w = enumerate_es_circuits(tiny)
print("|C^ES| =", len(rows), " eta =", exact_eta(tiny))

rng = np.random.default_rng(1)
s = sample_nonuniform_indices(tiny, 20_000, rng)
eta, se = s.eta_estimate()
print(f"eta estimate from 2e4 non-uniform samples: {eta:.4f} +- {se:.4f}")

# Uniform sampling accepts moves with probability min(1, 3^(w_old - w_new))
u = sample_uniform_indices(tiny, 5_000, rng)
print("Metropolis-Hastings acceptance rate:", round(u.acceptance_rate, 3))
print("weight-class mass, uniform samples vs exact:", np.mean(u.w == 2).round(3), np.mean(w == 2).round(3))

# Phenomenological rates of a gate-depolarised frame from error-sensitive circuits
frame = build_frame(FrameFamily(FrameKind.PERIODIC_CYCLING, 6, 72))
noise = NoiseModel.gate_depolarising(1e-3)
s = sample_nonuniform_indices(frame, 2000, rng)
f, y = noisy_expectations(frame, s.indices, noise)
est = estimate_phenomenological(f, y, s.weight_factor, samples=s)
print(f"Clifford estimate: eps0 = {est.epsilon0:.5f} +- {est.se_epsilon0:.5f}, Delta = {est.delta:.5f}")

# The same moments weighted by f^2 over Haar-random circuits agree (two-design property)
mats = haar_unitaries(300 * frame.n_slots, rng).reshape(300, frame.n_slots, 2, 2)
f_u = ideal_values(frame, mats)
y_u = expectations(evolve_batch(frame, mats, noise), frame.observable)
print(f"unitary estimate : eps0 = {1 - (f_u * y_u).sum() / (f_u**2).sum():.5f}")
