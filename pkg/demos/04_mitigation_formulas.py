"""
Mitigation formulas
===================

PEMI rescaling, trained linear extrapolation, error cancellation with an
optimised inverse map, virtual distillation, and the covariance bound on the
best achievable extrapolation error.
"""

import numpy as np

from qem_ics.circuits import FrameFamily, FrameKind, build_frame, haar_unitaries, ideal_values
from qem_ics.density import clifford_matrices, evolve_batch, expectations
from qem_ics.ics import estimate_phenomenological, sample_nonuniform_indices
from qem_ics.mitigation import (
    CovarianceEstimate,
    MitigationFormula,
    extrapolate_linear,
    optimal_lambda_from_rates,
    optimize_lambda,
    pec_lambda_heuristic,
    pemi,
    theorem1_bound,
    train_vd_pemi,
    vd_pemi,
    virtual_distillation_values,
)
from qem_ics.noise import NoiseModel
from qem_ics.stabilizer import noisy_expectations

rng = np.random.default_rng(4)
frame = build_frame(FrameFamily(FrameKind.ALL_TO_ALL, 4, 30, seed=2))
eps_d, eps_z = 4e-3, 1e-3
noise = NoiseModel.depol_dephase(eps_d, eps_z)
amplified = NoiseModel.depol_dephase(2 * eps_d, eps_z)

# Train on 1000 error-sensitive Clifford circuits (exact, via Pauli propagation)
train = sample_nonuniform_indices(frame, 1000, rng)
w = train.weight_factor
f_t, y_t = noisy_expectations(frame, train.indices, noise)
_, y_t2 = noisy_expectations(frame, train.indices, amplified)
est = estimate_phenomenological(f_t, y_t, w, samples=train)
rate1 = 1 - (w * f_t * y_t).sum() / w.sum()
rate2 = 1 - (w * f_t * y_t2).sum() / w.sum()
lam_ee = optimal_lambda_from_rates(rate1, rate2)


def pec_loss(lam):
    _, y = noisy_expectations(frame, train.indices, noise, inverse_lambda=lam)
    return float((w * (y - f_t) ** 2).sum() / w.sum())


lam_pec = optimize_lambda(pec_loss)
print(f"eps0 = {est.epsilon0:.4f}, Delta = {est.delta:.4f}, lambda_EE = {lam_ee:.3f}")
print(f"PEC lambda: trained {lam_pec:.5f}, heuristic {pec_lambda_heuristic(eps_d, eps_z):.5f}")

# Test on Haar-random circuits with the density-matrix simulator
mats = haar_unitaries(300 * frame.n_slots, rng).reshape(300, frame.n_slots, 2, 2)
f = ideal_values(frame, mats)
y1 = expectations(evolve_batch(frame, mats, noise), frame.observable)
y2 = expectations(evolve_batch(frame, mats, amplified), frame.observable)
y_pec = expectations(evolve_batch(frame, mats, noise, inverse_lambda=lam_pec), frame.observable)


def rmse(v):
    return np.sqrt(np.mean((v - f) ** 2))


print(f"RMSE raw            {rmse(y1):.2e}")
print(f"RMSE PEMI basic     {rmse(pemi(y1, est)):.2e}")
print(f"RMSE PEMI optimal   {rmse(pemi(y1, est, optimal=True)):.2e}")
print(f"RMSE extrapolation  {rmse(extrapolate_linear(y1, y2, lam_ee)):.2e}")
print(f"RMSE 2 y1 - y2      {rmse(2 * y1 - y2):.2e}")
print(f"RMSE cancellation   {rmse(y_pec):.2e}")

# Virtual distillation, then a PEMI-style rescale trained on its outputs
yp_t = virtual_distillation_values(frame, clifford_matrices(train.indices[:200]), noise)
eps0_vd = train_vd_pemi(f_t[:200], yp_t, w[:200])
yp = virtual_distillation_values(frame, mats, noise)
print(f"RMSE VD             {rmse(yp):.2e}")
print(f"RMSE VD + PEMI      {rmse(vd_pemi(yp, eps0_vd)):.2e}")

# Best possible two-level extrapolation versus the bound
cov = CovarianceEstimate.from_unitary(f, [y1, y2])
b1, b2 = theorem1_bound(cov)
print(f"optimal extrapolation RMSE {cov.rmse(cov.optimal_q()):.2e} <= bound1 {b1:.2e} <= bound2 {b2:.2e}")

# Trained formulas are JSON values
formula = MitigationFormula.pemi_optimal(est.epsilon0, est.delta)
print(MitigationFormula.from_json(formula.to_json()))
