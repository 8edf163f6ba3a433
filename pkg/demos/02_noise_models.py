"""
Noise channels
==============

The gate depolarising channel in summation and product form, the composite
model with coherent rotations and amplitude damping, and the inverse map used
for error cancellation.
"""

import numpy as np

from qem_ics.noise import (
    NoiseModel,
    composite_channel,
    gate_depolarising,
    inverse_map,
    matching_product_probability,
    product_form_depolarising,
    sample_composite_params,
    sample_total_error_rate,
)

eps = 0.01
summation = gate_depolarising(eps)
print("Pauli eigenvalues (identity, then the rest):", np.round(summation.pauli_eigenvalues()[:3], 6))

# The product of 15 single-Pauli channels with p = eps / 15 differs at second order
approx = product_form_depolarising(eps / 15)
print("max superoperator gap, p = eps/15:", np.abs(approx.superop - summation.superop).max())
exact = product_form_depolarising(matching_product_probability(eps))
print("max superoperator gap, matched p :", np.abs(exact.superop - summation.superop).max())

# Composite noise: depolarising, dephasing, small rotations, then amplitude damping
rng = np.random.default_rng(0)
params = sample_composite_params(eps, rng)
ch = composite_channel(params)
print("composite parameters:", params.to_dict())
print("trace preservation error:", ch.trace_preservation_error())

# The inverse map with lambda = -16 eps / (15 - 16 eps) undoes the channel
lam = -16 * eps / (15 - 16 * eps)
print("inverse map * channel == identity:", np.allclose(inverse_map(lam).superop @ summation.superop, np.eye(16)))

# Random total error rates follow a log-uniform law on [10^-2.5, 10^-0.5] / N
rates = [100 * sample_total_error_rate(100, rng) for _ in range(5)]
print("sampled total error rates:", np.round(rates, 4))

# Models serialise to JSON and amplify for extrapolation
model = NoiseModel.depol_dephase(8e-5, 2e-5)
print(model.to_json(), "->", model.amplified(2.0).to_dict())
