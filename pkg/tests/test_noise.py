from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

import oracles
from qem_ics.noise import (
    Channel,
    CompositeParams,
    NoiseKind,
    NoiseModel,
    composite_channel,
    depol_dephase,
    exact_inverse_lambda,
    gate_dependent_rate,
    gate_dependent_single,
    gate_depolarising,
    inverse_map,
    matching_product_probability,
    product_form_depolarising,
    sample_composite_params,
    sample_total_error_rate,
)


class _FixedUniform:
    """Stand-in generator whose uniform draws are a fixed value."""

    def __init__(self, value):
        self.value = value

    def uniform(self, low, high, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value, dtype=float)


def _random_rho(dim: int, rng) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_zero_rate_is_identity():
    np.testing.assert_allclose(gate_depolarising(0.0).superop, np.eye(16), atol=1e-15)


def test_gate_depolarising_value_on_zero_state():
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1
    out = gate_depolarising(0.015).apply(rho)
    assert np.real(np.trace(oracles.pauli_matrix("ZI") @ out)) == pytest.approx(0.984, abs=1e-12)


def test_gate_depolarising_has_fifteen_equal_channels():
    ch = gate_depolarising(0.01)
    probs = ch.pauli_probabilities()
    nonid = [w for p, w in ch.pauli_form if not p.is_identity()]
    assert len(nonid) == 15
    assert np.allclose(nonid, 0.01 / 15)
    assert probs.sum() == pytest.approx(1.0)


def test_gate_depolarising_matches_dense_oracle():
    rng = np.random.default_rng(0)
    rho = _random_rho(4, rng)
    ref = oracles.depolarise_pair(rho, (0, 1), 2, 0.03)
    np.testing.assert_allclose(gate_depolarising(0.03).apply(rho), ref, atol=1e-14)


def test_rate_out_of_range():
    with pytest.raises(ValueError):
        gate_depolarising(1.0)
    with pytest.raises(ValueError):
        NoiseModel.gate_depolarising(0.6, r=2)


def test_depol_dephase_matches_dense_oracle():
    rng = np.random.default_rng(1)
    rho = _random_rho(4, rng)
    ref = oracles.depolarise_pair(rho, (0, 1), 2, 0.02)
    ref = oracles.dephase(oracles.dephase(ref, 0, 2, 0.01), 1, 2, 0.01)
    ch = depol_dephase(0.02, 0.01)
    np.testing.assert_allclose(ch.apply(rho), ref, atol=1e-14)
    probs = ch.pauli_probabilities()
    assert np.all(probs >= 0) and probs.sum() == pytest.approx(1.0, abs=1e-14)


def test_depol_dephase_without_dephasing_is_depolarising():
    np.testing.assert_allclose(depol_dephase(0.01, 0.0).superop, gate_depolarising(0.01).superop, atol=1e-15)


def test_depol_dephase_fig10_configuration():
    ch = NoiseModel.depol_dephase(8e-5, 2e-5).gate_channel()
    assert ch.trace_preservation_error() < 1e-12


def test_composite_zero_is_identity():
    np.testing.assert_allclose(composite_channel(CompositeParams.zero()).superop, np.eye(16), atol=1e-15)


def test_composite_depolarising_only():
    p = CompositeParams(0.004, (0, 0), ((0, 0, 0), (0, 0, 0)), (0, 0))
    np.testing.assert_allclose(composite_channel(p).superop, gate_depolarising(0.004).superop, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_composite_is_cptp(seed):
    p = sample_composite_params(0.05, np.random.default_rng(seed))
    ch = composite_channel(p)
    assert ch.trace_preservation_error() < 1e-10
    choi = np.zeros((16, 16), dtype=complex)
    for k in ch.kraus:
        v = k.reshape(-1)
        choi += np.outer(v, v.conj())
    assert np.linalg.eigvalsh(choi).min() > -1e-12


def test_composite_order_matches_oracle():
    # depolarising first, then dephasing, rotations and amplitude damping last
    rng = np.random.default_rng(3)
    p = sample_composite_params(0.09, rng)
    rho = _random_rho(4, rng)
    out = oracles.depolarise_pair(rho, (0, 1), 2, p.eps_d)
    out = oracles.dephase(out, 0, 2, p.eps_z[0])
    out = oracles.dephase(out, 1, 2, p.eps_z[1])
    for q, (tx, ty, tz) in enumerate(p.theta):
        r = _rot(tz, oracles.Z) @ _rot(ty, oracles.Y) @ _rot(tx, oracles.X)
        g = oracles.embed(r, (q,), 2)
        out = g @ out @ g.conj().T
    for q, ea in enumerate(p.eps_a):
        k0 = oracles.embed(np.array([[1, 0], [0, np.sqrt(1 - ea)]]), (q,), 2)
        k1 = oracles.embed(np.array([[0, np.sqrt(ea)], [0, 0]]), (q,), 2)
        out = k0 @ out @ k0.conj().T + k1 @ out @ k1.conj().T
    np.testing.assert_allclose(composite_channel(p).apply(rho), out, atol=1e-14)


def _rot(theta, pauli):
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * pauli


def test_composite_params_at_kappa_zero():
    p = sample_composite_params(0.09, _FixedUniform(0.0))
    assert p.eps_d == pytest.approx(0.01)
    assert p.eps_z == pytest.approx((0.01, 0.01))
    assert p.eps_a == pytest.approx((0.015, 0.015))
    assert p.theta == ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))


def test_composite_params_at_kappa_one():
    p = sample_composite_params(0.09, _FixedUniform(1.0))
    assert p.eps_d == pytest.approx(1.2 * 0.09 / 9)
    assert p.theta[0][0] == pytest.approx(0.01)


def test_composite_params_mean():
    rng = np.random.default_rng(0)
    eps = 0.01
    d = np.array([sample_composite_params(eps, rng).eps_d for _ in range(100_000)])
    assert abs(d.mean() - eps / 9) < 3 * d.std() / np.sqrt(len(d))


def test_gate_dependent_identity_has_no_error():
    assert gate_dependent_rate(np.eye(2), 1e-3) == 0.0


def test_gate_dependent_traceless_gate():
    assert gate_dependent_rate(oracles.X, 2e-4) == pytest.approx(0.05 * 2e-4)
    ch = gate_dependent_single(oracles.X, 2e-4)
    probs = ch.pauli_probabilities()
    assert probs[1:] == pytest.approx([0.05 * 2e-4 / 3] * 3)


def test_gate_dependent_rejects_non_unitary():
    with pytest.raises(ValueError):
        gate_dependent_rate(3 * np.eye(2), 1e-3)


def test_total_error_rate_endpoints():
    assert sample_total_error_rate(100, _FixedUniform(-0.5)) == pytest.approx(10**-0.5 / 100)
    assert 10 * sample_total_error_rate(10, _FixedUniform(-2.5)) == pytest.approx(0.00316, abs=1e-5)


def test_total_error_rate_distribution():
    rng = np.random.default_rng(0)
    n = 50
    v = np.log10([n * sample_total_error_rate(n, rng) for _ in range(10_000)])
    assert stats.kstest(v, stats.uniform(loc=-2.5, scale=2.0).cdf).pvalue > 0.01


def test_inverse_map_cancels_depolarising():
    eps = 0.02
    lam = -16 * eps / (15 - 16 * eps)
    model = NoiseModel.gate_depolarising(eps)
    assert exact_inverse_lambda(model) == pytest.approx(lam, rel=1e-12)
    composed = inverse_map(lam).superop @ gate_depolarising(eps).superop
    np.testing.assert_allclose(composed, np.eye(16), atol=1e-10)
    assert not inverse_map(lam).completely_positive


def test_product_and_summation_forms_agree_to_first_order():
    eps = 1e-3
    diff = np.max(np.abs(product_form_depolarising(eps / 15).superop - gate_depolarising(eps).superop))
    assert diff < 1e-5


def test_matching_product_probability_is_exact():
    eps = 0.01
    p = matching_product_probability(eps)
    np.testing.assert_allclose(product_form_depolarising(p).superop, gate_depolarising(eps).superop, atol=1e-14)


def test_product_form_matches_sequential_oracle():
    rng = np.random.default_rng(5)
    rho = _random_rho(4, rng)
    ref = oracles.product_depolarise_pair(rho, (0, 1), 2, 0.004)
    np.testing.assert_allclose(product_form_depolarising(0.004).apply(rho), ref, atol=1e-14)


def test_amplification_doubles_rates():
    a = NoiseModel.gate_depolarising(0.01, r=2).gate_channel()
    np.testing.assert_allclose(a.superop, gate_depolarising(0.02).superop, atol=1e-15)
    p = sample_composite_params(0.01, np.random.default_rng(0))
    c = NoiseModel.composite_model(p).amplified(2.0).gate_channel()
    np.testing.assert_allclose(c.superop, composite_channel(p.scaled(2.0)).superop, atol=1e-15)
    assert p.scaled(2.0).theta[1][2] == pytest.approx(2 * p.theta[1][2])


@pytest.mark.parametrize(
    "model",
    [
        NoiseModel.gate_depolarising(1e-3, r=1.5, product_form=True),
        NoiseModel.depol_dephase(8e-5, 2e-5),
        NoiseModel.gate_dependent(2e-4),
        NoiseModel.global_depolarising(1e-3),
        NoiseModel.composite_model(sample_composite_params(1e-3, np.random.default_rng(0))),
    ],
)
def test_noise_model_json_roundtrip(model):
    back = NoiseModel.from_json(model.to_json())
    assert back.to_dict() == model.to_dict()
    assert back.kind is model.kind
    if model.kind is not NoiseKind.GLOBAL_DEPOLARISING:
        np.testing.assert_array_equal(back.gate_channel().superop, model.gate_channel().superop)


def test_channel_eigenvalue_roundtrip():
    eig = np.linspace(1.0, 0.9, 16)
    ch = Channel.from_eigenvalues(2, eig)
    np.testing.assert_allclose(ch.pauli_eigenvalues(), eig, atol=1e-15)


def test_gate_dependent_slot_channel():
    model = NoiseModel.gate_dependent(3e-3)
    ch = model.slot_channel(oracles.H)
    eps_s = gate_dependent_rate(oracles.H, 3e-3)
    assert ch.pauli_eigenvalues()[1] == pytest.approx(1 - 4 * eps_s / 3)
    assert NoiseModel.gate_depolarising(3e-3).slot_channel(oracles.H) is None
