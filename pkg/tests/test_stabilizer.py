from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qem_ics.circuits import Circuit, FrameFamily, FrameKind, Slot, bind_random_clifford, build_frame, frame_from_gates
from qem_ics.ics import es_circuit, random_pattern
from qem_ics.density import evolve_batch, expectations
from qem_ics.noise import NoiseModel
from qem_ics.pauli import C1_H, C1_X, CNOT, CZ, PauliString, c1_matrices
from qem_ics.stabilizer import (
    PropagatedChannel,
    build_channels,
    circuit_weight,
    effective_observable,
    first_qubit_factors,
    heisenberg_sweep,
    ideal_expectation,
    noisy_expectation,
    noisy_expectations,
    pauli_noise_expectation,
    propagate_error,
)


def _bare(n: int, observable: str, first_layer=None) -> Circuit:
    frame = frame_from_gates(n, [], observable)
    return Circuit(frame, tuple(first_layer or [0] * n))


def _random_clifford(seed: int, n: int = 3, n_gates: int = 15, kind=FrameKind.ALL_TO_ALL) -> Circuit:
    frame = build_frame(FrameFamily(kind, n, n_gates, seed=seed, gate="cnot" if seed % 2 else "cz"))
    return bind_random_clifford(frame, np.random.default_rng(seed))


def _es_clifford(seed: int, n: int = 3, n_gates: int = 15) -> Circuit:
    frame = build_frame(FrameFamily(FrameKind.ALL_TO_ALL, n, n_gates, seed=seed, gate="cnot" if seed % 2 else "cz"))
    rng = np.random.default_rng(seed)
    return es_circuit(frame, random_pattern(frame, rng), rng)


def _dense_effective(c: Circuit) -> np.ndarray:
    u = oracles.circuit_unitary(c.frame, c.slot_matrices())
    q = oracles.pauli_matrix(str(c.observable))
    return u.conj().T @ q @ u


def _pauli_dense(p: PauliString) -> np.ndarray:
    return p.sign * oracles.pauli_matrix(str(p)[1:])


def test_empty_circuit_keeps_observable():
    c = _bare(2, "ZI")
    assert str(effective_observable(c)) == "+ZI"
    assert ideal_expectation(c) == 1


def test_single_hadamard():
    c = _bare(2, "ZI", [C1_H, 0])
    assert str(effective_observable(c)) == "+XI"
    assert ideal_expectation(c) == 0


def test_x_gate_flips_sign():
    c = _bare(1, "Z", [C1_X])
    assert ideal_expectation(c) == -1


def test_weights_of_small_circuits():
    assert circuit_weight(_bare(3, "ZII")) == 1
    frame = frame_from_gates(2, [CZ(0, 1)], "ZI")
    assert circuit_weight(Circuit(frame, (0, 0, 0, 0))) == 1


@pytest.mark.parametrize("seed", range(10))
def test_effective_observable_matches_dense(seed):
    c = _random_clifford(seed)
    eff = effective_observable(c)
    np.testing.assert_allclose(_pauli_dense(eff), _dense_effective(c), atol=1e-12)
    f = ideal_expectation(c)
    assert f == pytest.approx(np.real(_dense_effective(c)[0, 0]), abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_weight_matches_dense(seed):
    c = _random_clifford(seed, n=4, n_gates=12)
    m = _dense_effective(c)
    # count non-identity factors through partial traces against single-qubit Paulis
    eff = effective_observable(c)
    labels = str(eff)[1:]
    np.testing.assert_allclose(oracles.pauli_matrix(labels) * eff.sign, m, atol=1e-12)
    assert circuit_weight(c) == sum(ch != "I" for ch in labels) == eff.weight()


def test_unbound_or_non_clifford_rejected():
    frame = frame_from_gates(2, [CZ(0, 1)], "ZI")
    c = Circuit(frame, tuple([np.eye(2)] * 4))
    with pytest.raises(ValueError):
        effective_observable(c)


def test_propagate_error_at_end_is_identity():
    c = _random_clifford(1)
    sigma = PauliString.from_str("XYZ")
    assert propagate_error(c, len(c.frame.elements), sigma) == sigma


def test_x_before_cnot_spreads():
    frame = frame_from_gates(2, [CNOT(0, 1)], "ZI")
    c = Circuit(frame, (0, 0, 0, 0))
    assert str(propagate_error(c, 2, PauliString.from_str("XI"))) == "+XX"


def test_propagate_error_range():
    c = _random_clifford(1)
    with pytest.raises(ValueError):
        propagate_error(c, len(c.frame.elements) + 1, PauliString.from_str("XII"))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.text("IXYZ", min_size=3, max_size=3), st.data())
def test_propagate_error_matches_dense(seed, label, data):
    c = _random_clifford(seed, n=3, n_gates=8)
    pos = data.draw(st.integers(0, len(c.frame.elements)))
    n = c.n
    u_tail = np.eye(2**n, dtype=complex)
    mats = c.slot_matrices()
    j = sum(isinstance(e, Slot) for e in c.frame.elements[:pos])
    for e in c.frame.elements[pos:]:
        if isinstance(e, Slot):
            g = oracles.gate_matrix(e, n, mats[j])
            j += 1
        else:
            g = oracles.gate_matrix(e, n)
        u_tail = g @ u_tail
    sigma = PauliString.from_str(label)
    out = propagate_error(c, pos, sigma)
    np.testing.assert_allclose(_pauli_dense(out), u_tail @ oracles.pauli_matrix(label) @ u_tail.conj().T, atol=1e-12)


def test_non_sensitive_circuit_ignores_channels():
    c = _bare(2, "ZI", [C1_H, 0])
    chans = [PropagatedChannel(0, PauliString.from_str("XI"), PauliString.from_str("XI"), 0.1)]
    assert pauli_noise_expectation(c, chans) == 0.0


def test_single_cnot_eight_anticommuting_channels():
    eps = 1e-3
    frame = frame_from_gates(2, [CNOT(0, 1)], "ZI")
    c = Circuit(frame, (0, 0, 0, 0))
    model = NoiseModel.gate_depolarising(eps, product_form=True)
    chans = build_channels(c, model)
    assert len(chans) == 15
    anti = [ch for ch in chans if not ch.propagated.commutes(c.observable)]
    assert len(anti) == 8
    y = pauli_noise_expectation(c, chans)
    assert y == pytest.approx((1 - 2 * eps / 15) ** 8, abs=1e-15)
    # summation form agrees to first order
    assert abs(y - (1 - 16 * eps / 15)) < 10 * eps**2
    rho = oracles.noisy_state(frame, c.slot_matrices(), lambda r, pair: oracles.depolarise_pair(r, pair, 2, eps))
    assert oracles.expectation(rho, "ZI") == pytest.approx(1 - 16 * eps / 15, abs=1e-14)


def test_noiseless_limit():
    c = _random_clifford(3)
    chans = build_channels(c, NoiseModel.gate_depolarising(0.0, product_form=True))
    assert pauli_noise_expectation(c, chans) == ideal_expectation(c)


def test_channel_probability_bound():
    with pytest.raises(ValueError):
        PropagatedChannel(0, PauliString.from_str("X"), PauliString.from_str("X"), 0.5)


@pytest.mark.parametrize("seed", range(8))
def test_product_form_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    c = _es_clifford(seed, n=n, n_gates=int(rng.integers(1, 31)))
    eps = 0.01
    model = NoiseModel.gate_depolarising(eps, product_form=True)
    y_chan = pauli_noise_expectation(c, build_channels(c, model))
    y_fast = noisy_expectation(c, model)
    rho = oracles.noisy_state(c.frame, c.slot_matrices(), lambda r, pair: oracles.product_depolarise_pair(r, pair, n, eps / 15))
    y_ref = oracles.expectation(rho, str(c.observable))
    assert abs(y_ref) > 0.5
    assert y_chan == pytest.approx(y_ref, abs=1e-9)
    assert y_fast == pytest.approx(y_ref, abs=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_depol_dephase_matches_density_oracle(seed):
    c = _es_clifford(seed, n=3, n_gates=10)
    model = NoiseModel.depol_dephase(0.02, 0.01)

    def noise(r, pair):
        r = oracles.depolarise_pair(r, pair, 3, 0.02)
        return oracles.dephase(oracles.dephase(r, pair[0], 3, 0.01), pair[1], 3, 0.01)

    rho = oracles.noisy_state(c.frame, c.slot_matrices(), noise)
    assert noisy_expectation(c, model) == pytest.approx(oracles.expectation(rho, str(c.observable)), abs=1e-12)
    chans = build_channels(c, model)
    assert pauli_noise_expectation(c, chans) == pytest.approx(noisy_expectation(c, model), abs=1e-12)


def test_gate_dependent_matches_density_sim():
    frame = build_frame(FrameFamily(FrameKind.PERIODIC_CYCLING, 4, 16))
    rng = np.random.default_rng(2)
    idx = rng.integers(0, 24, size=(20, frame.n_slots))
    model = NoiseModel.gate_dependent(0.02)
    _, y = noisy_expectations(frame, idx, model)
    rho = evolve_batch(frame, c1_matrices()[idx], model)
    np.testing.assert_allclose(y, expectations(rho, frame.observable), atol=1e-12)


def test_inverse_map_matches_density_sim():
    frame = build_frame(FrameFamily(FrameKind.ALL_TO_ALL, 3, 12, seed=4))
    idx = np.random.default_rng(0).integers(0, 24, size=(10, frame.n_slots))
    model = NoiseModel.depol_dephase(0.01, 0.003)
    _, y = noisy_expectations(frame, idx, model, inverse_lambda=-0.02)
    rho = evolve_batch(frame, c1_matrices()[idx], model, inverse_lambda=-0.02)
    np.testing.assert_allclose(y, expectations(rho, frame.observable), atol=1e-12)


def test_global_depolarising_factor():
    frame = build_frame(FrameFamily(FrameKind.ALL_TO_ALL, 3, 7, seed=1))
    idx = np.random.default_rng(1).integers(0, 24, size=(30, frame.n_slots))
    f, y = noisy_expectations(frame, idx, NoiseModel.global_depolarising(0.01))
    np.testing.assert_allclose(y, f * 0.99**7, atol=1e-15)


def test_effective_rate_recovered_exactly():
    c = _es_clifford(6, n=3, n_gates=20)
    model = NoiseModel.gate_depolarising(0.004, product_form=True)
    chans = build_channels(c, model)
    f = ideal_expectation(c)
    eps_c = 1 - pauli_noise_expectation(c, chans) * f
    t = [not ch.propagated.commutes(c.observable) for ch in chans]
    expected = 1 - np.prod([(1 - 2 * ch.probability) for ch, tk in zip(chans, t) if tk])
    assert eps_c == pytest.approx(expected, abs=1e-14)


def test_sweep_weight_and_ideal_batch_agree_with_scalar():
    frame = build_frame(FrameFamily(FrameKind.LINEAR_NETWORK, 4, 15, seed=2))
    idx = np.random.default_rng(3).integers(0, 24, size=(25, frame.n_slots))
    res = heisenberg_sweep(frame, idx)
    for b in range(25):
        c = Circuit(frame, tuple(int(k) for k in idx[b]))
        assert res.ideal[b] == ideal_expectation(c)
        assert res.weight[b] == circuit_weight(c)


@pytest.mark.parametrize("error", ["XX", "ZI", "YZ", "IY"])
def test_first_qubit_factors_match_propagation(error):
    frame = build_frame(FrameFamily(FrameKind.PERIODIC_CYCLING, 4, 12))
    idx = np.random.default_rng(7).integers(0, 24, size=(6, frame.n_slots))
    codes = first_qubit_factors(frame, idx, PauliString.from_str(error), qubit=0)
    assert codes.shape == (6, 12)
    gate_positions = [p for p, e in enumerate(frame.elements) if not isinstance(e, Slot)]
    for b in range(6):
        c = Circuit(frame, tuple(int(k) for k in idx[b]))
        for g, pos in enumerate(gate_positions):
            a, bq = frame.elements[pos].qubits
            sigma = PauliString(4)
            for j, q in enumerate((a, bq)):
                label = error[j]
                sigma = PauliString(4, sigma.x | (PauliString.single(4, q, label).x), sigma.z | (PauliString.single(4, q, label).z))
            assert codes[b, g] == propagate_error(c, pos + 1, sigma).local_code(0)
