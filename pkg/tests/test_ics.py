from __future__ import annotations

import io
import itertools
from collections import Counter

import numpy as np
import pytest

from qem_ics.circuits import CircuitFrame, FrameFamily, FrameKind, Slot, bind_random_unitary, build_frame, frame_from_gates, ideal_values
from qem_ics.density import evolve_batch, expectations
from qem_ics.ics import (
    ICSSamples,
    default_proposal,
    dump_samples,
    enumerate_es_circuits,
    enumerate_patterns,
    es_circuit,
    es_count,
    es_indices,
    estimate_phenomenological,
    exact_eta,
    load_samples,
    mse,
    pattern_weights,
    random_pattern,
    sample_nonuniform,
    sample_nonuniform_indices,
    sample_uniform,
    sample_uniform_indices,
    weighted_moments,
)
from qem_ics.noise import NoiseModel
from qem_ics.pauli import C1_SIZE, CZ, PauliString, c1_matrix
from qem_ics.stabilizer import circuit_weight, heisenberg_sweep, ideal_expectation, noisy_expectations


def _ratio_se(w, v) -> float:
    """Delta-method standard error of the self-normalised mean ``sum(w v) / sum(w)``."""
    est = (w * v).sum() / w.sum()
    return float(np.sqrt(((w * (v - est)) ** 2).sum()) / w.sum())


def _tiny_frame() -> CircuitFrame:
    return frame_from_gates(2, [CZ(0, 1)], "ZI")


def _single_slot_frame() -> CircuitFrame:
    return frame_from_gates(1, [], "Z")


def test_single_slot_frame_has_eight_es_circuits():
    frame = _single_slot_frame()
    rows, w = enumerate_es_circuits(frame)
    assert len(rows) == 8 == es_count(frame)
    # brute force over C1: exactly the gates with R^dag Z R = +-Z
    brute = [k for k in range(C1_SIZE) if abs(abs((c1_matrix(k).conj().T @ np.diag([1, -1]) @ c1_matrix(k))[0, 0]) - 1) < 1e-12]
    assert sorted(rows[:, 0].tolist()) == brute
    f = heisenberg_sweep(frame, rows).ideal
    assert set(np.abs(f).tolist()) == {1}


def test_single_slot_frame_sampling_probabilities():
    frame = _single_slot_frame()
    s = sample_nonuniform_indices(frame, 80_000, np.random.default_rng(0))
    counts = Counter(s.indices[:, 0].tolist())
    assert len(counts) == 8
    freq = np.array(list(counts.values())) / 80_000
    # P_nu = 24**-1 * 3**1 = 1/8 each
    assert np.all(np.abs(freq - 1 / 8) < 4 * np.sqrt(1 / 8 * 7 / 8 / 80_000))


@pytest.mark.parametrize("seed", range(5))
def test_es_circuits_are_error_sensitive(seed):
    rng = np.random.default_rng(seed)
    frame = build_frame(FrameFamily(FrameKind.ALL_TO_ALL, 4, 15, seed=seed))
    for _ in range(20):
        pattern = random_pattern(frame, rng)
        c = es_circuit(frame, pattern, rng)
        assert abs(ideal_expectation(c)) == 1
        # the first layer only maps factors to +-Z, so the weight is unchanged
        assert circuit_weight(c) == pattern_weights(frame, pattern)[0]
        assert list(c.clifford_indices()[frame.n :]) == list(pattern)


def test_nonuniform_and_uniform_samples_are_error_sensitive():
    frame = build_frame(FrameFamily(FrameKind.PERIODIC_CYCLING, 6, 30))
    rng = np.random.default_rng(1)
    for s in (sample_nonuniform_indices(frame, 2000, rng), sample_uniform_indices(frame, 500, rng)):
        res = heisenberg_sweep(frame, s.indices)
        assert np.all(np.abs(res.ideal) == 1)
        np.testing.assert_array_equal(res.weight, s.w)


def test_nonuniform_is_seeded():
    frame = build_frame(FrameFamily(FrameKind.ALL_TO_ALL, 3, 10, seed=1))
    a = sample_nonuniform_indices(frame, 100, np.random.default_rng(5))
    b = sample_nonuniform_indices(frame, 100, np.random.default_rng(5))
    np.testing.assert_array_equal(a.indices, b.indices)
    pairs = sample_nonuniform(frame, 3, np.random.default_rng(5))
    assert [p[1] for p in pairs] == pytest.approx(a.weight_factor[:3].tolist())


def test_exact_eta_matches_enumeration():
    frame = _tiny_frame()
    rows, _ = enumerate_es_circuits(frame)
    # brute force over every Clifford binding of the 4 slots
    all_idx = np.array(list(itertools.product(range(C1_SIZE), repeat=4)))
    f = heisenberg_sweep(frame, all_idx).ideal
    assert int(np.count_nonzero(f)) == len(rows) == es_count(frame)
    assert exact_eta(frame) == pytest.approx(len(rows) / 24**4)


def test_eta_estimator_consistent():
    frame = _tiny_frame()
    s = sample_nonuniform_indices(frame, 50_000, np.random.default_rng(2))
    eta, se = s.eta_estimate()
    assert abs(eta - exact_eta(frame)) < 3 * se


def test_nonuniform_distribution_matches_p_nu():
    frame = _tiny_frame()
    patterns, w = enumerate_patterns(frame)
    s = sample_nonuniform_indices(frame, 100_000, np.random.default_rng(3))
    # marginal over bar-R is uniform for Alg. 2
    key = s.indices[:, 2] * 24 + s.indices[:, 3]
    freq = np.bincount(key, minlength=576) / len(key)
    assert 0.5 * np.abs(freq - 1 / 576).sum() < 0.05
    # weight classes follow 3**w * 24**-N_R summed over the class
    rows, wr = enumerate_es_circuits(frame)
    p = 3.0**wr / 24**4
    assert p.sum() == pytest.approx(1.0)
    expected = np.array([p[wr == k].sum() for k in (1, 2)])
    observed = np.array([np.mean(s.w == k) for k in (1, 2)])
    np.testing.assert_allclose(observed, expected, atol=0.01)


def test_all_accept_when_weight_is_constant():
    frame = CircuitFrame(2, (Slot(0), Slot(1), Slot(0), Slot(1)), PauliString.from_str("ZZ"))
    s = sample_uniform_indices(frame, 500, np.random.default_rng(0))
    assert s.acceptance_rate == 1.0
    assert np.all(s.w == 2)


def test_uniform_sampler_targets_uniform_on_es_set():
    frame = _tiny_frame()
    rows, wr = enumerate_es_circuits(frame)
    s = sample_uniform_indices(frame, 40_000, np.random.default_rng(4))
    # weight-class probabilities under the uniform target
    for k in (1, 2):
        assert np.mean(s.w == k) == pytest.approx(np.mean(wr == k), abs=0.02)
    # per-slot marginals
    for j in range(4):
        exact = np.bincount(rows[:, j], minlength=24) / len(rows)
        emp = np.bincount(s.indices[:, j], minlength=24) / len(s)
        assert 0.5 * np.abs(exact - emp).sum() < 0.03


def test_detailed_balance_flux():
    frame = _tiny_frame()
    s = sample_uniform_indices(frame, 40_000, np.random.default_rng(5))
    w = s.w
    # net flux between the two weight classes vanishes in stationarity
    up = np.count_nonzero((w[:-1] == 1) & (w[1:] == 2))
    down = np.count_nonzero((w[:-1] == 2) & (w[1:] == 1))
    assert abs(up - down) <= 3 * np.sqrt(up + down) + 1


def test_proposal_symmetric():
    prop = default_proposal(1)
    rng = np.random.default_rng(6)
    for _ in range(20):
        a = rng.integers(0, 24, size=2)
        b = a.copy()
        b[rng.integers(2)] = rng.integers(24)
        assert prop.probability(b, a) == pytest.approx(prop.probability(a, b))
    assert prop.probability([1, 2], [3, 4]) == 0.0
    assert prop.probability([1, 2], [1, 2]) == pytest.approx(1 / 24)


def test_full_resample_is_independent():
    prop = default_proposal(2)
    rng = np.random.default_rng(7)
    old = np.array([0, 0])
    draws = np.array([prop.propose(old, rng)[0] for _ in range(20_000)])
    assert prop.probability([5, 9], [0, 0]) == pytest.approx(1 / 576)
    freq = np.bincount(draws[:, 0], minlength=24) / len(draws)
    assert np.all(np.abs(freq - 1 / 24) < 0.01)


def test_single_slot_chain_is_irreducible():
    frame = _tiny_frame()
    s = sample_uniform_indices(frame, 30_000, np.random.default_rng(8), proposal=default_proposal(1))
    seen = {tuple(r) for r in s.indices[:, 2:].tolist()}
    assert len(seen) == 576


def test_proposal_rejects_bad_m():
    with pytest.raises(ValueError):
        default_proposal(0)
    with pytest.raises(ValueError):
        default_proposal(3).propose(np.array([1, 2]), np.random.default_rng(0))


def test_uniform_sampler_initial_pattern_and_list_api():
    frame = _tiny_frame()
    circuits = sample_uniform(frame, 10, initial_pattern=[3, 4], rng=np.random.default_rng(0), burn_in=0)
    assert len(circuits) == 10
    assert all(abs(ideal_expectation(c)) == 1 for c in circuits)


def test_global_depolarising_is_fluctuation_free():
    frame = build_frame(FrameFamily(FrameKind.ALL_TO_ALL, 4, 20, seed=0))
    s = sample_nonuniform_indices(frame, 500, np.random.default_rng(0))
    f, y = noisy_expectations(frame, s.indices, NoiseModel.global_depolarising(0.01))
    est = estimate_phenomenological(f, y, s.weight_factor, samples=s)
    assert est.epsilon0 == pytest.approx(1 - 0.99**20, abs=1e-12)
    assert est.delta == pytest.approx(0.0, abs=1e-7)


def test_nonuniform_and_uniform_estimators_agree():
    frame = build_frame(FrameFamily(FrameKind.PERIODIC_CYCLING, 4, 24))
    rng = np.random.default_rng(9)
    model = NoiseModel.gate_depolarising(0.01)
    a = sample_nonuniform_indices(frame, 4000, rng)
    b = sample_uniform_indices(frame, 4000, rng, proposal=default_proposal(2))
    ea = estimate_phenomenological(*noisy_expectations(frame, a.indices, model), a.weight_factor)
    eb = estimate_phenomenological(*noisy_expectations(frame, b.indices, model))
    # the chain is autocorrelated; allow a generous combined error
    tol = 4 * np.hypot(ea.se_epsilon0, 3 * eb.se_epsilon0)
    assert abs(ea.epsilon0 - eb.epsilon0) < tol


def test_estimator_requires_error_sensitive_input():
    with pytest.raises(ValueError):
        estimate_phenomenological([1.0, 0.0], [0.9, 0.0])
    with pytest.raises(ValueError):
        estimate_phenomenological([1.0], [0.9])


def test_weighted_moments_unit_weights_match_numpy():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(200)
    mean, var, _, _ = weighted_moments(v, np.ones(200))
    assert mean == pytest.approx(v.mean())
    assert var == pytest.approx(v.var(ddof=1))


def test_mse_trivial_cases():
    f = np.array([1.0, -1.0, 0.3])
    assert mse(f, f) == 0.0
    assert mse(f, f + 0.2) == pytest.approx(0.04)
    assert mse(f, 0.5 * f, formula=lambda y: 2 * y) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        mse([], [])


def test_reweighted_mse_matches_enumeration():
    frame = _tiny_frame()
    model = NoiseModel.depol_dephase(0.05, 0.02)
    rows, _ = enumerate_es_circuits(frame)
    f_all, y_all = noisy_expectations(frame, rows, model)
    exact = np.mean((y_all - f_all) ** 2)
    s = sample_nonuniform_indices(frame, 20_000, np.random.default_rng(1))
    f, y = noisy_expectations(frame, s.indices, model)
    est = mse(f, y, weights=s.weight_factor)
    assert abs(est - exact) < 4 * _ratio_se(s.weight_factor, (y - f) ** 2)


def test_unitary_loss_equals_eta_times_es_loss():
    frame = build_frame(FrameFamily(FrameKind.ALL_TO_ALL, 3, 8, seed=2))
    rng = np.random.default_rng(2)
    model = NoiseModel.gate_depolarising(0.02)
    mats = np.stack([bind_random_unitary(frame, rng).slot_matrices() for _ in range(1000)])
    f_u = ideal_values(frame, mats)
    y_u = expectations(evolve_batch(frame, mats, model), frame.observable)
    sq_u = (y_u - f_u) ** 2
    s = sample_nonuniform_indices(frame, 5000, rng)
    f, y = noisy_expectations(frame, s.indices, model)
    eta = exact_eta(frame) if frame.n_slots - frame.n <= 4 else s.eta_estimate()[0]
    l_es = mse(f, y, weights=s.weight_factor)
    se_es = eta * _ratio_se(s.weight_factor, (y - f) ** 2)
    se_u = sq_u.std(ddof=1) / np.sqrt(len(sq_u))
    assert abs(sq_u.mean() - eta * l_es) < 3 * np.hypot(se_u, se_es) + 3 * s.eta_estimate()[1] * l_es


def test_dump_and_load_samples():
    frame = _tiny_frame()
    s = sample_nonuniform_indices(frame, 5, np.random.default_rng(0))
    f = heisenberg_sweep(frame, s.indices).ideal
    buf = io.StringIO()
    dump_samples(s, buf, f)
    buf.seek(0)
    recs = load_samples(buf)
    assert len(recs) == 5
    for rec, row, wf in zip(recs, s.indices, s.weight_factor):
        assert list(rec["circuit"].slot_gates) == row.tolist()
        assert rec["weight_factor"] == pytest.approx(wf)
        assert abs(rec["f"]) == 1


def test_es_indices_validates_patterns():
    frame = _tiny_frame()
    with pytest.raises(ValueError):
        es_indices(frame, np.zeros((1, 3), dtype=int), np.random.default_rng(0))
    with pytest.raises(ValueError):
        es_indices(frame, np.array([[0, 24]]), np.random.default_rng(0))


def test_samples_container():
    frame = _tiny_frame()
    s = ICSSamples(frame, np.zeros((2, 4), dtype=int), np.array([1, 2]), uniform=False)
    np.testing.assert_allclose(s.weight_factor, [1 / 3, 1 / 9])
    assert len(s) == 2
