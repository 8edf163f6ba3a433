from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import CNOT, CZ, H, S, X, Y, Z, pauli_matrix
from qem_ics.pauli import (
    C1_H,
    C1_IDENTITY,
    C1_SIZE,
    CNOT as CNOTGate,
    CZ as CZGate,
    PauliString,
    SingleQubitClifford,
    c1_index,
    c1_matrix,
    cliffords_mapping_to_z,
    conjugate,
    multiply,
)


def _matrix(p: PauliString) -> np.ndarray:
    return (1j**p.phase) * pauli_matrix(str(p.unsigned()).lstrip("+"))


def test_parse_and_print_roundtrip():
    p = PauliString.from_str("-XIZY")
    assert p.n == 4
    assert p.sign == -1
    assert str(p) == "-XIZY"
    assert p.weight() == 3
    assert PauliString.from_str("iZ").phase == 1


def test_invalid_character_rejected():
    with pytest.raises(ValueError):
        PauliString.from_str("XQ")


def test_x_times_y_is_i_z():
    out = multiply(PauliString.from_str("X"), PauliString.from_str("Y"))
    assert str(out) == "+iZ"


def test_involution_has_unit_phase():
    p = PauliString.from_str("IZ")
    out = multiply(p, p)
    assert out.is_identity() and out.phase == 0


def test_xz_times_zz_matches_dense_product():
    out = multiply(PauliString.from_str("XZ"), PauliString.from_str("ZZ"))
    dense = pauli_matrix("XZ") @ pauli_matrix("ZZ")
    np.testing.assert_allclose(_matrix(out), dense, atol=1e-12)
    assert str(out) == "-iYI"


def test_multiply_dimension_mismatch():
    with pytest.raises(ValueError):
        multiply(PauliString.from_str("X"), PauliString.from_str("XX"))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n))))
def test_multiply_matches_dense(pair):
    a, b = (PauliString.from_str(s) for s in pair)
    np.testing.assert_allclose(_matrix(multiply(a, b)), _matrix(a) @ _matrix(b), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n))))
def test_commutes_matches_dense(pair):
    a, b = (PauliString.from_str(s) for s in pair)
    ma, mb = _matrix(a), _matrix(b)
    assert a.commutes(b) == np.allclose(ma @ mb, mb @ ma)


def test_cnot_spreads_x_from_control():
    out = conjugate(CNOTGate(0, 1), PauliString.from_str("XI"))
    assert str(out) == "+XX"


def test_cz_maps_x_to_xz():
    out = conjugate(CZGate(0, 1), PauliString.from_str("XI"))
    assert str(out) == "+XZ"


def test_hadamard_maps_z_to_x():
    out = conjugate(SingleQubitClifford(C1_H, 0), PauliString.from_str("Z"))
    assert str(out) == "+X"


@pytest.mark.parametrize("gate, dense", [(CZGate(0, 1), CZ), (CNOTGate(0, 1), CNOT), (CNOTGate(1, 0), None)])
def test_two_qubit_conjugation_matches_dense(gate, dense):
    if dense is None:
        swap = np.eye(4)[[0, 2, 1, 3]]
        dense = swap @ CNOT @ swap
    for a in "IXYZ":
        for b in "IXYZ":
            p = PauliString.from_str(a + b)
            out = conjugate(gate, p)
            np.testing.assert_allclose(_matrix(out), dense @ pauli_matrix(a + b) @ dense.conj().T, atol=1e-12)
            back = conjugate(gate, out, inverse=True)
            assert back == p


def test_conjugation_acts_only_on_gate_qubits():
    p = PauliString.from_str("YXZ")
    out = conjugate(CZGate(0, 1), p)
    assert out.local_code(2) == p.local_code(2)


def test_conjugation_out_of_range():
    with pytest.raises(ValueError):
        conjugate(CZGate(0, 2), PauliString.from_str("XX"))


def test_c1_group_is_closed_and_has_24_elements():
    mats = [c1_matrix(k) for k in range(C1_SIZE)]
    keys = {c1_index(a @ b) for a in mats for b in mats}
    assert keys == set(range(C1_SIZE))
    assert c1_index(np.eye(2)) == C1_IDENTITY
    assert c1_index(H) == C1_H
    assert c1_index(1j * S) == c1_index(S)
    for m in mats:
        np.testing.assert_allclose(m @ m.conj().T, np.eye(2), atol=1e-12)


def test_single_qubit_conjugation_matches_dense():
    for k in range(C1_SIZE):
        u = c1_matrix(k)
        for label, m in (("X", X), ("Y", Y), ("Z", Z)):
            out = conjugate(SingleQubitClifford(k, 0), PauliString.from_str(label))
            np.testing.assert_allclose(_matrix(out), u @ m @ u.conj().T, atol=1e-12)


@pytest.mark.parametrize("label", ["X", "Y", "Z"])
def test_eight_cliffords_map_each_pauli_to_pm_z(label):
    valid = cliffords_mapping_to_z(label)
    assert len(valid) == 8
    # dense oracle: R^dag P R = +-Z
    p = pauli_matrix(label)
    for k in range(C1_SIZE):
        r = c1_matrix(k)
        m = r.conj().T @ p @ r
        assert (k in valid) == (np.allclose(m, Z) or np.allclose(m, -Z))


def test_identity_maps_with_every_clifford():
    assert cliffords_mapping_to_z("I") == frozenset(range(C1_SIZE))
    assert C1_IDENTITY in cliffords_mapping_to_z("Z")


def test_c1_actions_are_distinct_signed_permutations():
    actions = set()
    for k in range(C1_SIZE):
        images = tuple(str(conjugate(SingleQubitClifford(k, 0), PauliString.from_str(a))) for a in "XYZ")
        assert sorted(i.lstrip("+-") for i in images) == ["X", "Y", "Z"]
        actions.add(images)
    assert len(actions) == C1_SIZE


def test_conjugation_is_a_group_action():
    rng = np.random.default_rng(3)
    gates = [CZGate(0, 1), CNOTGate(1, 0), SingleQubitClifford(int(rng.integers(24)), 1), CNOTGate(0, 1)]
    full = {CZGate(0, 1): CZ, CNOTGate(0, 1): CNOT}
    swap = np.eye(4)[[0, 2, 1, 3]]
    full[CNOTGate(1, 0)] = swap @ CNOT @ swap
    u = np.eye(4, dtype=complex)
    p = PauliString.from_str("XY")
    for g in gates:
        m = full.get(g)
        if m is None:
            m = np.kron(np.eye(2), c1_matrix(g.index))
        u = m @ u
        p = conjugate(g, p)
    np.testing.assert_allclose(_matrix(p), u @ pauli_matrix("XY") @ u.conj().T, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n))))
def test_product_order_flips_sign_on_anticommutation(pair):
    a, b = (PauliString.from_str(s) for s in pair)
    ab, ba = multiply(a, b), multiply(b, a)
    assert ab.unsigned() == ba.unsigned()
    assert (ab.phase - ba.phase) % 4 == (0 if a.commutes(b) else 2)


def test_bitmask_outside_register():
    with pytest.raises(ValueError):
        PauliString(2, x=4)
