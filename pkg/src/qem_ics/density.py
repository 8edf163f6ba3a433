"""Batched density-matrix evolution of circuits in a frame.

States are stored as ``(B, 2**n, 2**n)`` arrays with qubit 0 as the most
significant bit, so every circuit of a batch shares the frame but may bind
different slot unitaries. Noise follows each two-qubit gate; slots are noisy
only under the gate-dependent model.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .circuits import Circuit, CircuitFrame, Slot, pauli_diag_action
from .noise import Channel, NoiseModel, gate_dependent_rate, inverse_map
from .pauli import CNOT, CZ, PAULI_MATRICES, PauliString, c1_matrices

MAX_QUBITS = 12
DEFAULT_CHUNK = 64


@dataclass(frozen=True, eq=False)
class DensityState:
    n: int
    matrix: np.ndarray
    trace_preserving: bool = True

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"density states support 1..{MAX_QUBITS} qubits")
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2**self.n, 2**self.n):
            raise ValueError("matrix shape does not match n")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        if self.trace_preserving and abs(np.trace(m) - 1) > 1e-10:
            raise ValueError("density matrix trace differs from 1")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def zero(cls, n: int) -> DensityState:
        m = np.zeros((2**n, 2**n), dtype=complex)
        m[0, 0] = 1
        return cls(n, m)

    @classmethod
    def maximally_mixed(cls, n: int) -> DensityState:
        return cls(n, np.eye(2**n, dtype=complex) / 2**n)


# --------------------------------------------------------------------------
# Kernels on (B, d, d) batches
# --------------------------------------------------------------------------


def _check_n(n: int) -> None:
    if n > MAX_QUBITS:
        raise ValueError(f"n={n} exceeds the density-matrix cap of {MAX_QUBITS}")


def apply_1q_unitaries(rho: np.ndarray, n: int, q: int, u: np.ndarray) -> np.ndarray:
    """``u_b rho_b u_b^dag`` on qubit ``q``; ``u`` has shape ``(B, 2, 2)`` or ``(2, 2)``."""
    bsz, d = rho.shape[0], rho.shape[1]
    u = np.broadcast_to(u, (bsz, 2, 2))
    if 2 * q >= n:
        # strided matmul gets slow for low-order qubits; contract the superoperator instead
        s = np.einsum("bij,bkl->bikjl", u, u.conj()).reshape(bsz, 4, 4)
        return apply_superop(rho, n, [q], s)
    left = 2**q
    v = rho.reshape(bsz, left, 2, (d // (2 * left)) * d)
    v = np.matmul(u[:, None], v)
    v = v.reshape(bsz, d * left, 2, d // (2 * left))
    v = np.matmul(u.conj()[:, None], v)
    return v.reshape(bsz, d, d)


@lru_cache(maxsize=None)
def _cz_mask(n: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(2**n)
    s = np.where(((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1), -1.0, 1.0)
    m = np.outer(s, s)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def _cnot_perm(n: int, c: int, t: int) -> np.ndarray:
    idx = np.arange(2**n)
    p = idx ^ (((idx >> (n - 1 - c)) & 1) << (n - 1 - t))
    p.setflags(write=False)
    return p


def apply_two_qubit_gate(rho: np.ndarray, n: int, gate) -> np.ndarray:
    if isinstance(gate, CZ):
        return rho * _cz_mask(n, gate.a, gate.b)
    if isinstance(gate, CNOT):
        p = _cnot_perm(n, gate.control, gate.target)
        return rho[:, p][:, :, p]
    raise TypeError(f"unsupported gate {gate!r}")


def apply_superop(rho: np.ndarray, n: int, qubits: Sequence[int], superop: np.ndarray) -> np.ndarray:
    """Apply a local superoperator (``(4**k, 4**k)`` or batched ``(B, 4**k, 4**k)``)."""
    bsz = rho.shape[0]
    k = len(qubits)
    t = rho.reshape((bsz,) + (2,) * (2 * n))
    src = [1 + q for q in qubits] + [1 + n + q for q in qubits]
    dst = list(range(2 * n + 1 - 2 * k, 2 * n + 1))
    t = np.moveaxis(t, src, dst)
    shape = t.shape
    v = t.reshape(bsz, -1, 4**k)
    if superop.ndim == 2:
        v = v @ superop.T
    else:
        v = np.matmul(v, np.transpose(superop, (0, 2, 1)))
    t = np.moveaxis(v.reshape(shape), dst, src)
    return np.ascontiguousarray(t).reshape(rho.shape)


def apply_global_depolarising(rho: np.ndarray, eps: float) -> np.ndarray:
    d = rho.shape[1]
    tr = np.trace(rho, axis1=1, axis2=2)
    out = (1.0 - eps) * rho
    idx = np.arange(d)
    out[:, idx, idx] += (eps / d) * tr[:, None]
    return out


@lru_cache(maxsize=None)
def _single_depolariser() -> np.ndarray:
    return sum(np.kron(p, p.conj()) for p in PAULI_MATRICES) / 4


def _slot_superops(mu: np.ndarray) -> np.ndarray:
    ident = np.eye(4)
    return mu[:, None, None] * ident + (1.0 - mu)[:, None, None] * _single_depolariser()


# --------------------------------------------------------------------------
# Evolution
# --------------------------------------------------------------------------


def _slot_eigenvalues(noise: NoiseModel, mats: np.ndarray) -> np.ndarray:
    eps = noise.epsilon * noise.r
    rates = np.array([gate_dependent_rate(u, eps) for u in mats])
    if noise.product_form:
        return (1.0 - 2.0 * rates / 3.0) ** 2
    return 1.0 - 4.0 * rates / 3.0


def evolve_batch(
    frame: CircuitFrame,
    slot_unitaries: np.ndarray,
    noise: Optional[NoiseModel],
    inverse_lambda: Optional[float] = None,
) -> np.ndarray:
    """Final density matrices for bindings ``slot_unitaries`` of shape ``(B, N_R, 2, 2)``."""
    n = frame.n
    _check_n(n)
    slot_unitaries = np.asarray(slot_unitaries, dtype=complex)
    if slot_unitaries.ndim != 4 or slot_unitaries.shape[1:] != (frame.n_slots, 2, 2):
        raise ValueError(f"slot unitaries must have shape (B, {frame.n_slots}, 2, 2)")
    bsz = slot_unitaries.shape[0]
    d = 2**n
    rho = np.zeros((bsz, d, d), dtype=complex)
    rho[:, 0, 0] = 1.0
    gate_superop = None
    glob = None
    if noise is not None:
        if noise.is_global:
            glob = noise.epsilon * noise.r
        else:
            ch = noise.gate_channel()
            if inverse_lambda is not None:
                if not ch.is_pauli:
                    gate_superop = inverse_map(inverse_lambda).superop @ ch.superop
                else:
                    ch = ch.then(inverse_map(inverse_lambda))
            if gate_superop is None:
                gate_superop = np.array(ch.superop)
    if inverse_lambda is not None and (noise is None or glob is not None):
        raise ValueError("the inverse map is defined for per-gate noise only")
    slot_noise = noise is not None and noise.has_slot_noise
    j = 0
    for e in frame.elements:
        if isinstance(e, Slot):
            us = slot_unitaries[:, j]
            rho = apply_1q_unitaries(rho, n, e.qubit, us)
            if slot_noise:
                mu = _slot_eigenvalues(noise, us)
                if np.any(mu != 1.0):
                    rho = apply_superop(rho, n, (e.qubit,), _slot_superops(mu))
            j += 1
        else:
            rho = apply_two_qubit_gate(rho, n, e)
            if glob is not None:
                rho = apply_global_depolarising(rho, glob)
            elif gate_superop is not None:
                rho = apply_superop(rho, n, e.qubits, gate_superop)
    return rho


def evolve_chunked(
    frame: CircuitFrame,
    slot_unitaries: np.ndarray,
    noise: Optional[NoiseModel],
    reducer,
    inverse_lambda: Optional[float] = None,
    chunk: int = DEFAULT_CHUNK,
) -> np.ndarray:
    """Evolve in fixed-size chunks and map each chunk of states through ``reducer``.

    Chunk boundaries depend only on the circuit order, so the output does not
    depend on how callers distribute chunks over workers.
    """
    outs = []
    for s in range(0, slot_unitaries.shape[0], chunk):
        rho = evolve_batch(frame, slot_unitaries[s : s + chunk], noise, inverse_lambda)
        outs.append(reducer(rho))
    return np.concatenate(outs, axis=0) if outs else np.zeros(0)


def binding_matrices(circuits: Sequence[Circuit]) -> np.ndarray:
    """Stack the slot matrices of circuits sharing one frame."""
    if not circuits:
        raise ValueError("no circuits")
    frame = circuits[0].frame
    if any(c.frame != frame for c in circuits):
        raise ValueError("circuits must share a frame")
    return np.stack([c.slot_matrices() for c in circuits])


def clifford_matrices(indices: np.ndarray) -> np.ndarray:
    """Slot matrices for C1 index arrays of shape ``(B, N_R)``."""
    return c1_matrices()[np.asarray(indices, dtype=np.int64)]


def run(circuit: Circuit, noise: Optional[NoiseModel] = None, inverse_lambda: Optional[float] = None) -> DensityState:
    """Noisy final state of one circuit starting from ``|0...0>``."""
    rho = evolve_batch(circuit.frame, circuit.slot_matrices()[None], noise, inverse_lambda)[0]
    rho = 0.5 * (rho + rho.conj().T)
    return DensityState(circuit.n, rho, trace_preserving=inverse_lambda is None)


# --------------------------------------------------------------------------
# Observables
# --------------------------------------------------------------------------


def expectations(rho: np.ndarray, q: PauliString) -> np.ndarray:
    """``Tr(Q rho_b)`` for a batch."""
    perm, phase = pauli_diag_action(q)
    # Tr(Q rho) = sum_i phase[i] rho[i, perm[i]] since Q|i> = phase[i]|perm[i]>
    idx = np.arange(rho.shape[1])
    return np.real(np.einsum("i,bi->b", phase, rho[:, idx, perm]))


def expectation(state: DensityState, q: PauliString) -> float:
    if q.n != state.n:
        raise ValueError("observable size does not match the state")
    return float(expectations(state.matrix[None], q)[0])


def purity_pairs(rho: np.ndarray, q: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """``(Tr(Q rho^2), Tr(rho^2))`` for a batch."""
    sq = np.matmul(rho, rho)
    num = expectations(sq, q)
    den = np.real(np.einsum("bij,bji->b", rho, rho))
    return num, den


def purity_pair(state: DensityState, q: PauliString) -> tuple[float, float]:
    if q.n != state.n:
        raise ValueError("observable size does not match the state")
    num, den = purity_pairs(state.matrix[None], q)
    return float(num[0]), float(den[0])


def apply_channel(state: DensityState, channel: Channel, qubits: Sequence[int]) -> DensityState:
    if len(qubits) != channel.arity or max(qubits) >= state.n:
        raise ValueError("qubits do not match the channel")
    out = apply_superop(state.matrix[None], state.n, tuple(qubits), np.array(channel.superop))[0]
    out = 0.5 * (out + out.conj().T)
    return DensityState(state.n, out, trace_preserving=state.trace_preserving and channel.completely_positive)


def apply_inverse_map(state: DensityState, lam: float, pair: Sequence[int]) -> DensityState:
    """Apply ``(1 - lam)[I] + lam D`` to a qubit pair."""
    a, b = pair
    if a == b:
        raise ValueError("pair qubits must differ")
    out = apply_superop(state.matrix[None], state.n, (a, b), np.array(inverse_map(lam).superop))[0]
    out = 0.5 * (out + out.conj().T)
    return DensityState(state.n, out, trace_preserving=False)
