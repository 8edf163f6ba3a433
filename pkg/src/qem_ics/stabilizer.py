"""Heisenberg-picture evaluation of Clifford circuits in a frame.

The observable is conjugated backwards through the circuit; ``f_C``, the
circuit weight and the exact Pauli-noise expectation all follow from this
sweep. A batched numpy sweep evaluates many Clifford bindings of one frame at
once; it stores the observable as one local Pauli code per qubit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .circuits import Circuit, CircuitFrame, Slot
from .noise import NoiseModel, inverse_map
from .pauli import (
    C1_SIZE,
    CNOT,
    CZ,
    PauliString,
    anticommute_bits,
    c1_table,
    conj1,
    conj2,
)


# --------------------------------------------------------------------------
# Lookup tables for the batched sweep
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _c1_arrays(inverse: bool) -> tuple[np.ndarray, np.ndarray]:
    code = np.empty((C1_SIZE, 4), dtype=np.int8)
    flip = np.empty((C1_SIZE, 4), dtype=np.int8)
    for k in range(C1_SIZE):
        for c, (nc, f) in enumerate(c1_table(k, inverse)):
            code[k, c], flip[k, c] = nc, f
    return code, flip


@lru_cache(maxsize=None)
def _two_qubit_arrays(kind: type) -> tuple[np.ndarray, np.ndarray]:
    gate = CZ(0, 1) if kind is CZ else CNOT(0, 1)
    table = gate.table()
    code = np.array([t[0] for t in table], dtype=np.int8)
    flip = np.array([t[1] for t in table], dtype=np.int8)
    return code, flip


@lru_cache(maxsize=None)
def local_anticommute_table(arity: int) -> np.ndarray:
    """``A[s, t] = 1`` iff local Paulis ``s`` and ``t`` anticommute."""
    dim = 4**arity

    def bits(c):
        x = z = 0
        for j in range(arity):
            cj = (c >> (2 * j)) & 3
            x |= (cj & 1) << j
            z |= (cj >> 1) << j
        return x, z

    out = np.zeros((dim, dim), dtype=np.int8)
    for s in range(dim):
        for t in range(dim):
            out[s, t] = anticommute_bits(*bits(s), *bits(t))
    return out


def _codes_from_pauli(p: PauliString) -> np.ndarray:
    return np.array([p.local_code(q) for q in range(p.n)], dtype=np.int8)


def _pauli_from_codes(codes: np.ndarray, phase: int) -> PauliString:
    x = z = 0
    for q, c in enumerate(codes.tolist()):
        x |= (c & 1) << q
        z |= ((c >> 1) & 1) << q
    return PauliString(len(codes), x, z, int(phase))


@dataclass(frozen=True)
class SweepResult:
    """Outcome of a batched backward sweep.

    ``codes``/``phase`` hold the effective observable ``U^dag Q U`` per circuit.
    ``gate_codes[b, g]`` is the two-qubit local code of the Heisenberg
    observable just after two-qubit gate ``g``; ``slot_codes[b, j]`` is the
    single-qubit code just after slot ``j``.
    """

    codes: np.ndarray
    phase: np.ndarray
    gate_codes: np.ndarray
    slot_codes: np.ndarray

    @property
    def ideal(self) -> np.ndarray:
        sign = np.where(self.phase == 0, 1, -1)
        diagonal = np.all((self.codes & 1) == 0, axis=1)
        return np.where(diagonal, sign, 0).astype(np.int64)

    @property
    def weight(self) -> np.ndarray:
        return np.count_nonzero(self.codes, axis=1)


def heisenberg_sweep(
    frame: CircuitFrame,
    indices: np.ndarray,
    start: Optional[PauliString] = None,
    stop: Optional[int] = None,
) -> SweepResult:
    """Conjugate ``start`` (default: the frame observable) backwards through a batch.

    ``indices`` has shape ``(B, N_R)`` with C1 indices for every slot. The sweep
    covers elements ``stop .. end`` (``stop=None`` means the whole circuit).
    """
    indices = np.asarray(indices, dtype=np.int64)
    if indices.ndim != 2 or indices.shape[1] != frame.n_slots:
        raise ValueError(f"indices must have shape (B, {frame.n_slots})")
    start = frame.observable if start is None else start
    if start.n != frame.n or not start.hermitian():
        raise ValueError("start must be a Hermitian Pauli on the frame register")
    bsz = indices.shape[0]
    codes = np.tile(_codes_from_pauli(start), (bsz, 1))
    phase = np.full(bsz, start.phase, dtype=np.int8)
    inv_code, inv_flip = _c1_arrays(True)
    n_two = frame.two_qubit_count
    gate_codes = np.zeros((bsz, n_two), dtype=np.int8)
    slot_codes = np.zeros((bsz, frame.n_slots), dtype=np.int8)
    g = n_two
    j = frame.n_slots
    elements = frame.elements
    stop = 0 if stop is None else stop
    for pos in range(len(elements) - 1, stop - 1, -1):
        e = elements[pos]
        if isinstance(e, Slot):
            j -= 1
            q = e.qubit
            c = codes[:, q]
            slot_codes[:, j] = c
            k = indices[:, j]
            phase = (phase + 2 * inv_flip[k, c]) & 3
            codes[:, q] = inv_code[k, c]
        else:
            g -= 1
            a, b = e.qubits
            local = codes[:, a] + 4 * codes[:, b]
            gate_codes[:, g] = local
            tcode, tflip = _two_qubit_arrays(type(e))
            new = tcode[local]
            phase = (phase + 2 * tflip[local]) & 3
            codes[:, a] = new & 3
            codes[:, b] = new >> 2
    return SweepResult(codes, phase, gate_codes, slot_codes)


# --------------------------------------------------------------------------
# Scalar API on Circuit
# --------------------------------------------------------------------------


def _require_clifford(circuit: Circuit) -> np.ndarray:
    if not circuit.is_clifford():
        raise ValueError("circuit has non-Clifford slot gates")
    return circuit.clifford_indices()[None, :]


def effective_observable(circuit: Circuit) -> PauliString:
    """``U^dag Q U`` for a Clifford circuit."""
    res = heisenberg_sweep(circuit.frame, _require_clifford(circuit))
    return _pauli_from_codes(res.codes[0], res.phase[0])


def ideal_expectation(circuit: Circuit) -> int:
    """``f_C`` in {-1, 0, 1}."""
    return int(heisenberg_sweep(circuit.frame, _require_clifford(circuit)).ideal[0])


def circuit_weight(circuit: Circuit) -> int:
    return int(heisenberg_sweep(circuit.frame, _require_clifford(circuit)).weight[0])


def propagate_error(circuit: Circuit, position: int, sigma: PauliString) -> PauliString:
    """Conjugate ``sigma`` forwards through every element after the first ``position``."""
    elements = circuit.frame.elements
    if not 0 <= position <= len(elements):
        raise ValueError(f"position {position} outside [0, {len(elements)}]")
    if sigma.n != circuit.n:
        raise ValueError("sigma size does not match the register")
    idx = _require_clifford(circuit)[0]
    j = sum(1 for e in elements[:position] if isinstance(e, Slot))
    x, z, ph = sigma.x, sigma.z, sigma.phase
    for e in elements[position:]:
        if isinstance(e, Slot):
            x, z, ph = conj1(c1_table(int(idx[j])), e.qubit, x, z, ph)
            j += 1
        else:
            x, z, ph = conj2(e.table(), *e.qubits, x, z, ph)
    return PauliString(circuit.n, x, z, ph)


@dataclass(frozen=True)
class PropagatedChannel:
    """A Pauli channel ``(1-p)[I] + p[sigma]`` inserted after element ``origin``."""

    origin: int
    local_pauli: PauliString
    propagated: PauliString
    probability: float

    def __post_init__(self):
        if not 0 <= self.probability < 0.5:
            raise ValueError(f"channel probability {self.probability} outside [0, 1/2)")


def _embed(local: PauliString, qubits: Sequence[int], n: int) -> PauliString:
    x = z = 0
    for j, q in enumerate(qubits):
        c = local.local_code(j)
        x |= (c & 1) << q
        z |= ((c >> 1) & 1) << q
    return PauliString(n, x, z, local.phase)


def build_channels(circuit: Circuit, noise: NoiseModel) -> list[PropagatedChannel]:
    """All product-form Pauli channels of a Pauli noise model, propagated to the end.

    Reference implementation with cost ``O(M N)``; ``noisy_expectation`` is the fast path.
    """
    out = []
    idx = _require_clifford(circuit)[0]
    j = 0
    for pos, e in enumerate(circuit.frame.elements):
        if isinstance(e, Slot):
            chans = noise.slot_product_channels(int(idx[j]))
            qubits: tuple[int, ...] = (e.qubit,)
            j += 1
        else:
            chans = noise.gate_product_channels()
            qubits = e.qubits
        for local, p in chans:
            sigma = _embed(local, qubits, circuit.n)
            out.append(PropagatedChannel(pos, sigma, propagate_error(circuit, pos + 1, sigma), p))
    return out


def pauli_noise_expectation(circuit: Circuit, channels: Sequence[PropagatedChannel]) -> float:
    """``f_C * prod_k (1 - 2 p_k)**t_k`` with ``t_k = 1`` iff the propagated error anticommutes with Q."""
    f = ideal_expectation(circuit)
    if f == 0:
        return 0.0
    q = circuit.observable
    log_y = 0.0
    for ch in channels:
        if ch.probability >= 0.5:
            raise ValueError("channel probability must be < 1/2")
        if not ch.propagated.commutes(q):
            log_y += np.log1p(-2.0 * ch.probability)
    return f * float(np.exp(log_y))


# --------------------------------------------------------------------------
# Fast exact Pauli-noise expectation
# --------------------------------------------------------------------------


def _product_of_factors(factors: np.ndarray) -> np.ndarray:
    """Row-wise product computed as a signed sum of logs."""
    neg = np.count_nonzero(factors < 0, axis=1) & 1
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(factors)).sum(axis=1)
    return np.where(neg, -1.0, 1.0) * np.exp(logs)


def noise_factors(frame: CircuitFrame, indices: np.ndarray, noise: NoiseModel, inverse_lambda: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(f_C, y_C / f_C)`` for a batch of Clifford bindings under Pauli noise.

    ``inverse_lambda`` appends the error-cancellation inverse map after every
    two-qubit gate.
    """
    indices = np.asarray(indices, dtype=np.int64)
    res = heisenberg_sweep(frame, indices)
    f = res.ideal
    bsz = indices.shape[0]
    if noise.is_global:
        eps = noise.epsilon * noise.r
        fac = np.full(bsz, (1.0 - eps) ** frame.two_qubit_count)
        if inverse_lambda is not None:
            raise ValueError("the inverse map is defined for per-gate noise only")
        return f, fac
    if not noise.is_pauli:
        raise ValueError(f"{noise.kind.value} is not a Pauli model; use the density simulator")
    eig = np.array(noise.gate_eigenvalues(), dtype=float)
    if inverse_lambda is not None:
        eig = eig * inverse_map(inverse_lambda).pauli_eigenvalues()
    factors = eig[res.gate_codes]
    if noise.has_slot_noise:
        slot_eig = noise.slot_eigenvalue_table()[indices]
        slot_factors = np.where(res.slot_codes != 0, slot_eig, 1.0)
        factors = np.concatenate([factors, slot_factors], axis=1)
    return f, _product_of_factors(factors)


def noisy_expectations(frame: CircuitFrame, indices: np.ndarray, noise: NoiseModel, inverse_lambda: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``(f_C, y_C)`` for a batch of Clifford bindings under Pauli noise."""
    f, fac = noise_factors(frame, indices, noise, inverse_lambda)
    return f, f * fac


def noisy_expectation(circuit: Circuit, noise: NoiseModel, inverse_lambda: Optional[float] = None) -> float:
    _, y = noisy_expectations(circuit.frame, _require_clifford(circuit), noise, inverse_lambda)
    return float(y[0])


# --------------------------------------------------------------------------
# Error propagation statistics
# --------------------------------------------------------------------------


def first_qubit_factors(frame: CircuitFrame, indices: np.ndarray, error: PauliString, qubit: int = 0) -> np.ndarray:
    """Local code on ``qubit`` of ``error`` inserted after each two-qubit gate and propagated to the end.

    ``error`` is a two-qubit Pauli on the gate's ordered qubit pair. Two
    backward sweeps (of ``X_q`` and ``Z_q``) give every propagated factor in
    ``O(nN)`` per circuit. Returns shape ``(B, N)``.
    """
    if error.n != 2:
        raise ValueError("error must be a two-qubit Pauli")
    s = error.local_code(0) + 4 * error.local_code(1)
    anti = local_anticommute_table(2)[s]
    hx = heisenberg_sweep(frame, indices, PauliString.single(frame.n, qubit, "X"))
    hz = heisenberg_sweep(frame, indices, PauliString.single(frame.n, qubit, "Z"))
    x_bit = anti[hz.gate_codes]  # anticommutes with Z  <=>  X or Y factor
    z_bit = anti[hx.gate_codes]  # anticommutes with X  <=>  Z or Y factor
    return (x_bit + 2 * z_bit).astype(np.int8)
