"""Circuit frames, bound circuits, the three frame families and JSON I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from .pauli import (
    C1_SIZE,
    CNOT,
    CZ,
    PauliString,
    TwoQubitGate,
    c1_matrices,
    c1_matrix,
)


@dataclass(frozen=True)
class Slot:
    """Placeholder for a variable single-qubit gate on ``qubit``."""

    qubit: int


FrameElement = Union[CZ, CNOT, Slot]
SlotGate = Union[int, np.ndarray]


@dataclass(frozen=True, eq=False)
class CircuitFrame:
    """Fixed two-qubit Clifford pattern with single-qubit slots.

    The first ``n`` elements must be ``Slot(0) ... Slot(n-1)``: the layer right
    after initialisation that error-sensitive generation rewrites.
    """

    n: int
    elements: tuple[FrameElement, ...]
    observable: PauliString

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.observable.n != self.n:
            raise ValueError("observable size does not match the register")
        if not self.observable.hermitian():
            raise ValueError("observable must be Hermitian")
        head = self.elements[: self.n]
        if len(head) < self.n or any(not isinstance(e, Slot) or e.qubit != q for q, e in enumerate(head)):
            raise ValueError("frame must start with one slot per qubit in qubit order")
        for e in self.elements:
            qs = (e.qubit,) if isinstance(e, Slot) else e.qubits
            if max(qs) >= self.n:
                raise ValueError(f"{e} acts outside a {self.n}-qubit register")
            if not isinstance(e, (Slot, CZ, CNOT)):
                raise TypeError(f"unsupported frame element {e!r}")
        last: dict[int, FrameElement] = {}
        for e in self.elements:
            for q in (e.qubit,) if isinstance(e, Slot) else e.qubits:
                last[q] = e
        if any(not isinstance(e, Slot) for e in last.values()):
            raise ValueError("every qubit must end with a slot before measurement")
        slot_qubits = tuple(e.qubit for e in self.elements if isinstance(e, Slot))
        object.__setattr__(self, "_slot_qubits", slot_qubits)

    @property
    def slot_qubits(self) -> tuple[int, ...]:
        return self._slot_qubits

    @property
    def n_slots(self) -> int:
        return len(self._slot_qubits)

    @property
    def two_qubit_gates(self) -> list[TwoQubitGate]:
        return [e for e in self.elements if not isinstance(e, Slot)]

    @property
    def two_qubit_count(self) -> int:
        return len(self.elements) - self.n_slots

    def __eq__(self, other):
        if not isinstance(other, CircuitFrame):
            return NotImplemented
        return (self.n, self.elements, self.observable) == (other.n, other.elements, other.observable)

    def __hash__(self):
        return hash((self.n, self.elements, self.observable))

    def to_dict(self) -> dict:
        return {"n": self.n, "observable": str(self.observable), "elements": [_element_to_dict(e) for e in self.elements]}

    @classmethod
    def from_dict(cls, d: dict) -> CircuitFrame:
        return cls(int(d["n"]), tuple(_element_from_dict(e) for e in d["elements"]), PauliString.from_str(d["observable"]))


def _element_to_dict(e: FrameElement) -> dict:
    if isinstance(e, Slot):
        return {"slot": e.qubit}
    if isinstance(e, CZ):
        return {"cz": [e.a, e.b]}
    return {"cnot": [e.control, e.target]}


def _element_from_dict(d: dict) -> FrameElement:
    if "slot" in d:
        return Slot(int(d["slot"]))
    if "cz" in d:
        return CZ(*map(int, d["cz"]))
    if "cnot" in d:
        return CNOT(*map(int, d["cnot"]))
    raise ValueError(f"unknown frame element {d!r}")


@dataclass(frozen=True, eq=False)
class Circuit:
    """A frame with every slot bound to a C1 index or a 2x2 unitary."""

    frame: CircuitFrame
    slot_gates: tuple[SlotGate, ...]

    def __post_init__(self):
        gates = []
        for g in self.slot_gates:
            if isinstance(g, (int, np.integer)):
                if not 0 <= int(g) < C1_SIZE:
                    raise ValueError(f"C1 index {g} out of range")
                gates.append(int(g))
            else:
                u = np.array(g, dtype=complex)
                if u.shape != (2, 2):
                    raise ValueError("slot unitary must be 2x2")
                if not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12, rtol=0):
                    raise ValueError("slot gate is not unitary")
                u.setflags(write=False)
                gates.append(u)
        if len(gates) != self.frame.n_slots:
            raise ValueError(f"expected {self.frame.n_slots} slot gates, got {len(gates)}")
        object.__setattr__(self, "slot_gates", tuple(gates))

    @property
    def n(self) -> int:
        return self.frame.n

    @property
    def observable(self) -> PauliString:
        return self.frame.observable

    def is_clifford(self) -> bool:
        return all(isinstance(g, int) for g in self.slot_gates)

    def clifford_indices(self) -> np.ndarray:
        if not self.is_clifford():
            raise ValueError("circuit has non-Clifford slot gates")
        return np.array(self.slot_gates, dtype=np.int64)

    def slot_matrices(self) -> np.ndarray:
        out = np.empty((len(self.slot_gates), 2, 2), dtype=complex)
        for j, g in enumerate(self.slot_gates):
            out[j] = c1_matrix(g) if isinstance(g, int) else g
        return out

    def pattern(self) -> tuple[int, ...]:
        """Slot gates after the first layer (C1 indices)."""
        return tuple(self.clifford_indices()[self.n :].tolist())

    def to_dict(self) -> dict:
        d = self.frame.to_dict()
        slots = []
        for g in self.slot_gates:
            if isinstance(g, int):
                slots.append({"c1": g})
            else:
                slots.append({"u": [[float(v.real), float(v.imag)] for v in g.reshape(-1)]})
        d["slots"] = slots
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Circuit:
        frame = CircuitFrame.from_dict(d)
        gates: list[SlotGate] = []
        for s in d["slots"]:
            if "c1" in s:
                gates.append(int(s["c1"]))
            else:
                gates.append(np.array([complex(re, im) for re, im in s["u"]]).reshape(2, 2))
        return cls(frame, tuple(gates))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> Circuit:
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        if self.frame != other.frame or len(self.slot_gates) != len(other.slot_gates):
            return False
        for a, b in zip(self.slot_gates, other.slot_gates):
            if isinstance(a, int) != isinstance(b, int):
                return False
            if isinstance(a, int) and a != b:
                return False
            if not isinstance(a, int) and not np.array_equal(a, b):
                return False
        return True

    __hash__ = None


# --------------------------------------------------------------------------
# Frame families
# --------------------------------------------------------------------------


class FrameKind(str, Enum):
    PERIODIC_CYCLING = "periodic_cycling"
    LINEAR_NETWORK = "linear_network"
    ALL_TO_ALL = "all_to_all"


@dataclass(frozen=True)
class FrameFamily:
    kind: FrameKind
    n: int
    two_qubit_count: int
    seed: int = 0
    gate: str = "cz"  # "cz" or "cnot"
    periodic_wrap: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", FrameKind(self.kind))
        if self.n < 2:
            raise ValueError("frames need at least two qubits")
        if self.two_qubit_count < 1:
            raise ValueError("two_qubit_count must be >= 1")
        if self.kind is FrameKind.PERIODIC_CYCLING and self.n % 2:
            raise ValueError("periodic-cycling frames need an even qubit count")
        if self.gate not in ("cz", "cnot"):
            raise ValueError(f"unknown two-qubit gate {self.gate!r}")


def _periodic_pairs(n: int, wrap: bool) -> list[tuple[int, int]]:
    first = [(2 * i, 2 * i + 1) for i in range(n // 2)]
    second = [(2 * i + 1, (2 * i + 2) % n) for i in range(n // 2)]
    if not wrap:
        second = [p for p in second if p != (n - 1, 0)]
    return first + second


def _random_observable(n: int, rng: np.random.Generator) -> PauliString:
    # I/Z per qubit uniformly; the all-identity draw carries no signal and is redrawn
    while True:
        bits = rng.integers(0, 2, size=n)
        if bits.any():
            z = int(sum(int(b) << q for q, b in enumerate(bits)))
            return PauliString(n, 0, z)


def build_frame(family: FrameFamily) -> CircuitFrame:
    """Frame of ``family.two_qubit_count`` gates with a slot after each gate on both qubits."""
    n = family.n
    rng = np.random.default_rng(family.seed)
    if family.kind is FrameKind.PERIODIC_CYCLING:
        pattern = _periodic_pairs(n, family.periodic_wrap)
        pairs = [pattern[k % len(pattern)] for k in range(family.two_qubit_count)]
        observable = PauliString.single(n, 0, "Z")
    elif family.kind is FrameKind.LINEAR_NETWORK:
        observable = _random_observable(n, rng)
        starts = rng.integers(1, n, size=family.two_qubit_count)
        pairs = [(int(i) - 1, int(i)) for i in starts]
    else:
        observable = _random_observable(n, rng)
        pairs = []
        for _ in range(family.two_qubit_count):
            i, j = rng.choice(n, size=2, replace=False)
            pairs.append((int(i), int(j)))
    gate_cls = CZ if family.gate == "cz" else CNOT
    elements: list[FrameElement] = [Slot(q) for q in range(n)]
    for a, b in pairs:
        elements.append(gate_cls(a, b))
        elements.append(Slot(a))
        elements.append(Slot(b))
    return CircuitFrame(n, tuple(elements), observable)


def frame_from_gates(n: int, gates: Sequence[TwoQubitGate], observable: PauliString | str) -> CircuitFrame:
    """Frame with the standard slot rule for an explicit gate list."""
    if isinstance(observable, str):
        observable = PauliString.from_str(observable)
    elements: list[FrameElement] = [Slot(q) for q in range(n)]
    for g in gates:
        elements.append(g)
        elements.extend(Slot(q) for q in g.qubits)
    return CircuitFrame(n, tuple(elements), observable)


# --------------------------------------------------------------------------
# Binding slots
# --------------------------------------------------------------------------


def haar_unitaries(count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent Haar-random 2x2 unitaries, shape ``(count, 2, 2)``."""
    g = (rng.standard_normal((count, 2, 2)) + 1j * rng.standard_normal((count, 2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def bind_random_unitary(frame: CircuitFrame, rng: np.random.Generator) -> Circuit:
    us = haar_unitaries(frame.n_slots, rng)
    return Circuit(frame, tuple(us))


def bind_random_clifford(frame: CircuitFrame, rng: np.random.Generator) -> Circuit:
    return Circuit(frame, tuple(int(k) for k in rng.integers(0, C1_SIZE, size=frame.n_slots)))


def random_rotations(count: int, max_angle: float, rng: np.random.Generator) -> np.ndarray:
    """Rotations ``exp(-i t/2 n.sigma)`` with ``t ~ U[-max_angle, max_angle]`` and a uniform axis."""
    t = rng.uniform(-max_angle, max_angle, size=count)
    axis = rng.standard_normal((count, 3))
    axis /= np.linalg.norm(axis, axis=1, keepdims=True)
    c, s = np.cos(t / 2), np.sin(t / 2)
    nx, ny, nz = axis.T
    out = np.empty((count, 2, 2), dtype=complex)
    out[:, 0, 0] = c - 1j * s * nz
    out[:, 0, 1] = -1j * s * (nx - 1j * ny)
    out[:, 1, 0] = -1j * s * (nx + 1j * ny)
    out[:, 1, 1] = c + 1j * s * nz
    return out


def bind_near_one_fc(frame: CircuitFrame, rotation_scale: float, rng: np.random.Generator) -> Circuit:
    """Error-sensitive Clifford circuit with every slot perturbed by a small random rotation."""
    if rotation_scale < 0:
        raise ValueError("rotation_scale must be nonnegative")
    from .ics import es_circuit, random_pattern

    base = es_circuit(frame, random_pattern(frame, rng), rng)
    if rotation_scale == 0:
        return base
    rots = random_rotations(frame.n_slots, rotation_scale, rng)
    mats = np.einsum("kij,kjl->kil", rots, base.slot_matrices())
    return Circuit(frame, tuple(mats))


def all_c1_matrices() -> np.ndarray:
    return c1_matrices()


# --------------------------------------------------------------------------
# Dense reference simulation (small n; used as an oracle and for f_C)
# --------------------------------------------------------------------------


def _apply_1q(psi: np.ndarray, n: int, q: int, u: np.ndarray) -> np.ndarray:
    # psi: (B, 2**n), u: (B, 2, 2)
    b = psi.shape[0]
    v = psi.reshape(b, 2**q, 2, 2 ** (n - q - 1))
    return np.matmul(u[:, None], v).reshape(b, -1)


def _diag_cz(n: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(2**n)
    ba = (idx >> (n - 1 - a)) & 1
    bb = (idx >> (n - 1 - b)) & 1
    return np.where(ba & bb, -1.0, 1.0)


def _cnot_perm(n: int, c: int, t: int) -> np.ndarray:
    idx = np.arange(2**n)
    cb = (idx >> (n - 1 - c)) & 1
    return idx ^ (cb << (n - 1 - t))


def statevectors(frame: CircuitFrame, slot_unitaries: np.ndarray) -> np.ndarray:
    """Final states for a batch of bindings; ``slot_unitaries`` has shape ``(B, N_R, 2, 2)``."""
    n = frame.n
    bsz = slot_unitaries.shape[0]
    psi = np.zeros((bsz, 2**n), dtype=complex)
    psi[:, 0] = 1
    j = 0
    for e in frame.elements:
        if isinstance(e, Slot):
            psi = _apply_1q(psi, n, e.qubit, slot_unitaries[:, j])
            j += 1
        elif isinstance(e, CZ):
            psi = psi * _diag_cz(n, e.a, e.b)
        else:
            psi = psi[:, _cnot_perm(n, e.control, e.target)]
    return psi


def pauli_diag_action(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """``P|i> = phase[i] |perm[i]>`` for the computational basis (big-endian qubit 0)."""
    n = p.n
    idx = np.arange(2**n)
    xmask = sum(((p.x >> q) & 1) << (n - 1 - q) for q in range(n))
    perm = idx ^ xmask
    phase = np.full(2**n, 1j**p.phase, dtype=complex)
    for q in range(n):
        bit = (idx >> (n - 1 - q)) & 1
        c = p.local_code(q)
        if c == 2:  # Z
            phase = phase * np.where(bit, -1, 1)
        elif c == 3:  # Y|0> = i|1>, Y|1> = -i|0>
            phase = phase * np.where(bit, -1j, 1j)
    return perm, phase


def ideal_values(frame: CircuitFrame, slot_unitaries: np.ndarray) -> np.ndarray:
    """Exact ``f_C = <psi|Q|psi>`` for a batch of bindings."""
    psi = statevectors(frame, slot_unitaries)
    perm, phase = pauli_diag_action(frame.observable)
    qpsi = np.zeros_like(psi)
    qpsi[:, perm] = psi * phase
    return np.real(np.einsum("bi,bi->b", psi.conj(), qpsi))


def dense_unitary(circuit: Circuit) -> np.ndarray:
    """Full ``2**n`` unitary of the circuit (tests only)."""
    n = circuit.n
    eye = np.eye(2**n, dtype=complex)
    mats = np.broadcast_to(circuit.slot_matrices(), (2**n,) + (circuit.frame.n_slots, 2, 2))
    cols = statevectors_from(circuit.frame, np.ascontiguousarray(mats), eye)
    return cols.T


def statevectors_from(frame: CircuitFrame, slot_unitaries: np.ndarray, psi0: np.ndarray) -> np.ndarray:
    n = frame.n
    psi = psi0.astype(complex).copy()
    j = 0
    for e in frame.elements:
        if isinstance(e, Slot):
            psi = _apply_1q(psi, n, e.qubit, slot_unitaries[:, j])
            j += 1
        elif isinstance(e, CZ):
            psi = psi * _diag_cz(n, e.a, e.b)
        else:
            psi = psi[:, _cnot_perm(n, e.control, e.target)]
    return psi


def ideal_value(circuit: Circuit) -> float:
    return float(ideal_values(circuit.frame, circuit.slot_matrices()[None])[0])

