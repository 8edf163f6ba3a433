"""Signed Pauli strings and the single-qubit Clifford group.

Pauli strings are stored in symplectic form as two integer bitmasks (bit ``q``
of ``x``/``z`` belongs to qubit ``q``) plus a power of ``i``. The operator is

    i**phase * P_0 (x) P_1 (x) ... (x) P_{n-1}

with ``P_q`` the *Hermitian* single-qubit Pauli selected by ``(x_q, z_q)``:
``(0,0)->I, (1,0)->X, (1,1)->Y, (0,1)->Z``. Qubit 0 is the leftmost tensor
factor and the leftmost character of the text form.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

_CHARS = "IXZY"  # indexed by local code c = x + 2*z
_CODE = {"I": 0, "X": 1, "Z": 2, "Y": 3}

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = (I2, X2, Z2, Y2)  # indexed by local code

H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S2 = np.array([[1, 0], [0, 1j]], dtype=complex)

CZ4 = np.diag([1, 1, 1, -1]).astype(complex)
CNOT4 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """An ``n``-qubit Pauli operator with a phase in ``{1, i, -1, -i}``."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be nonnegative")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("bitmask has bits outside the register")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_str(cls, text: str) -> PauliString:
        """Parse ``"-XIZ"``, ``"+ZZ"``, ``"iXY"`` or ``"-iZ"``."""
        s = text.strip()
        phase = 0
        if s.startswith("+"):
            s = s[1:]
        elif s.startswith("-"):
            phase = 2
            s = s[1:]
        if s.startswith("i"):
            phase += 1
            s = s[1:]
        x = z = 0
        for q, ch in enumerate(s):
            try:
                c = _CODE[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r} in {text!r}") from None
            x |= (c & 1) << q
            z |= ((c >> 1) & 1) << q
        return cls(len(s), x, z, phase)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, label: str) -> PauliString:
        c = _CODE[label]
        return cls(n, (c & 1) << qubit, ((c >> 1) & 1) << qubit)

    def __str__(self) -> str:
        prefix = ("+", "+i", "-", "-i")[self.phase]
        return prefix + "".join(self.single_factor(q) for q in range(self.n))

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def local_code(self, qubit: int) -> int:
        return ((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)

    def single_factor(self, qubit: int) -> str:
        return _CHARS[self.local_code(qubit)]

    @property
    def x_bits(self) -> np.ndarray:
        return np.array([(self.x >> q) & 1 for q in range(self.n)], dtype=np.uint8)

    @property
    def z_bits(self) -> np.ndarray:
        return np.array([(self.z >> q) & 1 for q in range(self.n)], dtype=np.uint8)

    @property
    def sign(self) -> int:
        if not self.hermitian():
            raise ValueError(f"{self} is not Hermitian")
        return 1 if self.phase == 0 else -1

    def hermitian(self) -> bool:
        return self.phase in (0, 2)

    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def is_identity(self) -> bool:
        return (self.x | self.z) == 0

    def unsigned(self) -> PauliString:
        return PauliString(self.n, self.x, self.z, 0)

    def commutes(self, other: PauliString) -> bool:
        _check_n(self, other)
        return anticommute_bits(self.x, self.z, other.x, other.z) == 0

    def __neg__(self) -> PauliString:
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    def to_matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for q in range(self.n):
            out = np.kron(out, PAULI_MATRICES[self.local_code(q)])
        return (1j**self.phase) * out


def _check_n(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise ValueError(f"qubit count mismatch: {p.n} vs {q.n}")


def anticommute_bits(x1: int, z1: int, x2: int, z2: int) -> int:
    """Symplectic inner product of two Paulis given as bitmasks (0 or 1)."""
    return _popcount((x1 & z2) ^ (z1 & x2)) & 1


def product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Power of ``i`` picked up when multiplying two Hermitian Pauli strings."""
    ax, ay, az = x1 & ~z1, x1 & z1, ~x1 & z1
    bx, by, bz = x2 & ~z2, x2 & z2, ~x2 & z2
    plus = _popcount(ax & by) + _popcount(ay & bz) + _popcount(az & bx)
    minus = _popcount(ax & bz) + _popcount(ay & bx) + _popcount(az & by)
    return (plus - minus) % 4


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Group product ``p @ q`` including the phase."""
    _check_n(p, q)
    ph = p.phase + q.phase + product_phase(p.x, p.z, q.x, q.z)
    return PauliString(p.n, p.x ^ q.x, p.z ^ q.z, ph)


# --------------------------------------------------------------------------
# Conjugation tables
# --------------------------------------------------------------------------


def _decompose_signed(m: np.ndarray, basis: list[np.ndarray]) -> tuple[int, int]:
    """Return (index, sign) with ``m == sign * basis[index]``."""
    dim = m.shape[0]
    for idx, b in enumerate(basis):
        c = np.trace(b.conj().T @ m) / dim
        if abs(abs(c) - 1) < 1e-9:
            if abs(c - 1) < 1e-9:
                return idx, 1
            if abs(c + 1) < 1e-9:
                return idx, -1
            raise ValueError("conjugation produced a non-Hermitian Pauli")
    raise ValueError("matrix is not a signed Pauli operator")


def _local_basis(k: int) -> list[np.ndarray]:
    # code for k qubits: c_0 + 4*c_1 + ..., qubit 0 is the first tensor factor
    out = []
    for code in range(4**k):
        m = np.ones((1, 1), dtype=complex)
        for j in range(k):
            m = np.kron(m, PAULI_MATRICES[(code >> (2 * j)) & 3])
        out.append(m)
    return out


def conjugation_table(u: np.ndarray) -> tuple[tuple[int, int], ...]:
    """Table ``code -> (code', flip)`` for ``P -> u P u^dag`` with flip in {0, 1}."""
    k = int(round(np.log2(u.shape[0])))
    basis = _local_basis(k)
    table = []
    for b in basis:
        idx, s = _decompose_signed(u @ b @ u.conj().T, basis)
        table.append((idx, 0 if s == 1 else 1))
    return tuple(table)


def _c1_key(u: np.ndarray) -> tuple:
    t = conjugation_table(u)
    return (t[1], t[2])  # images of X and Z fix the element up to phase


@lru_cache(maxsize=None)
def _c1_group() -> tuple[tuple[np.ndarray, ...], tuple, tuple]:
    mats: list[np.ndarray] = [I2.copy()]
    seen = {_c1_key(I2): 0}
    queue = deque([0])
    while queue:
        g = mats[queue.popleft()]
        for gen in (H2, S2):
            new = gen @ g
            key = _c1_key(new)
            if key not in seen:
                seen[key] = len(mats)
                mats.append(new)
                queue.append(len(mats) - 1)
    if len(mats) != 24:
        raise RuntimeError(f"C1 closure produced {len(mats)} elements")
    fwd = tuple(conjugation_table(m) for m in mats)
    inv = tuple(conjugation_table(m.conj().T) for m in mats)
    for m in mats:
        m.setflags(write=False)
    return tuple(mats), fwd, inv


def c1_matrix(index: int) -> np.ndarray:
    """Canonical 2x2 matrix of the ``index``-th single-qubit Clifford."""
    return _c1_group()[0][index]


def c1_matrices() -> np.ndarray:
    return np.array(_c1_group()[0])


def c1_table(index: int, inverse: bool = False) -> tuple[tuple[int, int], ...]:
    grp = _c1_group()
    return grp[2][index] if inverse else grp[1][index]


def c1_index(u: np.ndarray) -> int:
    """Index of the C1 element equal to ``u`` up to a global phase."""
    key = _c1_key(np.asarray(u, dtype=complex))
    for k, m in enumerate(_c1_group()[0]):
        if _c1_key(m) == key:
            return k
    raise ValueError("matrix is not a single-qubit Clifford")


C1_SIZE = 24
C1_IDENTITY = 0
C1_H = c1_index(H2)
C1_S = c1_index(S2)
C1_X = c1_index(X2)
C1_Y = c1_index(Y2)
C1_Z = c1_index(Z2)

CZ_TABLE = conjugation_table(CZ4)
CNOT_TABLE = conjugation_table(CNOT4)


@lru_cache(maxsize=None)
def cliffords_mapping_to_z(label: str) -> frozenset[int]:
    """All ``R`` in C1 with ``R^dag P R`` equal to ``+Z`` or ``-Z``.

    For ``P = I`` every element qualifies.
    """
    c = _CODE[label]
    if c == 0:
        return frozenset(range(C1_SIZE))
    return frozenset(k for k in range(C1_SIZE) if c1_table(k, inverse=True)[c][0] == _CODE["Z"])


# --------------------------------------------------------------------------
# Gates
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SingleQubitClifford:
    index: int
    qubit: int

    def __post_init__(self):
        if not 0 <= self.index < C1_SIZE:
            raise ValueError(f"C1 index {self.index} out of range")
        if self.qubit < 0:
            raise ValueError("negative qubit index")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)

    def matrix(self) -> np.ndarray:
        return c1_matrix(self.index)


@dataclass(frozen=True)
class CZ:
    a: int
    b: int

    def __post_init__(self):
        if self.a == self.b or min(self.a, self.b) < 0:
            raise ValueError(f"invalid CZ qubits ({self.a}, {self.b})")

    @property
    def qubits(self) -> tuple[int, int]:
        return (self.a, self.b)

    def matrix(self) -> np.ndarray:
        return CZ4

    def table(self):
        return CZ_TABLE


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target or min(self.control, self.target) < 0:
            raise ValueError(f"invalid CNOT qubits ({self.control}, {self.target})")

    @property
    def qubits(self) -> tuple[int, int]:
        return (self.control, self.target)

    def matrix(self) -> np.ndarray:
        return CNOT4

    def table(self):
        return CNOT_TABLE


TwoQubitGate = Union[CZ, CNOT]
CliffordGate = Union[SingleQubitClifford, CZ, CNOT]


# Low-level kernels on raw (x, z, phase) triples; the hot loops of the
# stabilizer engine call these directly.


def conj1(table, q: int, x: int, z: int, ph: int) -> tuple[int, int, int]:
    c = ((x >> q) & 1) | (((z >> q) & 1) << 1)
    nc, flip = table[c]
    m = 1 << q
    x = (x & ~m) | ((nc & 1) << q)
    z = (z & ~m) | (((nc >> 1) & 1) << q)
    return x, z, ph + 2 * flip


def conj2(table, a: int, b: int, x: int, z: int, ph: int) -> tuple[int, int, int]:
    c = ((x >> a) & 1) | (((z >> a) & 1) << 1) | (((x >> b) & 1) << 2) | (((z >> b) & 1) << 3)
    nc, flip = table[c]
    ma, mb = 1 << a, 1 << b
    x = (x & ~(ma | mb)) | ((nc & 1) << a) | (((nc >> 2) & 1) << b)
    z = (z & ~(ma | mb)) | (((nc >> 1) & 1) << a) | (((nc >> 3) & 1) << b)
    return x, z, ph + 2 * flip


def conjugate(gate: CliffordGate, p: PauliString, inverse: bool = False) -> PauliString:
    """Return ``g p g^dag`` (or ``g^dag p g`` when ``inverse``)."""
    if max(gate.qubits) >= p.n:
        raise ValueError(f"gate {gate} acts outside a {p.n}-qubit register")
    if isinstance(gate, SingleQubitClifford):
        x, z, ph = conj1(c1_table(gate.index, inverse), gate.qubit, p.x, p.z, p.phase)
    else:
        a, b = gate.qubits
        x, z, ph = conj2(gate.table(), a, b, p.x, p.z, p.phase)
    return PauliString(p.n, x, z, ph)
