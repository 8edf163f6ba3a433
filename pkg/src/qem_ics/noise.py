"""Noise channels and the per-gate error models.

Two-qubit channels act on the ordered qubit pair of the gate: the first gate
qubit is the first tensor factor (local Pauli code ``c_a + 4 * c_b``).
Superoperators act on row-major ``vec(rho)``, so a Kraus operator ``K``
contributes ``kron(K, K.conj())``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property, lru_cache
from typing import Optional, Sequence

import numpy as np

from .pauli import (
    C1_SIZE,
    PAULI_MATRICES,
    PauliString,
    anticommute_bits,
    c1_matrix,
)

_RATE_TOL = 1e-12
I1 = np.eye(2, dtype=complex)


def _local_pauli(arity: int, code: int) -> PauliString:
    x = z = 0
    for j in range(arity):
        c = (code >> (2 * j)) & 3
        x |= (c & 1) << j
        z |= ((c >> 1) & 1) << j
    return PauliString(arity, x, z)


def _local_matrix(arity: int, code: int) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for j in range(arity):
        m = np.kron(m, PAULI_MATRICES[(code >> (2 * j)) & 3])
    return m


@lru_cache(maxsize=None)
def _sign_matrix(arity: int) -> np.ndarray:
    """``S[s, t] = (-1)**<s, t>`` over local Pauli codes."""
    dim = 4**arity
    out = np.empty((dim, dim))
    ps = [_local_pauli(arity, c) for c in range(dim)]
    for s, ps_ in enumerate(ps):
        for t, pt in enumerate(ps):
            out[s, t] = -1.0 if anticommute_bits(ps_.x, ps_.z, pt.x, pt.z) else 1.0
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Channel:
    """A linear map on ``arity`` qubits.

    ``pauli_form`` maps local Pauli codes to (quasi-)probabilities and is set iff
    the channel is a Pauli channel. ``completely_positive`` is False only for the
    inverse map used by error cancellation, which has no Kraus form.
    """

    arity: int
    kraus: tuple[np.ndarray, ...] = ()
    pauli_form: Optional[tuple[tuple[PauliString, float], ...]] = None
    completely_positive: bool = True

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ValueError("channels act on one or two qubits")
        if not self.kraus and self.pauli_form is None:
            raise ValueError("channel needs Kraus operators or a Pauli form")
        if self.completely_positive and not self.kraus:
            raise ValueError("a completely positive channel needs Kraus operators")

    @classmethod
    def from_pauli_probs(cls, arity: int, probs: Sequence[float], completely_positive: bool = True) -> Channel:
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (4**arity,):
            raise ValueError("need one weight per local Pauli")
        form = tuple((_local_pauli(arity, c), float(p)) for c, p in enumerate(probs) if p != 0.0)
        kraus: tuple[np.ndarray, ...] = ()
        if completely_positive:
            if np.any(probs < -_RATE_TOL):
                raise ValueError("negative Pauli probability in a physical channel")
            kraus = tuple(np.sqrt(max(p, 0.0)) * _local_matrix(arity, c) for c, p in enumerate(probs) if p > 0)
        return cls(arity, kraus, form, completely_positive)

    @classmethod
    def from_eigenvalues(cls, arity: int, eigenvalues: Sequence[float], completely_positive: bool = True) -> Channel:
        """Pauli channel with the given Pauli transfer eigenvalues."""
        probs = _sign_matrix(arity) @ np.asarray(eigenvalues, dtype=float) / 4**arity
        return cls.from_pauli_probs(arity, probs, completely_positive)

    @classmethod
    def identity(cls, arity: int) -> Channel:
        return cls.from_pauli_probs(arity, np.eye(4**arity)[0])

    @property
    def is_pauli(self) -> bool:
        return self.pauli_form is not None

    def pauli_probabilities(self) -> np.ndarray:
        if self.pauli_form is None:
            raise ValueError("not a Pauli channel")
        out = np.zeros(4**self.arity)
        for p, w in self.pauli_form:
            out[p.local_code(0) + (4 * p.local_code(1) if self.arity == 2 else 0)] += w
        return out

    def pauli_eigenvalues(self) -> np.ndarray:
        """``lambda_t`` with ``N(t) = lambda_t t`` for every local Pauli ``t``."""
        return _sign_matrix(self.arity) @ self.pauli_probabilities()

    @cached_property
    def superop(self) -> np.ndarray:
        dim = 2**self.arity
        s = np.zeros((dim * dim, dim * dim), dtype=complex)
        if self.kraus:
            for k in self.kraus:
                s += np.kron(k, k.conj())
        else:
            for c, w in enumerate(self.pauli_probabilities()):
                if w:
                    m = _local_matrix(self.arity, c)
                    s += w * np.kron(m, m.conj())
        s.setflags(write=False)
        return s

    def apply(self, rho: np.ndarray) -> np.ndarray:
        dim = 2**self.arity
        return (self.superop @ rho.reshape(-1)).reshape(dim, dim)

    def trace_preservation_error(self) -> float:
        dim = 2**self.arity
        if self.kraus:
            acc = sum(k.conj().T @ k for k in self.kraus)
            return float(np.max(np.abs(acc - np.eye(dim))))
        return abs(float(sum(w for _, w in self.pauli_form)) - 1.0)

    def then(self, other: Channel) -> Channel:
        """The composition ``other o self`` (``self`` acts first)."""
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        if self.is_pauli and other.is_pauli:
            eig = self.pauli_eigenvalues() * other.pauli_eigenvalues()
            return Channel.from_eigenvalues(self.arity, eig, self.completely_positive and other.completely_positive)
        if not (self.kraus and other.kraus):
            raise ValueError("cannot compose a non-CP map with a non-Pauli channel")
        ks = tuple(b @ a for a in self.kraus for b in other.kraus)
        ks = tuple(k for k in ks if np.max(np.abs(k)) > 0)
        return Channel(self.arity, ks)


def _check_rate(name: str, value: float, upper: float = 1.0) -> None:
    if not (-_RATE_TOL <= value <= upper + _RATE_TOL):
        raise ValueError(f"{name}={value} outside [0, {upper}]")


# --------------------------------------------------------------------------
# Channel constructors
# --------------------------------------------------------------------------


def depolarising_eigenvalue(epsilon: float) -> float:
    """Non-identity eigenvalue of the summation-form gate depolarising channel."""
    return 1.0 - 16.0 * epsilon / 15.0


def gate_depolarising(epsilon: float) -> Channel:
    """``(1 - 16 eps/15)[I] + (16 eps/15) D`` on a qubit pair."""
    _check_rate("16*epsilon/15", 16 * epsilon / 15)
    probs = np.full(16, epsilon / 15.0)
    probs[0] = 1.0 - epsilon
    return Channel.from_pauli_probs(2, probs)


def product_form_depolarising(p: float) -> Channel:
    """Product of the 15 single-Pauli channels ``(1-p)[I] + p[s]``."""
    _check_rate("p", p, 0.5)
    eig = np.full(16, (1.0 - 2.0 * p) ** 8)
    eig[0] = 1.0
    return Channel.from_eigenvalues(2, eig)


def matching_product_probability(epsilon: float) -> float:
    """``p`` with ``(1 - 2p)**8 == 1 - 16 eps/15``: the product form equal to the summation form."""
    mu = depolarising_eigenvalue(epsilon)
    if mu < 0:
        raise ValueError("summation-form eigenvalue is negative; no product form exists")
    return 0.5 * (1.0 - mu ** (1.0 / 8.0))


def single_depolarising(eps_s: float) -> Channel:
    """``(1 - 4 eps/3)[I] + (eps/3) sum_P [P]`` on one qubit."""
    _check_rate("4*eps_s/3", 4 * eps_s / 3)
    probs = np.full(4, eps_s / 3.0)
    probs[0] = 1.0 - eps_s
    return Channel.from_pauli_probs(1, probs)


def dephasing(eps_z: float, qubit: int) -> Channel:
    """``(1 - eps)[I] + eps[Z]`` on local qubit ``qubit`` of a pair."""
    _check_rate("eps_z", eps_z)
    probs = np.zeros(16)
    probs[0] = 1.0 - eps_z
    probs[2 << (2 * qubit)] = eps_z
    return Channel.from_pauli_probs(2, probs)


def depol_dephase(eps_d: float, eps_z: float) -> Channel:
    """``Z_2 Z_1 N``: gate depolarising followed by dephasing on both qubits."""
    return gate_depolarising(eps_d).then(dephasing(eps_z, 0)).then(dephasing(eps_z, 1))


def inverse_map(lam: float) -> Channel:
    """``(1 - lam)[I] + lam D`` on a pair; non-CP for ``lam < 0``."""
    eig = np.full(16, 1.0 - lam)
    eig[0] = 1.0
    return Channel.from_eigenvalues(2, eig, completely_positive=False)


def _rotation(theta: float, pauli: np.ndarray) -> np.ndarray:
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * pauli


def amplitude_damping_kraus(eps_a: float) -> tuple[np.ndarray, np.ndarray]:
    _check_rate("eps_a", eps_a)
    k0 = np.array([[1, 0], [0, np.sqrt(1 - eps_a)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(eps_a)], [0, 0]], dtype=complex)
    return k0, k1


@dataclass(frozen=True)
class CompositeParams:
    """Rates of the composite model; index 0/1 refer to the first/second gate qubit."""

    eps_d: float
    eps_z: tuple[float, float]
    theta: tuple[tuple[float, float, float], tuple[float, float, float]]  # (X, Y, Z) angles per qubit
    eps_a: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "eps_z", tuple(float(v) for v in self.eps_z))
        object.__setattr__(self, "theta", tuple(tuple(float(v) for v in t) for t in self.theta))
        object.__setattr__(self, "eps_a", tuple(float(v) for v in self.eps_a))
        _check_rate("16*eps_d/15", 16 * self.eps_d / 15)
        for v in self.eps_z + self.eps_a:
            _check_rate("rate", v)

    @classmethod
    def zero(cls) -> CompositeParams:
        return cls(0.0, (0.0, 0.0), ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)), (0.0, 0.0))

    def scaled(self, r: float) -> CompositeParams:
        return CompositeParams(
            self.eps_d * r,
            tuple(v * r for v in self.eps_z),
            tuple(tuple(v * r for v in t) for t in self.theta),
            tuple(v * r for v in self.eps_a),
        )

    def to_dict(self) -> dict:
        return {
            "eps_d": float(self.eps_d),
            "eps_z": [float(v) for v in self.eps_z],
            "theta": [[float(v) for v in t] for t in self.theta],
            "eps_a": [float(v) for v in self.eps_a],
        }

    @classmethod
    def from_dict(cls, d: dict) -> CompositeParams:
        return cls(float(d["eps_d"]), tuple(d["eps_z"]), tuple(tuple(t) for t in d["theta"]), tuple(d["eps_a"]))


def composite_channel(params: CompositeParams) -> Channel:
    """``A_2 A_1 [R_2] [R_1] Z_2 Z_1 N`` with ``R_i = R_{i,Z} R_{i,Y} R_{i,X}``."""
    ch = gate_depolarising(params.eps_d).then(dephasing(params.eps_z[0], 0)).then(dephasing(params.eps_z[1], 1))
    rots = []
    for t in params.theta:
        u = _rotation(t[2], PAULI_MATRICES[2]) @ _rotation(t[1], PAULI_MATRICES[3]) @ _rotation(t[0], PAULI_MATRICES[1])
        rots.append(u)
    ch = ch.then(Channel(2, (np.kron(rots[0], I1),))).then(Channel(2, (np.kron(I1, rots[1]),)))
    a1 = tuple(np.kron(k, I1) for k in amplitude_damping_kraus(params.eps_a[0]))
    a2 = tuple(np.kron(I1, k) for k in amplitude_damping_kraus(params.eps_a[1]))
    return ch.then(Channel(2, a1)).then(Channel(2, a2))



def sample_composite_params(epsilon: float, rng: np.random.Generator) -> CompositeParams:
    """Draw the composite-model rates for a per-gate budget ``epsilon``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    k = rng.uniform(-1.0, 1.0, size=11)
    e9 = epsilon / 9.0
    return CompositeParams(
        eps_d=(1 + 0.2 * k[0]) * e9,
        eps_z=((1 + 0.2 * k[1]) * e9, (1 + 0.2 * k[2]) * e9),
        theta=(tuple(k[3:6] * e9), tuple(k[6:9] * e9)),
        eps_a=((1 + 0.2 * k[9]) * epsilon / 6.0, (1 + 0.2 * k[10]) * epsilon / 6.0),
    )


def gate_dependent_rate(u: np.ndarray, epsilon: float) -> float:
    """``eps_s = 0.1 eps arccos(|Tr R| / 2) / pi`` for a single-qubit gate ``R``."""
    c = abs(np.trace(u)) / 2.0
    if c > 1 + 1e-9:
        raise ValueError("|Tr R|/2 exceeds 1; matrix is not unitary")
    return 0.1 * epsilon * float(np.arccos(min(c, 1.0))) / np.pi


def gate_dependent_single(u: np.ndarray, epsilon: float) -> Channel:
    return single_depolarising(gate_dependent_rate(np.asarray(u, dtype=complex), epsilon))


def sample_total_error_rate(n_gates: int, rng: np.random.Generator) -> float:
    """Per-gate rate ``10**eta / N`` with ``eta ~ U[-2.5, -0.5]``."""
    if n_gates < 1:
        raise ValueError("gate count must be >= 1")
    return float(10.0 ** rng.uniform(-2.5, -0.5) / n_gates)


# --------------------------------------------------------------------------
# Noise models
# --------------------------------------------------------------------------


class NoiseKind(str, Enum):
    GATE_DEPOLARISING = "gate_depolarising"
    COMPOSITE = "composite"
    GATE_DEPENDENT = "gate_dependent"
    DEPOL_DEPHASE = "depol_dephase"
    GLOBAL_DEPOLARISING = "global_depolarising"


@dataclass(frozen=True)
class NoiseModel:
    """Error model attached to every two-qubit gate (and to slots for gate-dependent noise).

    All first-order rates are multiplied by the amplification factor ``r``.
    ``product_form`` switches the depolarising component to 15 independent
    Pauli channels with ``p = eps/15`` instead of the summation form.
    """

    kind: NoiseKind
    epsilon: float = 0.0
    eps_d: float = 0.0
    eps_z: float = 0.0
    composite: Optional[CompositeParams] = None
    r: float = 1.0
    product_form: bool = False
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.r <= 0:
            raise ValueError("amplification r must be positive")
        if self.kind is NoiseKind.COMPOSITE and self.composite is None:
            raise ValueError("composite model needs parameters")
        # build eagerly so invalid scaled rates fail at construction
        if self.kind is NoiseKind.GLOBAL_DEPOLARISING:
            _check_rate("epsilon", self.epsilon * self.r)
        else:
            self.gate_channel()

    # constructors -----------------------------------------------------------
    @classmethod
    def gate_depolarising(cls, epsilon: float, r: float = 1.0, product_form: bool = False) -> NoiseModel:
        return cls(NoiseKind.GATE_DEPOLARISING, epsilon=epsilon, r=r, product_form=product_form)

    @classmethod
    def composite_model(cls, params: CompositeParams, r: float = 1.0) -> NoiseModel:
        return cls(NoiseKind.COMPOSITE, composite=params, r=r)

    @classmethod
    def gate_dependent(cls, epsilon: float, r: float = 1.0) -> NoiseModel:
        return cls(NoiseKind.GATE_DEPENDENT, epsilon=epsilon, r=r)

    @classmethod
    def depol_dephase(cls, eps_d: float, eps_z: float, r: float = 1.0) -> NoiseModel:
        return cls(NoiseKind.DEPOL_DEPHASE, eps_d=eps_d, eps_z=eps_z, r=r)

    @classmethod
    def global_depolarising(cls, epsilon: float, r: float = 1.0) -> NoiseModel:
        return cls(NoiseKind.GLOBAL_DEPOLARISING, epsilon=epsilon, r=r)

    @classmethod
    def noiseless(cls) -> NoiseModel:
        return cls(NoiseKind.GATE_DEPOLARISING, epsilon=0.0)

    def amplified(self, r: float) -> NoiseModel:
        return replace(self, r=r)

    # channel data -------------------------------------------------------------
    @property
    def is_pauli(self) -> bool:
        return self.kind is not NoiseKind.COMPOSITE

    @property
    def is_global(self) -> bool:
        return self.kind is NoiseKind.GLOBAL_DEPOLARISING

    @property
    def has_slot_noise(self) -> bool:
        return self.kind is NoiseKind.GATE_DEPENDENT

    def _depolarising(self, eps: float) -> Channel:
        if self.product_form:
            return product_form_depolarising(eps / 15.0)
        return gate_depolarising(eps)

    def gate_channel(self) -> Optional[Channel]:
        """Channel after each two-qubit gate; None for global depolarising."""
        if "gate" in self._cache:
            return self._cache["gate"]
        r = self.r
        if self.kind in (NoiseKind.GATE_DEPOLARISING, NoiseKind.GATE_DEPENDENT):
            ch = self._depolarising(self.epsilon * r)
        elif self.kind is NoiseKind.DEPOL_DEPHASE:
            ch = self._depolarising(self.eps_d * r).then(dephasing(self.eps_z * r, 0)).then(dephasing(self.eps_z * r, 1))
        elif self.kind is NoiseKind.COMPOSITE:
            ch = composite_channel(self.composite.scaled(r))
        else:
            ch = None
        self._cache["gate"] = ch
        return ch

    def gate_eigenvalues(self) -> np.ndarray:
        """Pauli transfer eigenvalues of the gate channel, indexed by local code."""
        if "eig" not in self._cache:
            ch = self.gate_channel()
            if ch is None or not ch.is_pauli:
                raise ValueError(f"{self.kind.value} has no per-gate Pauli eigenvalues")
            eig = ch.pauli_eigenvalues()
            eig.setflags(write=False)
            self._cache["eig"] = eig
        return self._cache["eig"]

    def slot_rate(self, gate) -> float:
        """Single-qubit depolarising rate of a slot gate (C1 index or 2x2 unitary)."""
        if not self.has_slot_noise:
            return 0.0
        u = c1_matrix(gate) if isinstance(gate, (int, np.integer)) else gate
        return gate_dependent_rate(u, self.epsilon * self.r)

    def slot_eigenvalue(self, gate) -> float:
        eps_s = self.slot_rate(gate)
        if self.product_form:
            return (1.0 - 2.0 * eps_s / 3.0) ** 2
        return 1.0 - 4.0 * eps_s / 3.0

    def slot_eigenvalue_table(self) -> np.ndarray:
        """Non-identity slot eigenvalue for every C1 index."""
        if "slot" not in self._cache:
            t = np.array([self.slot_eigenvalue(k) for k in range(C1_SIZE)])
            t.setflags(write=False)
            self._cache["slot"] = t
        return self._cache["slot"]

    def slot_channel(self, gate) -> Optional[Channel]:
        if not self.has_slot_noise:
            return None
        mu = self.slot_eigenvalue(gate)
        return Channel.from_eigenvalues(1, [1.0, mu, mu, mu])

    def gate_product_channels(self) -> list[tuple[PauliString, float]]:
        """The gate channel as a product of commuting ``(1-p)[I] + p[s]`` factors."""
        r = self.r
        if self.kind in (NoiseKind.GATE_DEPOLARISING, NoiseKind.GATE_DEPENDENT):
            eps, ez = self.epsilon * r, 0.0
        elif self.kind is NoiseKind.DEPOL_DEPHASE:
            eps, ez = self.eps_d * r, self.eps_z * r
        else:
            raise ValueError(f"{self.kind.value} has no product-form decomposition")
        p = eps / 15.0 if self.product_form else matching_product_probability(eps)
        out = [(_local_pauli(2, c), p) for c in range(1, 16)] if p > 0 else []
        if ez > 0:
            out += [(_local_pauli(2, 2), ez), (_local_pauli(2, 8), ez)]
        return out

    def slot_product_channels(self, gate) -> list[tuple[PauliString, float]]:
        if not self.has_slot_noise:
            return []
        eps_s = self.slot_rate(gate)
        if eps_s == 0:
            return []
        p = eps_s / 3.0 if self.product_form else 0.5 * (1.0 - np.sqrt(1.0 - 4.0 * eps_s / 3.0))
        return [(_local_pauli(1, c), p) for c in (1, 2, 3)]

    def depolarising_component(self) -> float:
        """Amplified rate of the depolarising part (eps or eps_d)."""
        if self.kind is NoiseKind.DEPOL_DEPHASE:
            return self.eps_d * self.r
        if self.kind is NoiseKind.COMPOSITE:
            return self.composite.eps_d * self.r
        return self.epsilon * self.r

    # serialization -------------------------------------------------------------
    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value, "r": self.r}
        if self.kind in (NoiseKind.GATE_DEPOLARISING, NoiseKind.GATE_DEPENDENT, NoiseKind.GLOBAL_DEPOLARISING):
            d["epsilon"] = self.epsilon
        elif self.kind is NoiseKind.DEPOL_DEPHASE:
            d["eps_d"], d["eps_z"] = self.eps_d, self.eps_z
        else:
            d["params"] = self.composite.to_dict()
        if self.product_form:
            d["product_form"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> NoiseModel:
        kind = NoiseKind(d["kind"])
        r = float(d.get("r", 1.0))
        pf = bool(d.get("product_form", False))
        if kind is NoiseKind.COMPOSITE:
            return cls(kind, composite=CompositeParams.from_dict(d["params"]), r=r)
        if kind is NoiseKind.DEPOL_DEPHASE:
            return cls(kind, eps_d=float(d["eps_d"]), eps_z=float(d["eps_z"]), r=r, product_form=pf)
        return cls(kind, epsilon=float(d["epsilon"]), r=r, product_form=pf)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> NoiseModel:
        return cls.from_dict(json.loads(text))


def exact_inverse_lambda(noise: NoiseModel) -> float:
    """``lam`` for which the inverse map cancels the depolarising component exactly.

    Equals ``-16 eps/(15 - 16 eps)`` in summation form.
    """
    eps = noise.depolarising_component()
    if noise.product_form:
        mu = (1.0 - 2.0 * eps / 15.0) ** 8
    else:
        mu = depolarising_eigenvalue(eps)
    return 1.0 - 1.0 / mu
