"""Error-mitigation formulas, their training, and the covariance bound."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .circuits import Circuit
from .density import evolve_batch, expectations, purity_pairs
from .ics import PhenomenologicalEstimate
from .noise import NoiseModel
from .stabilizer import local_anticommute_table


class FormulaKind(str, Enum):
    PEMI_BASIC = "pemi_basic"
    PEMI_OPTIMAL = "pemi_optimal"
    LINEAR = "linear_extrapolation"
    RICHARDSON = "richardson"
    PEC_INVERSE = "pec_inverse"
    VIRTUAL_DISTILLATION = "virtual_distillation"
    VD_PEMI = "vd_pemi"


@dataclass(frozen=True)
class MitigationFormula:
    """A mitigation formula with its (trained) parameters.

    ``apply`` takes the raw quantities the formula needs: one array for the
    PEMI, PEC and VD+PEMI kinds, one array per noise level for extrapolation,
    and ``(Tr(Q rho^2), Tr(rho^2))`` for virtual distillation.
    """

    kind: FormulaKind
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", FormulaKind(self.kind))

    @classmethod
    def pemi_basic(cls, epsilon0: float) -> MitigationFormula:
        return cls(FormulaKind.PEMI_BASIC, {"epsilon0": epsilon0})

    @classmethod
    def pemi_optimal(cls, epsilon0: float, delta: float) -> MitigationFormula:
        return cls(FormulaKind.PEMI_OPTIMAL, {"epsilon0": epsilon0, "delta": delta})

    @classmethod
    def linear(cls, lam: float) -> MitigationFormula:
        return cls(FormulaKind.LINEAR, {"lambda": lam})

    @classmethod
    def richardson(cls, r_list: Sequence[float], q_list: Optional[Sequence[float]] = None) -> MitigationFormula:
        q = richardson_coefficients(r_list) if q_list is None else np.asarray(q_list, dtype=float)
        return cls(FormulaKind.RICHARDSON, {"r": [float(v) for v in r_list], "q": [float(v) for v in q]})

    @classmethod
    def pec_inverse(cls, lam: float) -> MitigationFormula:
        return cls(FormulaKind.PEC_INVERSE, {"lambda": lam})

    @classmethod
    def virtual_distillation(cls) -> MitigationFormula:
        return cls(FormulaKind.VIRTUAL_DISTILLATION, {"k": 2})

    @classmethod
    def vd_pemi(cls, epsilon0_prime: float) -> MitigationFormula:
        return cls(FormulaKind.VD_PEMI, {"epsilon0": epsilon0_prime})

    def apply(self, *values):
        p = self.params
        k = self.kind
        if k is FormulaKind.PEMI_BASIC:
            return pemi_factor(p["epsilon0"]) * np.asarray(values[0])
        if k is FormulaKind.PEMI_OPTIMAL:
            return pemi_factor(p["epsilon0"], p["delta"]) * np.asarray(values[0])
        if k is FormulaKind.LINEAR:
            return extrapolate_linear(values[0], values[1], p["lambda"])
        if k is FormulaKind.RICHARDSON:
            q = np.asarray(p["q"])
            if len(values) != len(q):
                raise ValueError(f"need {len(q)} noise levels")
            return sum(qi * np.asarray(v) for qi, v in zip(q, values))
        if k is FormulaKind.PEC_INVERSE:
            return np.asarray(values[0])
        if k is FormulaKind.VIRTUAL_DISTILLATION:
            num, den = np.asarray(values[0]), np.asarray(values[1])
            if np.any(den < 1e-12):
                raise ValueError("purity below 1e-12")
            return num / den
        return vd_pemi(values[0], p["epsilon0"])

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "params": self.params}

    @classmethod
    def from_dict(cls, d: dict) -> MitigationFormula:
        return cls(FormulaKind(d["kind"]), dict(d["params"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> MitigationFormula:
        return cls.from_dict(json.loads(text))


# --------------------------------------------------------------------------
# PEMI
# --------------------------------------------------------------------------


def pemi_factor(epsilon0: float, delta: Optional[float] = None) -> float:
    """``1/(1-eps0)``, or ``(1-eps0)/((1-eps0)**2 + Delta**2)`` when ``delta`` is given."""
    if epsilon0 >= 1:
        raise ValueError("epsilon0 >= 1: the signal is lost")
    a = 1.0 - epsilon0
    if delta is None:
        return 1.0 / a
    return a / (a * a + delta * delta)


def pemi(y, est: PhenomenologicalEstimate, optimal: bool = False):
    return pemi_factor(est.epsilon0, est.delta if optimal else None) * np.asarray(y)


# --------------------------------------------------------------------------
# Extrapolation
# --------------------------------------------------------------------------


def extrapolate_linear(y1, y2, lam: float):
    return lam * np.asarray(y1) + (1.0 - lam) * np.asarray(y2)


def train_lambda_single(y_t1: float, y_t2: float, f_t: float, tol: float = 1e-12) -> float:
    """``lambda*`` making the linear formula exact on one training circuit."""
    d = y_t1 - y_t2
    if abs(d) < tol:
        raise ValueError("degenerate training circuit: y_T1 == y_T2")
    return (f_t - y_t2) / d


def train_lambda(y1, y2, f, weights=None) -> float:
    """Least-squares ``lambda`` over a training set (weighted)."""
    y1, y2, f = (np.asarray(v, dtype=float) for v in (y1, y2, f))
    w = np.ones_like(f) if weights is None else np.asarray(weights, dtype=float)
    d = y1 - y2
    den = float((w * d * d).sum())
    if den < 1e-300:
        raise ValueError("degenerate training set: y1 == y2 everywhere")
    return float((w * (f - y2) * d).sum() / den)


def train_lambda_resampled(draw: Callable[[], tuple], max_attempts: int = 10) -> float:
    """``train_lambda`` on sets from ``draw()``, redrawing degenerate sets.

    ``draw`` returns ``(y1, y2, f)`` or ``(y1, y2, f, weights)``.
    """
    for _ in range(max_attempts):
        try:
            return train_lambda(*draw())
        except ValueError:
            continue
    raise ValueError(f"training set degenerate after {max_attempts} draws")


def optimal_lambda_from_rates(eps1: float, eps2: float) -> float:
    """``eps2 / (eps2 - eps1)``: cancels the average rates of the two noise levels."""
    if eps1 == eps2:
        raise ValueError("equal rates give no extrapolation")
    return eps2 / (eps2 - eps1)


def richardson_coefficients(r_list: Sequence[float], m: Optional[int] = None) -> np.ndarray:
    """Solve ``sum q = 1`` and ``sum q r**k = 0`` for ``k = 1..m`` (default ``m = len(r) - 1``)."""
    r = np.asarray(r_list, dtype=float)
    m = len(r) - 1 if m is None else m
    if m + 1 != len(r):
        raise ValueError("need exactly m + 1 amplification factors")
    if np.any(r <= 0):
        raise ValueError("amplification factors must be positive")
    if len(np.unique(r)) != len(r):
        raise ValueError("amplification factors must be distinct")
    v = np.vander(r, m + 1, increasing=True).T
    rhs = np.zeros(m + 1)
    rhs[0] = 1.0
    return np.linalg.solve(v, rhs)


# --------------------------------------------------------------------------
# Global-depolarising closed forms
# --------------------------------------------------------------------------


def global_raw(f, eps: float, n_gates: int):
    return (1.0 - eps) ** n_gates * np.asarray(f)


def global_lambda_star(eps: float, n_gates: int) -> float:
    a, b = (1.0 - eps) ** n_gates, (1.0 - 2.0 * eps) ** n_gates
    return (1.0 - b) / (a - b)


def global_pec(y1, eps: float, n_gates: int):
    """Quasi-probability formula; every term with a replaced gate vanishes."""
    return np.asarray(y1) / (1.0 - eps) ** n_gates


def global_vd_factor(eps_t: float, n: int) -> float:
    a = 1.0 - eps_t
    num = a * a + 2.0 ** (1 - n) * a * eps_t
    return num / (num + 2.0 ** (-n) * eps_t * eps_t)


# --------------------------------------------------------------------------
# Error cancellation
# --------------------------------------------------------------------------


def pec_mitigate(circuit: Circuit, noise: NoiseModel, lam: float) -> float:
    """Expectation with the inverse map applied after every noisy two-qubit gate."""
    rho = evolve_batch(circuit.frame, circuit.slot_matrices()[None], noise, inverse_lambda=lam)
    return float(expectations(rho, circuit.observable)[0])


def pec_lambda_heuristic(eps_d: float, eps_z: float) -> float:
    """``-16 eps_d/(15 - 16 eps_d) - 2 eps_z`` for depolarising plus dephasing noise."""
    return -16.0 * eps_d / (15.0 - 16.0 * eps_d) - 2.0 * eps_z


def optimize_lambda(loss: Callable[[float], float], bounds: tuple[float, float] = (-0.2, 0.0), tol: float = 1e-6) -> float:
    """Bounded scalar minimisation of a training loss."""
    res = minimize_scalar(loss, bounds=bounds, method="bounded", options={"xatol": tol})
    return float(res.x)


def pec_quasi_probabilities(lam: float) -> np.ndarray:
    """Weights of the inverse map over the 16 local Paulis (identity first)."""
    q = np.full(16, lam / 16.0)
    q[0] = 1.0 - 15.0 * lam / 16.0
    return q


def pec_sample_clifford(
    gate_codes: np.ndarray,
    f: np.ndarray,
    factors: np.ndarray,
    lam: float,
    shots: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float]:
    """Monte Carlo error cancellation for Clifford circuits under Pauli noise.

    ``gate_codes``/``f``/``factors`` come from a Heisenberg sweep (see
    ``stabilizer.noise_factors``). Each shot inserts one sampled Pauli after
    every gate; a Pauli anticommuting with the local Heisenberg observable flips
    the sign. Returns the per-circuit estimates and the sampling cost
    ``gamma**N``.
    """
    q = pec_quasi_probabilities(lam)
    gamma = float(np.abs(q).sum())
    probs = np.abs(q) / gamma
    signs = np.sign(q)
    anti = local_anticommute_table(2)
    bsz, n_gates = gate_codes.shape
    est = np.empty(bsz)
    for b in range(bsz):
        draws = rng.choice(16, size=(shots, n_gates), p=probs)
        s = np.prod(signs[draws], axis=1) * np.where(anti[draws, gate_codes[b]].sum(axis=1) & 1, -1.0, 1.0)
        est[b] = f[b] * factors[b] * gamma**n_gates * s.mean()
    return est, gamma**n_gates


# --------------------------------------------------------------------------
# Virtual distillation
# --------------------------------------------------------------------------


def virtual_distillation_values(frame, slot_unitaries: np.ndarray, noise: Optional[NoiseModel]) -> np.ndarray:
    rho = evolve_batch(frame, slot_unitaries, noise)
    num, den = purity_pairs(rho, frame.observable)
    if np.any(den < 1e-12):
        raise ValueError("purity below 1e-12")
    return num / den


def virtual_distillation(circuit: Circuit, noise: Optional[NoiseModel]) -> float:
    """Second-order distilled value ``Tr(Q rho^2) / Tr(rho^2)``."""
    return float(virtual_distillation_values(circuit.frame, circuit.slot_matrices()[None], noise)[0])


def train_vd_pemi(f_train, yprime_train, weights=None) -> float:
    """``eps0'`` of the distilled virtual machine from error-sensitive circuits."""
    f = np.asarray(f_train, dtype=float)
    yp = np.asarray(yprime_train, dtype=float)
    w = np.ones_like(f) if weights is None else np.asarray(weights, dtype=float)
    return float(1.0 - (w * yp * f).sum() / w.sum())


def vd_pemi(yprime, epsilon0_prime: float):
    """``y'' = y' / (1 - eps0')``."""
    if epsilon0_prime >= 1:
        raise ValueError("epsilon0' >= 1: the signal is lost")
    return np.asarray(yprime) / (1.0 - epsilon0_prime)


# --------------------------------------------------------------------------
# Covariance bound
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CovarianceEstimate:
    """``E_i = 1 - eps_i``, fluctuation covariance ``K`` and ``eta`` for several noise levels."""

    E: np.ndarray
    K: np.ndarray
    eta: float

    def __post_init__(self):
        e = np.asarray(self.E, dtype=float)
        k = np.asarray(self.K, dtype=float)
        k = 0.5 * (k + k.T)
        if k.shape != (len(e), len(e)):
            raise ValueError("K must be square with the size of E")
        if np.linalg.eigvalsh(k).min() < -1e-9:
            raise ValueError("K is not positive semi-definite")
        object.__setattr__(self, "E", e)
        object.__setattr__(self, "K", k)

    @classmethod
    def from_unitary(cls, f, ys: Sequence[Sequence[float]]) -> CovarianceEstimate:
        """Exact ``f**2``-weighted moments over a unitary circuit set.

        With ``y_i = (1 - eps_{C,i}) f``: ``E_i = <f y_i>/<f^2>`` and
        ``K_ij = <y_i y_j>/<f^2> - E_i E_j``.
        """
        f = np.asarray(f, dtype=float)
        y = np.asarray(ys, dtype=float)
        eta = float(np.mean(f * f))
        e = (y * f).mean(axis=1) / eta
        k = (y @ y.T) / len(f) / eta - np.outer(e, e)
        return cls(e, k, eta)

    @classmethod
    def from_es_samples(cls, f, ys: Sequence[Sequence[float]], weights=None, eta: Optional[float] = None) -> CovarianceEstimate:
        """Weighted moments of ``1 - y_i f`` over error-sensitive samples."""
        f = np.asarray(f, dtype=float)
        y = np.asarray(ys, dtype=float)
        w = np.ones_like(f) if weights is None else np.asarray(weights, dtype=float)
        a = y * f
        e = (a * w).sum(axis=1) / w.sum()
        dev = a - e[:, None]
        k = (dev * w) @ dev.T / w.sum()
        return cls(e, k, float(w.mean()) if eta is None else eta)

    def rmse(self, q: Sequence[float]) -> float:
        """``sqrt(eta [(E.q - 1)**2 + q.K.q])`` for coefficients ``q``."""
        q = np.asarray(q, dtype=float)
        return float(np.sqrt(self.eta * ((self.E @ q - 1.0) ** 2 + q @ self.K @ q)))

    def optimal_q(self) -> np.ndarray:
        """Unconstrained minimiser ``(K + E E^T)^+ E``."""
        return np.linalg.pinv(self.K + np.outer(self.E, self.E)) @ self.E


def theorem1_bound(est: CovarianceEstimate) -> tuple[float, float]:
    """``sqrt(eta E.K.E)/|E|**2`` and ``sqrt(eta sum Delta_i**2)/|E|``."""
    norm2 = float(est.E @ est.E)
    if norm2 == 0:
        raise ValueError("E is zero")
    b1 = np.sqrt(max(est.eta * float(est.E @ est.K @ est.E), 0.0)) / norm2
    b2 = np.sqrt(max(est.eta * float(np.trace(est.K)), 0.0)) / np.sqrt(norm2)
    return float(b1), float(b2)
