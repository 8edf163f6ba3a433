"""Importance Clifford sampling of error-sensitive circuits and its estimators."""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence, TextIO

import numpy as np

from .circuits import Circuit, CircuitFrame
from .pauli import C1_SIZE, cliffords_mapping_to_z
from .stabilizer import heisenberg_sweep

_LABELS = "IXZY"  # local code order


@lru_cache(maxsize=None)
def _valid_first_layer() -> tuple[np.ndarray, np.ndarray]:
    """Per local code ``c``: the sorted valid C1 indices (padded to 24) and their count."""
    table = np.zeros((4, C1_SIZE), dtype=np.int64)
    sizes = np.zeros(4, dtype=np.int64)
    for c, label in enumerate(_LABELS):
        valid = sorted(cliffords_mapping_to_z(label))
        table[c, : len(valid)] = valid
        sizes[c] = len(valid)
    return table, sizes


def _check_pattern_shape(frame: CircuitFrame, patterns: np.ndarray) -> np.ndarray:
    patterns = np.asarray(patterns, dtype=np.int64)
    if patterns.ndim == 1:
        patterns = patterns[None]
    if patterns.shape[1] != frame.n_slots - frame.n:
        raise ValueError(f"pattern length must be N_R - n = {frame.n_slots - frame.n}")
    if patterns.size and (patterns.min() < 0 or patterns.max() >= C1_SIZE):
        raise ValueError("pattern entries must be C1 indices")
    return patterns


def random_pattern(frame: CircuitFrame, rng: np.random.Generator) -> np.ndarray:
    """Uniform ``bar-R`` for the slots after the first layer."""
    return rng.integers(0, C1_SIZE, size=frame.n_slots - frame.n)


def pattern_observables(frame: CircuitFrame, patterns: np.ndarray) -> np.ndarray:
    """Local codes of ``Q_U'`` (first layer set to identity), shape ``(B, n)``."""
    patterns = _check_pattern_shape(frame, patterns)
    full = np.concatenate([np.zeros((patterns.shape[0], frame.n), dtype=np.int64), patterns], axis=1)
    return heisenberg_sweep(frame, full).codes


def pattern_weights(frame: CircuitFrame, patterns: np.ndarray) -> np.ndarray:
    return np.count_nonzero(pattern_observables(frame, patterns), axis=1)


def es_indices(frame: CircuitFrame, patterns: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Batched error-sensitive completion of patterns.

    Returns ``(indices, w)``: full slot bindings ``(B, N_R)`` whose first layer
    maps every non-identity ``P'_i`` to ``+-Z``, and the circuit weights.
    """
    patterns = _check_pattern_shape(frame, patterns)
    codes = pattern_observables(frame, patterns)
    table, sizes = _valid_first_layer()
    pick = np.floor(rng.random(codes.shape) * sizes[codes]).astype(np.int64)
    first = table[codes, pick]
    return np.concatenate([first, patterns], axis=1), np.count_nonzero(codes, axis=1)


def es_circuit(frame: CircuitFrame, pattern: Sequence[int], rng: np.random.Generator) -> Circuit:
    """Error-sensitive Clifford circuit for the slot pattern ``bar-R``."""
    idx, _ = es_indices(frame, np.asarray(pattern)[None], rng)
    return Circuit(frame, tuple(int(k) for k in idx[0]))


@dataclass(frozen=True)
class ICSSamples:
    """A batch of error-sensitive circuits of one frame.

    ``weight_factor`` is ``3**-w`` for non-uniform samples and 1 for uniform ones.
    """

    frame: CircuitFrame
    indices: np.ndarray
    w: np.ndarray
    uniform: bool
    acceptance_rate: Optional[float] = None

    @property
    def weight_factor(self) -> np.ndarray:
        if self.uniform:
            return np.ones(len(self.w))
        return 3.0 ** (-self.w.astype(float))

    def __len__(self) -> int:
        return self.indices.shape[0]

    def circuits(self) -> list[Circuit]:
        return [Circuit(self.frame, tuple(int(k) for k in row)) for row in self.indices]

    def eta_estimate(self) -> tuple[float, float]:
        """``(eta, standard error)`` from the weights of the samples."""
        m = len(self)
        if self.uniform:
            v = 3.0 ** self.w.astype(float)
            mean = v.mean()
            se = v.std(ddof=1) / np.sqrt(m) if m > 1 else np.nan
            return float(1.0 / mean), float(se / mean**2)
        v = self.weight_factor
        return float(v.mean()), float(v.std(ddof=1) / np.sqrt(m)) if m > 1 else np.nan


def sample_nonuniform_indices(frame: CircuitFrame, count: int, rng: np.random.Generator) -> ICSSamples:
    """Non-uniform ICS: uniform ``bar-R`` then error-sensitive completion."""
    if count < 1:
        raise ValueError("count must be >= 1")
    patterns = rng.integers(0, C1_SIZE, size=(count, frame.n_slots - frame.n))
    idx, w = es_indices(frame, patterns, rng)
    return ICSSamples(frame, idx, w, uniform=False)


def sample_nonuniform(frame: CircuitFrame, count: int, rng: np.random.Generator) -> list[tuple[Circuit, float]]:
    s = sample_nonuniform_indices(frame, count, rng)
    return list(zip(s.circuits(), s.weight_factor.tolist()))


@dataclass(frozen=True)
class ResampleProposal:
    """Replace ``m`` distinct random slots of ``bar-R`` with uniform C1 draws (symmetric)."""

    m: int

    def propose(self, pattern: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, float]:
        if not 1 <= self.m <= len(pattern):
            raise ValueError(f"m={self.m} outside [1, {len(pattern)}]")
        new = pattern.copy()
        slots = rng.choice(len(pattern), size=self.m, replace=False)
        new[slots] = rng.integers(0, C1_SIZE, size=self.m)
        return new, 0.0

    def probability(self, new: Sequence[int], old: Sequence[int]) -> float:
        """``g(new | old)`` by direct enumeration over slot subsets."""
        new, old = np.asarray(new), np.asarray(old)
        length = len(old)
        subsets = list(itertools.combinations(range(length), self.m))
        total = 0.0
        for sub in subsets:
            fixed = [i for i in range(length) if i not in sub]
            if np.array_equal(new[fixed], old[fixed]):
                total += C1_SIZE ** (-self.m)
        return total / len(subsets)


def default_proposal(m: int) -> ResampleProposal:
    if m < 1:
        raise ValueError("m must be >= 1")
    return ResampleProposal(m)


def sample_uniform_indices(
    frame: CircuitFrame,
    count: int,
    rng: np.random.Generator,
    proposal: Optional[ResampleProposal] = None,
    initial_pattern: Optional[Sequence[int]] = None,
    burn_in: Optional[int] = None,
) -> ICSSamples:
    """Uniform ICS by Metropolis-Hastings on ``bar-R``.

    The target over patterns is proportional to ``3**-w``; the first layer is
    redrawn with every proposal, and rejected steps repeat the previous circuit.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    length = frame.n_slots - frame.n
    if length == 0:
        idx, w = es_indices(frame, np.zeros((count, 0), dtype=np.int64), rng)
        return ICSSamples(frame, idx, w, uniform=True, acceptance_rate=1.0)
    proposal = proposal or default_proposal(1)
    burn_in = 10 * frame.n_slots if burn_in is None else burn_in
    state = random_pattern(frame, rng) if initial_pattern is None else np.asarray(initial_pattern, dtype=np.int64).copy()
    current, w_cur = es_indices(frame, state[None], rng)
    current, w_cur = current[0], int(w_cur[0])
    out = np.empty((count, frame.n_slots), dtype=np.int64)
    ws = np.empty(count, dtype=np.int64)
    accepted = 0
    for t in range(burn_in + count):
        cand, log_g = proposal.propose(state, rng)
        c_idx, c_w = es_indices(frame, cand[None], rng)
        c_w = int(c_w[0])
        log_a = (w_cur - c_w) * np.log(3.0) + log_g
        if log_a >= 0 or rng.random() < np.exp(log_a):
            state, current, w_cur = cand, c_idx[0], c_w
            if t >= burn_in:
                accepted += 1
        if t >= burn_in:
            out[t - burn_in] = current
            ws[t - burn_in] = w_cur
    return ICSSamples(frame, out, ws, uniform=True, acceptance_rate=accepted / count)


def sample_uniform(
    frame: CircuitFrame,
    count: int,
    proposal: Optional[ResampleProposal] = None,
    initial_pattern: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
    burn_in: Optional[int] = None,
) -> list[Circuit]:
    rng = rng if rng is not None else np.random.default_rng()
    return sample_uniform_indices(frame, count, rng, proposal, initial_pattern, burn_in).circuits()


# --------------------------------------------------------------------------
# Estimators
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PhenomenologicalEstimate:
    epsilon0: float
    delta: float
    eta: float
    sample_count: int
    se_epsilon0: float
    se_delta: float
    se_eta: float = float("nan")

    def to_dict(self) -> dict:
        return {k: float(v) if k != "sample_count" else int(v) for k, v in self.__dict__.items()}

    @classmethod
    def from_dict(cls, d: dict) -> PhenomenologicalEstimate:
        return cls(**d)


def weighted_moments(values: np.ndarray, weights: np.ndarray) -> tuple[float, float, float, float]:
    """Self-normalised weighted mean and unbiased variance, each with a delta-method SE."""
    values = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    v1, v2 = w.sum(), (w * w).sum()
    mean = float((w * values).sum() / v1)
    dev = values - mean
    se_mean = float(np.sqrt((w * w * dev * dev).sum()) / v1)
    denom = v1 - v2 / v1
    if denom <= 0:
        return mean, float("nan"), se_mean, float("nan")
    var = float((w * dev * dev).sum() / denom)
    se_var = float(np.sqrt((w * w * (dev * dev - var) ** 2).sum()) / v1)
    return mean, var, se_mean, se_var


def estimate_phenomenological(
    f_values: Sequence[float],
    y_values: Sequence[float],
    weight_factors: Optional[Sequence[float]] = None,
    samples: Optional[ICSSamples] = None,
) -> PhenomenologicalEstimate:
    """``epsilon_0``, ``Delta`` and ``eta`` from error-sensitive samples.

    Pass ``weight_factors`` (``3**-w``) for non-uniform samples; leave them out
    for uniform ones. ``samples`` supplies ``eta`` when given.
    """
    f = np.asarray(f_values, dtype=float)
    y = np.asarray(y_values, dtype=float)
    if f.shape != y.shape or f.ndim != 1:
        raise ValueError("f and y must be equal-length vectors")
    if len(f) < 2:
        raise ValueError("need at least two samples")
    if np.any(np.abs(np.abs(f) - 1) > 1e-9):
        raise ValueError("samples must be error sensitive (|f| = 1)")
    w = np.ones_like(f) if weight_factors is None else np.asarray(weight_factors, dtype=float)
    eps = 1.0 - y * f
    mean, var, se_mean, se_var = weighted_moments(eps, w)
    if var < 0:
        warnings.warn("negative variance estimate clamped to 0")
        var = 0.0
    delta = float(np.sqrt(var))
    se_delta = se_var / (2 * delta) if delta > 0 else float("nan")
    if samples is not None:
        eta, se_eta = samples.eta_estimate()
    elif weight_factors is not None:
        eta, se_eta = float(w.mean()), float(w.std(ddof=1) / np.sqrt(len(w)))
    else:
        eta, se_eta = float("nan"), float("nan")
    return PhenomenologicalEstimate(mean, delta, eta, len(f), se_mean, se_delta, se_eta)


def mse(
    f_values: Sequence[float],
    y_values: Sequence[float],
    weights: Optional[Sequence[float]] = None,
    eta: Optional[float] = None,
    formula: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> float:
    """Mean squared error, optionally of mitigated values and importance-reweighted.

    With ``weights = 3**-w`` from non-uniform sampling this is
    ``eta**-1 * mean(3**-w (y - f)**2)`` over the error-sensitive set; ``eta``
    defaults to the mean weight. Multiply by ``eta`` for the full Clifford set.
    """
    f = np.asarray(f_values, dtype=float)
    y = np.asarray(y_values, dtype=float)
    if f.size == 0:
        raise ValueError("empty input")
    if f.shape != y.shape:
        raise ValueError("f and y must have equal lengths")
    if formula is not None:
        y = np.asarray(formula(y), dtype=float)
    sq = (y - f) ** 2
    if weights is None:
        return float(sq.mean())
    w = np.asarray(weights, dtype=float)
    eta = float(w.mean()) if eta is None else eta
    return float((w * sq).mean() / eta)


# --------------------------------------------------------------------------
# Enumeration on tiny frames
# --------------------------------------------------------------------------


def enumerate_patterns(frame: CircuitFrame, limit: int = 24**4) -> tuple[np.ndarray, np.ndarray]:
    """All patterns ``bar-R`` with their weights (tiny frames only)."""
    length = frame.n_slots - frame.n
    if C1_SIZE**length > limit:
        raise ValueError(f"24**{length} patterns exceed the enumeration limit")
    combos = list(itertools.product(range(C1_SIZE), repeat=length))
    patterns = np.array(combos, dtype=np.int64).reshape(len(combos), length)
    return patterns, pattern_weights(frame, patterns)


def es_count(frame: CircuitFrame) -> int:
    """``|C^ES| = sum over bar-R of 8**w 24**(n - w)``."""
    _, w = enumerate_patterns(frame)
    return int(sum(8 ** int(k) * 24 ** (frame.n - int(k)) for k in w))


def exact_eta(frame: CircuitFrame) -> float:
    return es_count(frame) / C1_SIZE**frame.n_slots


def enumerate_es_circuits(frame: CircuitFrame) -> tuple[np.ndarray, np.ndarray]:
    """Every error-sensitive binding ``(|C^ES|, N_R)`` with its weight."""
    patterns, ws = enumerate_patterns(frame)
    codes = pattern_observables(frame, patterns)
    rows, weights = [], []
    for pat, code_row, w in zip(patterns, codes, ws):
        choices = [sorted(cliffords_mapping_to_z(_LABELS[c])) for c in code_row]
        for first in itertools.product(*choices):
            rows.append(list(first) + pat.tolist())
            weights.append(w)
    return np.array(rows, dtype=np.int64), np.array(weights, dtype=np.int64)


# --------------------------------------------------------------------------
# JSON-lines dumps
# --------------------------------------------------------------------------


def dump_samples(samples: ICSSamples, stream: TextIO, f_values: Optional[Iterable[float]] = None) -> None:
    """Write one JSON object per sample: circuit, w, f and weight factor."""
    f_iter = iter(f_values) if f_values is not None else None
    for circ, w, wf in zip(samples.circuits(), samples.w.tolist(), samples.weight_factor.tolist()):
        rec = {"circuit": circ.to_dict(), "w": int(w), "weight_factor": wf}
        if f_iter is not None:
            rec["f"] = int(next(f_iter))
        stream.write(json.dumps(rec) + "\n")


def load_samples(stream: TextIO) -> list[dict]:
    out = []
    for line in stream:
        if line.strip():
            rec = json.loads(line)
            rec["circuit"] = Circuit.from_dict(rec["circuit"])
            out.append(rec)
    return out
