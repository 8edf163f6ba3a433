"""Seeded, chunked evaluation of circuit batches shared by the experiments.

Every random draw comes from ``np.random.default_rng([seed, point, stream, chunk])``
and chunk boundaries are fixed, so results do not depend on the worker count.
"""

from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..circuits import CircuitFrame, haar_unitaries, ideal_values, random_rotations
from ..density import DEFAULT_CHUNK, clifford_matrices, evolve_batch, expectations, purity_pairs
from ..ics import es_indices, random_pattern
from ..noise import NoiseModel
from ..stabilizer import heisenberg_sweep, noisy_expectations

# stream identifiers
FRAME, NOISE, TRAIN, TEST, ACCEPT, CHAIN, EXTRA = range(7)


def stream(seed: int, point: int, kind: int, chunk: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, point, kind, chunk])


@dataclass(frozen=True)
class Variant:
    """One noisy evaluation of a binding: expectation or distilled value."""

    noise: Optional[NoiseModel]
    inverse_lambda: Optional[float] = None
    distilled: bool = False


def _evaluate(frame: CircuitFrame, mats: np.ndarray, variants: Sequence[Variant]) -> np.ndarray:
    out = np.empty((len(variants), mats.shape[0]))
    for k, v in enumerate(variants):
        rho = evolve_batch(frame, mats, v.noise, v.inverse_lambda)
        if v.distilled:
            num, den = purity_pairs(rho, frame.observable)
            out[k] = num / den
        else:
            out[k] = expectations(rho, frame.observable)
    return out


def _unitary_task(args) -> tuple[np.ndarray, np.ndarray]:
    frame, mats, variants = args
    return ideal_values(frame, mats), _evaluate(frame, mats, variants)


def _matrix_task(args) -> np.ndarray:
    frame, mats, variants = args
    return _evaluate(frame, mats, variants)


class Runner:
    """Maps tasks over a process pool (or inline for one worker), preserving order."""

    def __init__(self, workers: int = 1):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self.workers = workers
        self._pool: Optional[ProcessPoolExecutor] = None

    def __enter__(self) -> Runner:
        if self.workers > 1:
            ctx = multiprocessing.get_context("fork")
            self._pool = ProcessPoolExecutor(self.workers, mp_context=ctx)
        return self

    def __exit__(self, *exc) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def map(self, fn: Callable, tasks: Sequence) -> list:
        if self._pool is None or len(tasks) < 2:
            return [fn(t) for t in tasks]
        return list(self._pool.map(fn, tasks))


def unitary_bindings(frame: CircuitFrame, count: int, seed: int, point: int, kind: int = TEST, chunk: int = DEFAULT_CHUNK) -> list[np.ndarray]:
    """Haar-random slot bindings in fixed chunks, each from its own stream."""
    out = []
    for c, start in enumerate(range(0, count, chunk)):
        m = min(chunk, count - start)
        rng = stream(seed, point, kind, c)
        out.append(haar_unitaries(m * frame.n_slots, rng).reshape(m, frame.n_slots, 2, 2))
    return out


def evaluate_unitary(
    runner: Runner,
    frame: CircuitFrame,
    chunks: Sequence[np.ndarray],
    variants: Sequence[Variant],
) -> tuple[np.ndarray, np.ndarray]:
    """``(f, values)`` with ``values`` of shape ``(len(variants), count)``."""
    res = runner.map(_unitary_task, [(frame, m, tuple(variants)) for m in chunks])
    if not res:
        return np.zeros(0), np.zeros((len(variants), 0))
    return np.concatenate([r[0] for r in res]), np.concatenate([r[1] for r in res], axis=1)


def evaluate_matrices(runner: Runner, frame: CircuitFrame, mats: np.ndarray, variants: Sequence[Variant], chunk: int = DEFAULT_CHUNK) -> np.ndarray:
    tasks = [(frame, mats[s : s + chunk], tuple(variants)) for s in range(0, mats.shape[0], chunk)]
    res = runner.map(_matrix_task, tasks)
    return np.concatenate(res, axis=1) if res else np.zeros((len(variants), 0))


def clifford_values(runner: Runner, frame: CircuitFrame, indices: np.ndarray, variants: Sequence[Variant]) -> tuple[np.ndarray, np.ndarray]:
    """``(f, values)`` for Clifford bindings; Pauli models use the stabilizer engine."""
    f = heisenberg_sweep(frame, indices).ideal
    out = np.empty((len(variants), indices.shape[0]))
    dense = []
    for k, v in enumerate(variants):
        if v.distilled or (v.noise is not None and not (v.noise.is_pauli or v.noise.is_global)):
            dense.append(k)
        elif v.noise is None:
            out[k] = f
        else:
            out[k] = noisy_expectations(frame, indices, v.noise, v.inverse_lambda)[1]
    if dense:
        mats = clifford_matrices(indices)
        out[dense] = evaluate_matrices(runner, frame, mats, [variants[k] for k in dense])
    return f, out


def near_clifford_bindings(
    frame: CircuitFrame, count: int, scales: Sequence[float], seed: int, point: int, chunk: int = DEFAULT_CHUNK
) -> list[np.ndarray]:
    """Error-sensitive Clifford circuits with each slot perturbed by a random rotation.

    Circuit ``i`` uses rotation scale ``scales[i % len(scales)]``.
    """
    out = []
    for c, start in enumerate(range(0, count, chunk)):
        m = min(chunk, count - start)
        rng = stream(seed, point, TEST, c)
        patterns = np.stack([random_pattern(frame, rng) for _ in range(m)])
        idx, _ = es_indices(frame, patterns, rng)
        base = clifford_matrices(idx)
        rows = []
        for i in range(m):
            s = scales[(start + i) % len(scales)]
            rot = random_rotations(frame.n_slots, s, rng)
            rows.append(np.matmul(rot, base[i]))
        out.append(np.stack(rows))
    return out
