"""Experiment configuration: JSON parsing and validation."""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from ..circuits import FrameFamily, FrameKind
from ..noise import CompositeParams, NoiseKind, NoiseModel, sample_composite_params, sample_total_error_rate


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


class ExperimentKind(str, Enum):
    EPSILON_HISTOGRAM = "epsilon_histogram"
    SCALING_SWEEP = "scaling_sweep"
    GATE_DEPENDENT_SWEEP = "gate_dependent_sweep"
    FORMULA_COMPARISON = "formula_comparison"
    ERROR_PROPAGATION = "error_propagation"
    FEASIBILITY = "feasibility"
    FC_DEPENDENCE = "fc_dependence"


# desk-scale limits; larger values run but are flagged as long-running
DESK_MAX_QUBITS = 8
DESK_MAX_GATES = 300
DESK_MAX_CIRCUITS = 1000


@dataclass(frozen=True)
class FamilyGrid:
    """Cartesian grid of frame families; ``repeats`` draws independent frames per point."""

    kind: FrameKind
    n: tuple[int, ...]
    two_qubit_count: tuple[int, ...]
    seed: int = 0
    gate: str = "cz"
    periodic_wrap: bool = True
    repeats: int = 1

    def points(self) -> list[tuple[int, int, int]]:
        """``(n, N, repeat)`` in run order."""
        return [(n, m, r) for n, m in itertools.product(self.n, self.two_qubit_count) for r in range(self.repeats)]

    def family(self, n: int, n_gates: int, repeat: int) -> FrameFamily:
        # frame seed depends on (family seed, n, N, repeat) only
        seed = int(np.random.default_rng([self.seed, n, n_gates, repeat]).integers(2**63))
        return FrameFamily(self.kind, n, n_gates, seed=seed, gate=self.gate, periodic_wrap=self.periodic_wrap)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n": list(self.n),
            "two_qubit_count": list(self.two_qubit_count),
            "seed": self.seed,
            "gate": self.gate,
            "periodic_wrap": self.periodic_wrap,
            "repeats": self.repeats,
        }


@dataclass(frozen=True)
class NoiseSpec:
    """A noise model, possibly with its rate drawn per grid point.

    ``epsilon = "sampled"`` draws ``10**eta / N`` per point; the composite
    model then draws its parameters around that rate.
    """

    kind: NoiseKind
    epsilon: Union[float, str, None] = None
    eps_d: float = 0.0
    eps_z: float = 0.0
    scale: float = 1.0
    params: Optional[dict] = None
    product_form: bool = False

    @property
    def sampled(self) -> bool:
        return self.epsilon == "sampled"

    def build(self, n_gates: int, rng: np.random.Generator) -> tuple[NoiseModel, float]:
        """Return the model for one grid point and its nominal per-gate rate."""
        if self.kind is NoiseKind.DEPOL_DEPHASE:
            d, z = self.eps_d * self.scale, self.eps_z * self.scale
            return NoiseModel.depol_dephase(d, z), d
        eps = sample_total_error_rate(n_gates, rng) if self.sampled else float(self.epsilon) * self.scale
        if self.kind is NoiseKind.COMPOSITE:
            if self.params is not None and not self.sampled:
                return NoiseModel.composite_model(CompositeParams.from_dict(self.params)), eps
            return NoiseModel.composite_model(sample_composite_params(eps, rng)), eps
        if self.kind is NoiseKind.GATE_DEPOLARISING:
            return NoiseModel.gate_depolarising(eps, product_form=self.product_form), eps
        if self.kind is NoiseKind.GATE_DEPENDENT:
            return NoiseModel.gate_dependent(eps), eps
        return NoiseModel.global_depolarising(eps), eps

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind.value}
        if self.kind is NoiseKind.DEPOL_DEPHASE:
            d.update(eps_d=self.eps_d, eps_z=self.eps_z)
        else:
            d["epsilon"] = self.epsilon
        if self.scale != 1.0:
            d["scale"] = self.scale
        if self.params is not None:
            d["params"] = self.params
        if self.product_form:
            d["product_form"] = True
        return d


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: ExperimentKind
    family: FamilyGrid
    noise: NoiseSpec
    n_train: int = 1000
    n_test: int = 1000
    seed: int = 0
    output_path: str = "results"
    options: dict = field(default_factory=dict)

    def with_overrides(self, seed: Optional[int] = None, output_path: Optional[str] = None) -> ExperimentConfig:
        d = self.to_dict()
        if seed is not None:
            d["seed"] = seed
        if output_path is not None:
            d["output_path"] = output_path
        return parse_config(d)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment.value,
            "family": self.family.to_dict(),
            "noise": self.noise.to_dict(),
            "n_train": self.n_train,
            "n_test": self.n_test,
            "seed": self.seed,
            "output_path": self.output_path,
            "options": self.options,
        }

    def sha256(self) -> str:
        """Hash of the config with the output location left out."""
        d = self.to_dict()
        d.pop("output_path")
        text = json.dumps(d, sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()

    def warnings(self) -> list[str]:
        out = []
        if max(self.family.n) > DESK_MAX_QUBITS:
            out.append(f"n = {max(self.family.n)} exceeds the desk-scale default of {DESK_MAX_QUBITS}; expect long runs")
        if max(self.family.two_qubit_count) > DESK_MAX_GATES:
            out.append(f"N = {max(self.family.two_qubit_count)} exceeds the desk-scale default of {DESK_MAX_GATES}")
        if max(self.n_train, self.n_test) > DESK_MAX_CIRCUITS:
            out.append("more than 1000 circuits per point; expect long runs")
        return out


def _int_list(value, name: str) -> tuple[int, ...]:
    vals = value if isinstance(value, list) else [value]
    if not vals:
        raise ConfigError(f"family.{name} grid is empty")
    out = []
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"family.{name} entries must be positive integers, got {v!r}")
        out.append(v)
    return tuple(out)


def _parse_family(d: Any) -> FamilyGrid:
    if not isinstance(d, dict):
        raise ConfigError("'family' must be an object")
    for key in ("kind", "n", "two_qubit_count"):
        if key not in d:
            raise ConfigError(f"family.{key} is required")
    try:
        kind = FrameKind(d["kind"])
    except ValueError:
        raise ConfigError(f"unknown frame kind {d['kind']!r}") from None
    grid = FamilyGrid(
        kind,
        _int_list(d["n"], "n"),
        _int_list(d["two_qubit_count"], "two_qubit_count"),
        seed=int(d.get("seed", 0)),
        gate=str(d.get("gate", "cz")),
        periodic_wrap=bool(d.get("periodic_wrap", True)),
        repeats=int(d.get("repeats", 1)),
    )
    if grid.repeats < 1:
        raise ConfigError("family.repeats must be >= 1")
    for n, m, r in grid.points():
        try:
            grid.family(n, m, r)
        except ValueError as exc:
            raise ConfigError(f"family grid point (n={n}, N={m}): {exc}") from None
    return grid


def _parse_noise(d: Any) -> NoiseSpec:
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("'noise' must be an object with a 'kind'")
    try:
        kind = NoiseKind(d["kind"])
    except ValueError:
        raise ConfigError(f"unknown noise kind {d['kind']!r}") from None
    scale = float(d.get("scale", 1.0))
    if scale < 0:
        raise ConfigError("noise.scale must be nonnegative")
    if kind is NoiseKind.DEPOL_DEPHASE:
        if "eps_d" not in d or "eps_z" not in d:
            raise ConfigError("depol_dephase noise needs eps_d and eps_z")
        spec = NoiseSpec(kind, eps_d=float(d["eps_d"]), eps_z=float(d["eps_z"]), scale=scale)
    else:
        eps = d.get("epsilon")
        if kind is NoiseKind.COMPOSITE and eps is None and "params" in d:
            eps = 0.0
        if eps is None:
            raise ConfigError(f"{kind.value} noise needs 'epsilon' (a number or \"sampled\")")
        if isinstance(eps, str):
            if eps != "sampled":
                raise ConfigError(f"epsilon must be a number or \"sampled\", got {eps!r}")
        else:
            eps = float(eps)
            if not 0 <= eps * scale < 1:
                raise ConfigError("epsilon must lie in [0, 1)")
        spec = NoiseSpec(kind, epsilon=eps, scale=scale, params=d.get("params"), product_form=bool(d.get("product_form", False)))
    if not spec.sampled:
        try:
            spec.build(1, np.random.default_rng(0))
        except ValueError as exc:
            raise ConfigError(f"invalid noise parameters: {exc}") from None
    return spec


def parse_config(d: Any) -> ExperimentConfig:
    """Validate a config dictionary; raises ``ConfigError`` on any problem."""
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("experiment", "family", "noise"):
        if key not in d:
            raise ConfigError(f"'{key}' is required")
    try:
        kind = ExperimentKind(d["experiment"])
    except ValueError:
        names = ", ".join(k.value for k in ExperimentKind)
        raise ConfigError(f"unknown experiment {d['experiment']!r}; expected one of {names}") from None
    counts = {}
    for key, default in (("n_train", 1000), ("n_test", 1000)):
        v = d.get(key, default)
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"{key} must be an integer >= 1")
        counts[key] = v
    seed = d.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    options = d.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("'options' must be an object")
    return ExperimentConfig(
        kind,
        _parse_family(d["family"]),
        _parse_noise(d["noise"]),
        n_train=counts["n_train"],
        n_test=counts["n_test"],
        seed=seed,
        output_path=str(d.get("output_path", "results")),
        options=dict(options),
    )


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(d)
