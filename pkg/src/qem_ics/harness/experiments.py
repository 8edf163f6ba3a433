"""The experiment runners behind ``qem-ics run``.

Each runner maps an ``ExperimentConfig`` to a list of ``Table`` objects. Grid
points are processed in order; circuit batches within a point may be spread
over worker processes without changing any number in the output.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from ..circuits import CircuitFrame, build_frame, haar_unitaries, ideal_values
from ..density import MAX_QUBITS
from ..ics import (
    ICSSamples,
    default_proposal,
    estimate_phenomenological,
    sample_nonuniform_indices,
    sample_uniform_indices,
    weighted_moments,
)
from ..mitigation import (
    extrapolate_linear,
    optimal_lambda_from_rates,
    optimize_lambda,
    pec_lambda_heuristic,
    pemi_factor,
    train_vd_pemi,
    vd_pemi,
)
from ..noise import NoiseKind, NoiseModel
from ..pauli import C1_SIZE, PauliString
from ..stabilizer import first_qubit_factors
from .config import ConfigError, ExperimentConfig, ExperimentKind
from .engine import (
    ACCEPT,
    CHAIN,
    NOISE,
    TEST,
    TRAIN,
    Runner,
    Variant,
    clifford_values,
    evaluate_matrices,
    evaluate_unitary,
    near_clifford_bindings,
    stream,
    unitary_bindings,
)
from .fit import fit_power_law
from .io import Table, write_table


class NumericalError(RuntimeError):
    """A run hit a numerical dead end (lost signal, exhausted sampling budget...)."""


@dataclass
class ExperimentResult:
    experiment: ExperimentKind
    tables: list[Table] = field(default_factory=list)

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


@dataclass(frozen=True)
class _Point:
    index: int
    n: int
    n_gates: int
    repeat: int
    frame: CircuitFrame
    noise: NoiseModel
    epsilon: float


def _points(config: ExperimentConfig, density: bool = True):
    """Yield grid points, skipping those beyond the density-matrix cap."""
    grid = config.family
    for p, (n, m, r) in enumerate(grid.points()):
        if density and n > MAX_QUBITS:
            warnings.warn(f"skipping n={n}: exceeds the density-matrix cap of {MAX_QUBITS}")
            continue
        frame = build_frame(grid.family(n, m, r))
        noise, eps = config.noise.build(m, stream(config.seed, p, NOISE))
        yield _Point(p, n, m, r, frame, noise, eps)


def _base(pt: _Point) -> dict:
    return {"point": pt.index, "n": pt.n, "N": pt.n_gates, "repeat": pt.repeat, "epsilon": pt.epsilon}


_BASE_COLUMNS = ["point", "n", "N", "repeat", "epsilon"]


# --------------------------------------------------------------------------
# Shared estimators
# --------------------------------------------------------------------------


def rmse_with_se(err: np.ndarray) -> tuple[float, float]:
    """``sqrt(mean(err**2))`` and its delta-method standard error."""
    sq = np.asarray(err, dtype=float) ** 2
    loss = float(sq.mean())
    if len(sq) < 2 or loss == 0:
        return math.sqrt(loss), float("nan")
    se_loss = float(sq.std(ddof=1) / math.sqrt(len(sq)))
    return math.sqrt(loss), se_loss / (2 * math.sqrt(loss))


def ratio_with_se(err: np.ndarray, err_mitigated: np.ndarray) -> tuple[float, float]:
    """``sqrt(L / L')`` with a paired delta-method standard error."""
    a, b = np.asarray(err, dtype=float) ** 2, np.asarray(err_mitigated, dtype=float) ** 2
    la, lb = a.mean(), b.mean()
    if lb == 0:
        return float("nan"), float("nan")
    r = math.sqrt(la / lb)
    if len(a) < 2 or la == 0:
        return r, float("nan")
    c = np.cov(a, b) / len(a)
    var_log = 0.25 * (c[0, 0] / la**2 + c[1, 1] / lb**2 - 2 * c[0, 1] / (la * lb))
    return r, r * math.sqrt(max(var_log, 0.0))


def _train_samples(config: ExperimentConfig, pt: _Point, algorithm: str = "nonuniform", count: Optional[int] = None) -> ICSSamples:
    count = config.n_train if count is None else count
    if algorithm == "nonuniform":
        return sample_nonuniform_indices(pt.frame, count, stream(config.seed, pt.index, TRAIN))
    m = int(config.options.get("proposal_m", 1))
    m = max(1, min(m, pt.frame.n_slots - pt.frame.n)) if pt.frame.n_slots > pt.frame.n else 1
    burn = config.options.get("burn_in")
    return sample_uniform_indices(
        pt.frame, count, stream(config.seed, pt.index, CHAIN), proposal=default_proposal(m), burn_in=burn
    )


def _fit_rows(table: Table, group: str, x: str, quantities: Sequence[str]) -> Table:
    """Power-law fits of each quantity against ``x`` within each ``group`` value."""
    out = Table("fits", [group, "quantity", "points", "exponent", "exponent_se", "prefactor", "r_squared"])
    recs = table.records()
    for g in sorted({r[group] for r in recs}):
        sub = [r for r in recs if r[group] == g]
        for q in quantities:
            pts = [(r[x], r[q]) for r in sub if np.isfinite(r[q]) and r[q] > 0]
            if len({p[0] for p in pts}) < 3:
                continue
            fit = fit_power_law(pts)
            out.add(**{group: g}, quantity=q, points=len(pts), exponent=fit.exponent, exponent_se=fit.exponent_se, prefactor=fit.prefactor, r_squared=fit.r_squared)
    return out


# --------------------------------------------------------------------------
# Effective-rate histogram
# --------------------------------------------------------------------------


def _rejection_bindings(config: ExperimentConfig, pt: _Point) -> tuple[np.ndarray, float]:
    """Haar bindings accepted with probability ``f_C**2``, and the acceptance rate."""
    target = config.n_test
    batch = int(config.options.get("candidate_batch", 1024))
    budget = int(config.options.get("max_candidates", 5_000_000))
    kept, drawn, c = [], 0, 0
    total = 0
    while total < target:
        if drawn >= budget:
            raise NumericalError(f"rejection sampling accepted {total} of {target} circuits within {budget} candidates")
        rng = stream(config.seed, pt.index, ACCEPT, c)
        mats = haar_unitaries(batch * pt.frame.n_slots, rng).reshape(batch, pt.frame.n_slots, 2, 2)
        f = ideal_values(pt.frame, mats)
        keep = rng.random(batch) < f * f
        kept.append(mats[keep])
        total += int(keep.sum())
        drawn += batch
        c += 1
    accepted = np.concatenate(kept)[:target]
    return accepted, total / drawn


def run_epsilon_histogram(config: ExperimentConfig, runner: Runner) -> list[Table]:
    mode = config.options.get("mode", "rejection")
    if mode not in ("rejection", "reweighted", "clifford"):
        raise ConfigError(f"unknown histogram mode {mode!r}")
    n_bins = int(config.options.get("bins", 50))
    summary = Table(
        "summary",
        _BASE_COLUMNS + ["mode", "samples", "epsilon0", "se_epsilon0", "delta", "se_delta", "acceptance"],
    )
    samples = Table("samples", ["point", "n", "N", "epsilon_c", "weight"])
    hist = Table("histogram", ["point", "n", "N", "bin", "lower", "upper", "weight", "density"])
    for pt in _points(config):
        acceptance = float("nan")
        if mode == "clifford":
            s = _train_samples(config, pt, count=config.n_test)
            f, vals = clifford_values(runner, pt.frame, s.indices, [Variant(pt.noise)])
            eps_c, w = 1.0 - vals[0] * f, s.weight_factor
        elif mode == "rejection":
            mats, acceptance = _rejection_bindings(config, pt)
            f = ideal_values(pt.frame, mats)
            y = evaluate_matrices(runner, pt.frame, mats, [Variant(pt.noise)])[0]
            eps_c, w = 1.0 - y / f, np.ones(len(f))
        else:
            f, vals = evaluate_unitary(runner, pt.frame, unitary_bindings(pt.frame, config.n_test, config.seed, pt.index), [Variant(pt.noise)])
            ok = np.abs(f) > 1e-12
            eps_c, w = 1.0 - vals[0][ok] / f[ok], f[ok] ** 2
        mean, var, se_mean, se_var = weighted_moments(eps_c, w)
        var = max(var, 0.0)
        delta = math.sqrt(var)
        summary.add(
            **_base(pt), mode=mode, samples=len(eps_c), epsilon0=mean, se_epsilon0=se_mean,
            delta=delta, se_delta=se_var / (2 * delta) if delta > 0 else float("nan"), acceptance=acceptance,
        )
        for e, wt in zip(eps_c, w):
            samples.add(point=pt.index, n=pt.n, N=pt.n_gates, epsilon_c=float(e), weight=float(wt))
        counts, edges = np.histogram(eps_c, bins=n_bins, weights=w)
        widths = np.diff(edges)
        norm = counts.sum()
        for b in range(n_bins):
            dens = counts[b] / (norm * widths[b]) if norm > 0 else float("nan")
            hist.add(point=pt.index, n=pt.n, N=pt.n_gates, bin=b, lower=float(edges[b]), upper=float(edges[b + 1]), weight=float(counts[b]), density=float(dens))
    return [summary, samples, hist]


# --------------------------------------------------------------------------
# Error scaling under PEMI
# --------------------------------------------------------------------------


def run_scaling_sweep(config: ExperimentConfig, runner: Runner) -> list[Table]:
    optimal = config.options.get("formula", "optimal") == "optimal"
    cols = _BASE_COLUMNS + [
        "epsilon_total", "epsilon0", "se_epsilon0", "delta", "se_delta", "eta_es", "eta_unitary",
        "sqrt_L", "se_sqrt_L", "sqrt_Lp", "se_sqrt_Lp", "ratio", "se_ratio", "a", "sqrt_L_per_eps",
    ]
    table = Table("scaling", cols)
    for pt in _points(config):
        s = _train_samples(config, pt)
        f_t, y_t = clifford_values(runner, pt.frame, s.indices, [Variant(pt.noise)])
        est = estimate_phenomenological(f_t, y_t[0], s.weight_factor, samples=s)
        if est.epsilon0 >= 1:
            raise NumericalError(f"epsilon0 = {est.epsilon0} at point {pt.index}: signal lost")
        factor = pemi_factor(est.epsilon0, est.delta if optimal else None)
        f, y = evaluate_unitary(runner, pt.frame, unitary_bindings(pt.frame, config.n_test, config.seed, pt.index), [Variant(pt.noise)])
        err, err_m = y[0] - f, factor * y[0] - f
        sl, se_sl = rmse_with_se(err)
        slp, se_slp = rmse_with_se(err_m)
        ratio, se_ratio = ratio_with_se(err, err_m)
        table.add(
            **_base(pt), epsilon_total=pt.epsilon * pt.n_gates, epsilon0=est.epsilon0, se_epsilon0=est.se_epsilon0,
            delta=est.delta, se_delta=est.se_delta, eta_es=est.eta, eta_unitary=float(np.mean(f * f)),
            sqrt_L=sl, se_sqrt_L=se_sl, sqrt_Lp=slp, se_sqrt_Lp=se_slp, ratio=ratio, se_ratio=se_ratio,
            a=ratio / math.sqrt(pt.n_gates), sqrt_L_per_eps=sl / pt.epsilon if pt.epsilon > 0 else float("nan"),
        )
    return [table, _fit_rows(table, "n", "N", ["ratio", "sqrt_L_per_eps", "sqrt_L", "sqrt_Lp"])]


# --------------------------------------------------------------------------
# Gate-dependent single-qubit errors
# --------------------------------------------------------------------------


def run_gate_dependent_sweep(config: ExperimentConfig, runner: Runner) -> list[Table]:
    cols = _BASE_COLUMNS + [
        "epsilon0_unitary", "se_epsilon0_unitary", "delta_unitary", "se_delta_unitary",
        "epsilon0_es", "se_epsilon0_es", "delta_es", "se_delta_es",
    ]
    table = Table("gate_dependent", cols)
    for pt in _points(config):
        f, y = evaluate_unitary(runner, pt.frame, unitary_bindings(pt.frame, config.n_test, config.seed, pt.index), [Variant(pt.noise)])
        ok = np.abs(f) > 1e-12
        mean, var, se_mean, se_var = weighted_moments(1.0 - y[0][ok] / f[ok], f[ok] ** 2)
        du = math.sqrt(max(var, 0.0))
        s = _train_samples(config, pt)
        f_t, y_t = clifford_values(runner, pt.frame, s.indices, [Variant(pt.noise)])
        est = estimate_phenomenological(f_t, y_t[0], s.weight_factor, samples=s)
        table.add(
            **_base(pt), epsilon0_unitary=mean, se_epsilon0_unitary=se_mean, delta_unitary=du,
            se_delta_unitary=se_var / (2 * du) if du > 0 else float("nan"),
            epsilon0_es=est.epsilon0, se_epsilon0_es=est.se_epsilon0, delta_es=est.delta, se_delta_es=est.se_delta,
        )
    return [table]


# --------------------------------------------------------------------------
# Mitigation formulas compared
# --------------------------------------------------------------------------


def amplified_noise(noise: NoiseModel, mode: str = "imperfect") -> NoiseModel:
    """Doubled noise for extrapolation.

    ``imperfect`` doubles only the depolarising part of depolarising plus
    dephasing noise, so its rate becomes ``2 eps_d + eps_z`` with ``eps_z``
    unchanged; other models, and ``exact``, scale every rate by 2.
    """
    if mode == "imperfect" and noise.kind is NoiseKind.DEPOL_DEPHASE:
        return NoiseModel.depol_dephase(2 * noise.eps_d + noise.eps_z, noise.eps_z)
    return noise.amplified(2.0 * noise.r)


def _weighted_rate(f: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    return float(1.0 - (w * y * f).sum() / w.sum())


def _pec_training_lambda(pt: _Point, s: ICSSamples, f: np.ndarray, runner: Runner) -> float:
    w = s.weight_factor

    def loss(lam: float) -> float:
        _, vals = clifford_values(runner, pt.frame, s.indices, [Variant(pt.noise, inverse_lambda=lam)])
        return float((w * (vals[0] - f) ** 2).sum() / w.sum())

    return optimize_lambda(loss)


_VARIANTS = ["raw", "pemi", "ee_imperfect", "ee_optimized", "pec_imperfect", "pec_optimized"]


def run_formula_comparison(config: ExperimentConfig, runner: Runner) -> list[Table]:
    include_vd = bool(config.options.get("include_vd", False))
    amp_mode = config.options.get("amplification", "imperfect")
    pec_mode = config.options.get("pec_lambda", "optimized")
    names = _VARIANTS + (["vd", "vd_pemi"] if include_vd else [])
    cols = _BASE_COLUMNS + ["epsilon_z", "epsilon1", "epsilon2", "lambda_ee", "lambda_pec_imperfect", "lambda_pec_optimized", "lambda_pec_heuristic", "epsilon0_vd"]
    for v in names:
        cols += [f"rmse_{v}", f"se_rmse_{v}"]
    table = Table("formulas", cols)
    for pt in _points(config):
        noise = pt.noise
        amp = amplified_noise(noise, amp_mode)
        eps_d = noise.depolarising_component()
        eps_z = noise.eps_z if noise.kind is NoiseKind.DEPOL_DEPHASE else 0.0
        lam_imp = pec_lambda_heuristic(eps_d, 0.0)
        lam_heur = pec_lambda_heuristic(eps_d, eps_z)

        s = _train_samples(config, pt)
        w = s.weight_factor
        train_variants = [Variant(noise), Variant(amp)] + ([Variant(noise, distilled=True)] if include_vd else [])
        f_t, y_t = clifford_values(runner, pt.frame, s.indices, train_variants)
        eps1, eps2 = _weighted_rate(f_t, y_t[0], w), _weighted_rate(f_t, y_t[1], w)
        lam_ee = optimal_lambda_from_rates(eps1, eps2)
        if pec_mode == "optimized":
            lam_pec = _pec_training_lambda(pt, s, f_t, runner)
        elif pec_mode == "heuristic":
            lam_pec = lam_heur
        else:
            raise ConfigError(f"unknown pec_lambda mode {pec_mode!r}")
        eps0_vd = train_vd_pemi(f_t, y_t[2], w) if include_vd else float("nan")

        test_variants = [Variant(noise), Variant(amp), Variant(noise, inverse_lambda=lam_imp), Variant(noise, inverse_lambda=lam_pec)]
        if include_vd:
            test_variants.append(Variant(noise, distilled=True))
        f, y = evaluate_unitary(runner, pt.frame, unitary_bindings(pt.frame, config.n_test, config.seed, pt.index), test_variants)
        mitigated = {
            "raw": y[0],
            "pemi": pemi_factor(eps1) * y[0],
            "ee_imperfect": extrapolate_linear(y[0], y[1], 2.0),
            "ee_optimized": extrapolate_linear(y[0], y[1], lam_ee),
            "pec_imperfect": y[2],
            "pec_optimized": y[3],
        }
        if include_vd:
            mitigated["vd"] = y[4]
            mitigated["vd_pemi"] = vd_pemi(y[4], eps0_vd)
        row = dict(
            **_base(pt), epsilon_z=eps_z, epsilon1=eps1, epsilon2=eps2, lambda_ee=lam_ee,
            lambda_pec_imperfect=lam_imp, lambda_pec_optimized=lam_pec, lambda_pec_heuristic=lam_heur, epsilon0_vd=eps0_vd,
        )
        for v in names:
            row[f"rmse_{v}"], row[f"se_rmse_{v}"] = rmse_with_se(mitigated[v] - f)
        table.add(**row)
    return [table, _fit_rows(table, "n", "N", [f"rmse_{v}" for v in names])]


# --------------------------------------------------------------------------
# Propagated-error statistics
# --------------------------------------------------------------------------


_CODE_LABELS = {"I": 0, "X": 1, "Z": 2, "Y": 3}


def run_error_propagation(config: ExperimentConfig, runner: Runner) -> list[Table]:
    error = PauliString.from_str(config.options.get("error", "XX"))
    if error.n != 2:
        raise ConfigError("error must be a two-qubit Pauli label")
    qubit = int(config.options.get("qubit", 0))
    cols = _BASE_COLUMNS + ["circuits"]
    for p in "IXYZ":
        cols += [f"D_{p}", f"se_D_{p}"]
    table = Table("propagation", cols)
    for pt in _points(config, density=False):
        rng = stream(config.seed, pt.index, TEST)
        idx = rng.integers(0, C1_SIZE, size=(config.n_test, pt.frame.n_slots))
        codes = first_qubit_factors(pt.frame, idx, error, qubit)
        row = dict(**_base(pt), circuits=config.n_test)
        for p in "IXYZ":
            frac = np.count_nonzero(codes == _CODE_LABELS[p], axis=1) / pt.n_gates
            d = np.abs(frac - 0.25)
            row[f"D_{p}"] = float(d.mean())
            row[f"se_D_{p}"] = float(d.std(ddof=1) / math.sqrt(len(d))) if len(d) > 1 else float("nan")
        table.add(**row)
    return [table, _fit_rows(table, "n", "N", [f"D_{p}" for p in "IXYZ"])]


# --------------------------------------------------------------------------
# Feasibility of ICS training
# --------------------------------------------------------------------------


def _scale_lambda(f: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    den = float((w * y * y).sum())
    if den == 0:
        raise NumericalError("all training values vanish")
    return float((w * y * f).sum() / den)


def run_feasibility(config: ExperimentConfig, runner: Runner) -> list[Table]:
    algorithms = config.options.get("algorithms", ["nonuniform", "uniform"])
    for a in algorithms:
        if a not in ("nonuniform", "uniform"):
            raise ConfigError(f"unknown algorithm {a!r}")
    cols = _BASE_COLUMNS + ["lambda_u", "loss_u"]
    for a in algorithms:
        cols += [f"lambda_c_{a}", f"ratio_{a}"]
    if "uniform" in algorithms:
        cols.append("acceptance_uniform")
    table = Table("feasibility", cols)
    for pt in _points(config):
        f, y = evaluate_unitary(runner, pt.frame, unitary_bindings(pt.frame, config.n_train, config.seed, pt.index), [Variant(pt.noise)])
        y = y[0]
        lam_u = _scale_lambda(f, y, np.ones_like(f))

        def loss(lam: float) -> float:
            return float(np.mean((lam * y - f) ** 2))

        loss_u = loss(lam_u)
        row = dict(**_base(pt), lambda_u=lam_u, loss_u=loss_u)
        for a in algorithms:
            s = _train_samples(config, pt, a)
            f_t, y_t = clifford_values(runner, pt.frame, s.indices, [Variant(pt.noise)])
            lam_c = _scale_lambda(f_t, y_t[0], s.weight_factor)
            row[f"lambda_c_{a}"] = lam_c
            row[f"ratio_{a}"] = loss(lam_c) / loss_u if loss_u > 0 else float("nan")
            if a == "uniform":
                row["acceptance_uniform"] = s.acceptance_rate
        table.add(**row)
    return [table]


# --------------------------------------------------------------------------
# Dependence on the ideal value
# --------------------------------------------------------------------------


_DEFAULT_SCALES = (0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, math.pi)


def run_fc_dependence(config: ExperimentConfig, runner: Runner) -> list[Table]:
    bin_size = int(config.options.get("bin_size", 10))
    scales = tuple(float(s) for s in config.options.get("rotation_scales", _DEFAULT_SCALES))
    if bin_size < 1 or not scales:
        raise ConfigError("bin_size must be >= 1 and rotation_scales non-empty")
    bins = Table("fc_bins", ["point", "n", "N", "bin", "f_low", "f_high", "f_mean", "eps_before", "eps_after", "ratio", "flag"])
    ref = Table("fc_reference", _BASE_COLUMNS + ["epsilon0", "ratio_es", "ratio_unitary", "eps_before_es", "eps_after_es"])
    tiny = 1e-12
    for pt in _points(config):
        s = _train_samples(config, pt)
        f_t, y_t = clifford_values(runner, pt.frame, s.indices, [Variant(pt.noise)])
        est = estimate_phenomenological(f_t, y_t[0], s.weight_factor, samples=s)
        factor = pemi_factor(est.epsilon0)
        # reference ratio on a fresh error-sensitive set
        s_ref = sample_nonuniform_indices(pt.frame, config.n_test, stream(config.seed, pt.index, TEST, 10**6))
        f_r, y_r = clifford_values(runner, pt.frame, s_ref.indices, [Variant(pt.noise)])
        wr = s_ref.weight_factor
        eb_es = float((wr * np.abs(y_r[0] - f_r)).sum() / wr.sum())
        ea_es = float((wr * np.abs(factor * y_r[0] - f_r)).sum() / wr.sum())

        chunks = near_clifford_bindings(pt.frame, config.n_test, scales, config.seed, pt.index)
        f, y = evaluate_unitary(runner, pt.frame, chunks, [Variant(pt.noise)])
        before = np.abs(y[0] - f)
        after = np.abs(factor * y[0] - f)
        eb_u, ea_u = float(before.mean()), float(after.mean())
        ref.add(
            **_base(pt), epsilon0=est.epsilon0,
            ratio_es=eb_es / ea_es if ea_es > tiny else float("nan"),
            ratio_unitary=eb_u / ea_u if ea_u > tiny else float("nan"),
            eps_before_es=eb_es, eps_after_es=ea_es,
        )
        order = np.argsort(np.abs(f), kind="stable")
        for b, start in enumerate(range(0, len(order) - bin_size + 1, bin_size)):
            sel = order[start : start + bin_size]
            af = np.abs(f[sel])
            eb, ea = float(before[sel].mean()), float(after[sel].mean())
            undefined = ea <= tiny
            bins.add(
                point=pt.index, n=pt.n, N=pt.n_gates, bin=b, f_low=float(af.min()), f_high=float(af.max()),
                f_mean=float(af.mean()), eps_before=eb, eps_after=ea,
                ratio=float("nan") if undefined else eb / ea, flag="undefined" if undefined else "",
            )
    return [bins, ref]


# --------------------------------------------------------------------------
# Dispatch and output
# --------------------------------------------------------------------------


RUNNERS: dict[ExperimentKind, Callable[[ExperimentConfig, Runner], list[Table]]] = {
    ExperimentKind.EPSILON_HISTOGRAM: run_epsilon_histogram,
    ExperimentKind.SCALING_SWEEP: run_scaling_sweep,
    ExperimentKind.GATE_DEPENDENT_SWEEP: run_gate_dependent_sweep,
    ExperimentKind.FORMULA_COMPARISON: run_formula_comparison,
    ExperimentKind.ERROR_PROPAGATION: run_error_propagation,
    ExperimentKind.FEASIBILITY: run_feasibility,
    ExperimentKind.FC_DEPENDENCE: run_fc_dependence,
}


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    for msg in config.warnings():
        warnings.warn(msg)
    with Runner(workers) as runner:
        tables = RUNNERS[config.experiment](config, runner)
    return ExperimentResult(config.experiment, tables)


def write_result(result: ExperimentResult, config: ExperimentConfig, directory: Optional[str] = None) -> list[Path]:
    """Write every table with a sidecar carrying the config hash and seed."""
    out = Path(directory if directory is not None else config.output_path)
    body = config.to_dict()
    body.pop("output_path")
    meta = {"experiment": config.experiment.value, "seed": config.seed, "config_sha256": config.sha256(), "config": body}
    return [write_table(t, out, meta) for t in result.tables]
