"""Command-line entry point ``qem-ics``.

Exit codes: 0 on success, 2 for configuration or input errors, 3 for
numerical failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .circuits import CircuitFrame, FrameFamily, build_frame
from .harness import ConfigError, NumericalError, fit_power_law, load_config, read_table, run_experiment, write_result
from .ics import default_proposal, dump_samples, sample_nonuniform_indices, sample_uniform_indices
from .stabilizer import heisenberg_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("qem_ics")


def _cmd_run(args) -> int:
    config = load_config(args.config).with_overrides(seed=args.seed, output_path=args.out)
    result = run_experiment(config, workers=args.workers)
    paths = write_result(result, config)
    for p in paths:
        print(p)
    return EXIT_OK


def _filter(records: list[dict], where: Sequence[str]) -> list[dict]:
    for cond in where:
        if "=" not in cond:
            raise ConfigError(f"--where expects column=value, got {cond!r}")
        col, val = cond.split("=", 1)
        try:
            target = float(val)
        except ValueError:
            target = val
        records = [r for r in records if r.get(col) == target]
    return records


def _cmd_fit(args) -> int:
    try:
        table = read_table(args.input)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {args.input}: {exc}") from None
    for col in (args.x, args.y):
        if col not in table.columns:
            raise ConfigError(f"column {col!r} not in {args.input}; available: {', '.join(table.columns)}")
    recs = _filter(table.records(), args.where)
    points = [(r[args.x], r[args.y]) for r in recs]
    if any(isinstance(v, str) for p in points for v in p):
        raise ConfigError("fit columns must be numeric")
    try:
        fit = fit_power_law(points)
    except ValueError as exc:
        raise NumericalError(str(exc)) from None
    print(json.dumps(fit.to_dict(), indent=2))
    return EXIT_OK


def _load_frame(path: str) -> CircuitFrame:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read frame: {exc}") from None
    try:
        if "elements" in d:
            return CircuitFrame.from_dict(d)
        fam = d.get("family", d)
        return build_frame(FrameFamily(fam["kind"], int(fam["n"]), int(fam["two_qubit_count"]), seed=int(fam.get("seed", 0)), gate=fam.get("gate", "cz"), periodic_wrap=bool(fam.get("periodic_wrap", True))))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid frame description: {exc}") from None


def _cmd_sample(args) -> int:
    frame = _load_frame(args.frame)
    if args.count < 1:
        raise ConfigError("--count must be >= 1")
    rng = np.random.default_rng(args.seed)
    if args.algorithm == "nonuniform":
        samples = sample_nonuniform_indices(frame, args.count, rng)
    else:
        length = frame.n_slots - frame.n
        m = min(args.proposal_m, length) if length else 1
        samples = sample_uniform_indices(frame, args.count, rng, proposal=default_proposal(m), burn_in=args.burn_in)
    f = heisenberg_sweep(frame, samples.indices).ideal
    if args.out:
        with open(args.out, "w") as fh:
            dump_samples(samples, fh, f)
    else:
        dump_samples(samples, sys.stdout, f)
    eta, se = samples.eta_estimate()
    log.info("eta estimate %.6g +- %.2g", eta, se)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qem-ics", description="Importance Clifford sampling for error-mitigation studies.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--out", default=None, help="output directory (overrides output_path)")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=_cmd_run)

    f = sub.add_parser("fit", help="power-law fit of two CSV columns")
    f.add_argument("--input", required=True)
    f.add_argument("--x", required=True)
    f.add_argument("--y", required=True)
    f.add_argument("--where", action="append", default=[], help="row filter column=value (repeatable)")
    f.set_defaults(func=_cmd_fit)

    s = sub.add_parser("sample", help="sample error-sensitive Clifford circuits as JSON lines")
    s.add_argument("--frame", required=True, help="frame JSON (elements form or a family spec)")
    s.add_argument("--algorithm", choices=["nonuniform", "uniform"], required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--proposal-m", type=int, default=1, help="slots resampled per Metropolis-Hastings proposal")
    s.add_argument("--burn-in", type=int, default=None)
    s.add_argument("--out", default=None, help="write to a file instead of stdout")
    s.set_defaults(func=_cmd_sample)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "workers", 1) is not None and getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
