"""
Experiment harness and CLI
==========================

Runs a small scaling sweep from a JSON config, writes CSV tables with metadata
sidecars, fits the scaling exponents, and drives the same steps through the
``qem-ics`` command line.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from qem_ics.harness import fit_power_law, load_config, read_table, run_experiment, write_result

sys.stdout.reconfigure(line_buffering=True)  # keep our lines ordered with the CLI's
here = Path(__file__).parent
config = load_config(here / "configs" / "quick_scaling.json")
out = Path(tempfile.mkdtemp())

result = run_experiment(config)
paths = write_result(result, config, str(out))
print("wrote:", [p.name for p in paths])

table = read_table(out / "scaling.csv")
for r in table.records():
    print(f"N = {int(r['N']):3d}  eps = {r['epsilon']:.2e}  sqrt(L) = {r['sqrt_L']:.2e}  sqrt(L') = {r['sqrt_Lp']:.2e}  ratio = {r['ratio']:.2f}")
fit = fit_power_law([(r["N"], r["ratio"]) for r in table.records()])
print(f"sqrt(L/L') ~ N^{fit.exponent:.2f}")
print("metadata:", json.loads((out / "scaling.meta.json").read_text())["config_sha256"][:16], "...")

# The same through the CLI; exit codes are 0 ok, 2 config error, 3 numerical failure
cli = [sys.executable, "-m", "qem_ics.cli"]
subprocess.run(cli + ["run", "--config", str(here / "configs" / "quick_scaling.json"), "--out", str(out / "cli")], check=True)
subprocess.run(cli + ["fit", "--input", str(out / "cli" / "scaling.csv"), "--x", "N", "--y", "ratio"], check=True)
sample = subprocess.run(
    cli + ["sample", "--frame", str(here / "configs" / "frame_periodic4.json"), "--algorithm", "uniform", "--count", "3"],
    check=True, capture_output=True, text=True,
)
print(sample.stdout.splitlines()[0][:120], "...")
bad = subprocess.run(cli + ["run", "--config", "/no/such/file.json"], capture_output=True, text=True)
print("missing config exit code:", bad.returncode)
