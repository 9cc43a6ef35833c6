"""Golden-file CLI invocations shared by the CLI and acceptance tests.

Regenerate the frozen outputs with ``IOTMARKET_UPDATE_GOLDEN=1 pytest tests/test_cli.py``.
"""

import contextlib
import io
from pathlib import Path

from iotmarket.cli import main

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "golden"
SCN = ROOT / "scenarios"

CASES = {
    "demand_sweep_substitute_p1_011": ["demand-sweep", "substitute", "--fixed", "0.11", "--lo", "0", "--hi", "2", "--steps", "201"],
    "demand_sweep_substitute_p1_051": ["demand-sweep", "substitute", "--fixed", "0.51", "--lo", "0", "--hi", "2", "--steps", "201"],
    "demand_sweep_substitute_p1_091": ["demand-sweep", "substitute", "--fixed", "0.91", "--lo", "0", "--hi", "2", "--steps", "201"],
    "demand_sweep_substitute_mc": ["demand-sweep", "substitute", "--fixed", "0.51", "--steps", "21", "--samples", "20000"],
    "demand_sweep_or": ["demand-sweep", "complementary_or", "--fixed", "0.3", "--lo", "0", "--hi", "2", "--steps", "201"],
    "demand_sweep_and": ["demand-sweep", "complementary_and", "--fixed", "0.3", "--lo", "0", "--hi", "2", "--steps", "201"],
    "profit_sweep_substitute": ["profit-sweep", "substitute", "--fixed", "0.51", "--lo", "0", "--hi", "2", "--steps", "201"],
    "profit_sweep_or": ["profit-sweep", "complementary_or", "--fixed", "0.3", "--steps", "201"],
    "profit_sweep_and": ["profit-sweep", "complementary_and", "--fixed", "0.3", "--steps", "201"],
    "br_curve_substitute_2": ["br-curve", "substitute", "--service", "2", "--steps", "91"],
    "br_curve_substitute_1": ["br-curve", "substitute", "--service", "1", "--steps", "91"],
    "br_curve_or": ["br-curve", "complementary_or", "--steps", "91"],
    "br_curve_and": ["br-curve", "complementary_and", "--steps", "91"],
    "nash_substitute": ["nash", "substitute"],
    "nash_or": ["nash", "complementary_or"],
    "nash_and": ["nash", "complementary_and"],
    "nash_monopoly": ["nash", "monopoly"],
    "voi_binary": ["voi", "voi_binary"],
    "voi_uninformative": ["voi", "voi_uninformative"],
    "voi_sources": ["voi", "voi_sources"],
}


def argv_for(name, seed=42):
    cmd, scenario, *rest = CASES[name]
    return [cmd, "--scenario", str(SCN / f"{scenario}.scn"), "--seed", str(seed), *rest]


def run_cli(argv):
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            code = main(argv)
        except SystemExit as exc:
            code = exc.code
    return code, out.getvalue(), err.getvalue()
