"""Command-line driver: sweeps, best-response curves, equilibria and VoI reports.

Every command reads a scenario file and writes CSV (comma separated, header
row, LF endings) to standard output or ``--out``.  Exit codes: 0 success,
1 usage or parse error, 2 solver did not converge, 3 equilibrium failed the
epsilon-Nash check.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .demand import demand_curve, demand_monte_carlo
from .equilibrium import best_response_curve, nash_solve, verify_epsilon_nash
from .market import MarketError, as_prices
from .scenario_file import ScenarioParseError, load_scenario
from .voi import DecisionError, expected_voi, select_source

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_NOT_CERTIFIED = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """12 significant digits, no negative zero."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    text = format(float(x), ".12g")
    return "0" if text == "-0" else text


def _write_csv(rows, out) -> None:
    for row in rows:
        out.write(",".join(r if isinstance(r, str) else fmt(r) for r in row) + "\n")


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None:
        buf = io.StringIO()
        yield buf
        sys.stdout.write(buf.getvalue())
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _sweep_setup(args):
    sf = load_scenario(args.scenario)
    scenario = sf.scenario
    n = scenario.n_services
    s = (args.service if args.service is not None else n) - 1
    if not 0 <= s < n:
        raise UsageError(f"--service must be in 1..{n}")
    fixed = _floats(args.fixed) if args.fixed else [0.0] * (n - 1)
    if len(fixed) != n - 1:
        raise UsageError(f"--fixed needs {n - 1} prices (one per other service)")
    lo_default, hi_default = scenario.default_price_bounds()
    lo = lo_default if args.lo is None else args.lo
    hi = hi_default if args.hi is None else args.hi
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    if lo < 0 or hi < lo:
        raise UsageError("sweep needs 0 <= lo <= hi")
    grid = np.linspace(lo, hi, args.steps)
    return sf, scenario, s, fixed, grid


def _price_vector(fixed, s, price):
    p = list(fixed)
    p.insert(s, float(price))
    return p


def _demands(scenario, prices, args) -> list[float]:
    if args.samples is not None:
        return list(demand_monte_carlo(scenario, prices, args.samples, args.seed).demand)
    return [
        float(demand_curve(scenario, j, prices, [prices[j]])[0])
        for j in range(scenario.n_services)
    ]


def cmd_demand_sweep(args) -> int:
    _, scenario, s, fixed, grid = _sweep_setup(args)
    header = ["swept_price"] + [f"demand_{j + 1}" for j in range(scenario.n_services)]
    with _output(args.out) as out:
        _write_csv([header], out)
        for price in grid:
            _write_csv([[price] + _demands(scenario, _price_vector(fixed, s, price), args)], out)
    return EXIT_OK


def cmd_profit_sweep(args) -> int:
    _, scenario, s, fixed, grid = _sweep_setup(args)
    cost = scenario.services[s].fixed_cost
    with _output(args.out) as out:
        _write_csv([["swept_price", f"profit_{s + 1}"]], out)
        for price in grid:
            d = _demands(scenario, _price_vector(fixed, s, price), args)[s]
            _write_csv([[price, price * d - cost]], out)
    return EXIT_OK


def cmd_br_curve(args) -> int:
    sf = load_scenario(args.scenario)
    scenario = sf.scenario
    if scenario.n_services != 2:
        raise UsageError("br-curve needs a two-service scenario")
    s = (args.service if args.service is not None else 2) - 1
    if s not in (0, 1):
        raise UsageError("--service must be 1 or 2")
    cfg = sf.solver_config()
    lo_default, hi_default = cfg.bounds(scenario)
    lo = lo_default if args.lo is None else args.lo
    hi = hi_default if args.hi is None else args.hi
    if args.steps < 2 or lo < 0 or hi < lo:
        raise UsageError("br-curve needs --steps >= 2 and 0 <= lo <= hi")
    curve = best_response_curve(s, np.linspace(lo, hi, args.steps), scenario, cfg)
    with _output(args.out) as out:
        _write_csv([["opponent_price", "best_response"]], out)
        _write_csv(curve, out)
    return EXIT_OK


def cmd_nash(args) -> int:
    sf = load_scenario(args.scenario)
    scenario = sf.scenario
    cfg = sf.solver_config()
    initial = _floats(args.initial) if args.initial else None
    if initial is not None:
        as_prices(initial, scenario)
    result = nash_solve(scenario, cfg, initial)
    cert = verify_epsilon_nash(
        result.prices, scenario, args.epsilon, args.check_grid, cfg.bounds(scenario)
    )

    n = scenario.n_services
    with _output(args.out) as out:
        _write_csv([["iteration"] + [f"price_{j + 1}" for j in range(n)]], out)
        _write_csv([[i] + list(p) for i, p in enumerate(result.trace)], out)

    log = sys.stderr
    log.write(f"converged: {'yes' if result.converged else 'no'} after {result.iterations} sweeps\n")
    for j in range(n):
        log.write(
            f"service {j + 1}: price {fmt(result.prices[j])}  profit {fmt(result.profits[j])}"
            f"  best deviation gain {fmt(cert.gains[j])}\n"
        )
    log.write(f"epsilon-Nash at {fmt(args.epsilon)}: {'pass' if cert.passed else 'FAIL'}\n")
    if not result.converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK if cert.passed else EXIT_NOT_CERTIFIED


def cmd_voi(args) -> int:
    sf = load_scenario(args.scenario)
    problem = sf.voi
    if problem is None:
        raise UsageError("scenario has no [voi] section")
    rows = [["field", "value"]]
    if problem.channel is not None:
        report = expected_voi(problem, sf.voi_cost)
        rows.append(["prior_action", problem.actions[report.prior_action]])
        for k, a in sorted(report.posterior_actions.items()):
            rows.append([f"action[{problem.observations[k]}]", problem.actions[a]])
        rows += [
            ["expected_value", report.expected_value],
            ["cost", report.cost],
            ["gain", report.gain],
        ]
    if sf.sources:
        sources = [(src.channel, src.cost) for src in sf.sources]
        for i, (ch, cost) in enumerate(sources):
            rep = expected_voi(problem.with_channel(ch), cost)
            rows.append([f"source_{i + 1}_gain", rep.gain])
        best, gain = select_source(problem, sources)
        rows += [["selected_source", best + 1], ["selected_gain", gain]]
    if len(rows) == 1:
        raise UsageError("[voi] section has neither a channel nor [source] sections")
    with _output(args.out) as out:
        _write_csv(rows, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iotmarket", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario file")
        p.add_argument("--out", help="write CSV here instead of standard output")
        p.add_argument("--seed", type=int, default=42, help="seed for Monte Carlo demand")

    def sweep(p):
        p.add_argument("--service", type=int, help="1-based index of the swept service (default: last)")
        p.add_argument("--fixed", help="prices of the other services, comma separated, in index order")
        p.add_argument("--lo", type=float, help="sweep start (default 0)")
        p.add_argument("--hi", type=float, help="sweep end (default v_max * max detection prob)")
        p.add_argument("--steps", type=int, default=201)
        p.add_argument("--samples", type=int, help="use Monte Carlo demand with this many users")

    for name, fn, helptext in [
        ("demand-sweep", cmd_demand_sweep, "demand of every service while one price varies"),
        ("profit-sweep", cmd_profit_sweep, "profit of the swept service while its price varies"),
    ]:
        p = sub.add_parser(name, help=helptext)
        common(p)
        sweep(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("br-curve", help="best response against a grid of opponent prices")
    common(p)
    p.add_argument("--service", type=int, help="1-based index of the responding service (default 2)")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--steps", type=int, default=201)
    p.set_defaults(func=cmd_br_curve)

    p = sub.add_parser("nash", help="iterated best response plus epsilon-Nash check")
    common(p)
    p.add_argument("--initial", help="starting prices, comma separated (default all at price_lo)")
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--check-grid", type=int, default=10_000)
    p.set_defaults(func=cmd_nash)

    p = sub.add_parser("voi", help="value-of-information report")
    common(p)
    p.set_defaults(func=cmd_voi)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ScenarioParseError, MarketError, DecisionError, OSError) as exc:
        print(f"iotmarket: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
