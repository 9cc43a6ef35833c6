"""Line-oriented scenario files.

A file is a sequence of ``[section]`` headers followed by ``key = value``
lines.  ``#`` starts a comment.  ``[service]`` and ``[source]`` may repeat;
every other section appears at most once.  See ``docs/scenario-format.md``
for the full grammar.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .equilibrium import SolverConfig
from .market import (
    Complementary,
    Empirical,
    FusionRule,
    MarketError,
    Scenario,
    Service,
    Substitute,
    Uniform,
)
from .voi import DecisionError, DecisionProblem


class ScenarioParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, path=None):
        self.message = message
        self.line = line
        self.path = path
        where = f"{path or '<scenario>'}:{line}" if line is not None else str(path or "<scenario>")
        super().__init__(f"{where}: {message}")


SECTION_KEYS = {
    "service": {"detection", "false_alarm", "cost"},
    "market": {"mode", "fusion"},
    "valuation": {"kind", "lo", "hi", "samples", "path"},
    "solver": {f.name for f in dataclasses.fields(SolverConfig)},
    "voi": {"states", "actions", "observations", "prior", "cost"},
    "source": {"observations", "cost"},
}
ROW_PREFIXES = {"voi": ("payoff", "channel"), "source": ("channel",)}
REPEATABLE = {"service", "source"}
SOLVER_INTS = {"grid_points", "refine_rounds", "max_iterations"}


@dataclass
class _Section:
    name: str
    line: int
    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def number(self, key, default=None, integer=False):
        if key not in self.values:
            if default is None:
                raise ScenarioParseError(f"[{self.name}] missing key '{key}'", self.line)
            return default
        raw = self.values[key]
        try:
            return int(raw) if integer else float(raw)
        except ValueError:
            kind = "integer" if integer else "number"
            raise ScenarioParseError(f"'{key}' must be a {kind}, got {raw!r}", self.lines[key]) from None

    def numbers(self, key):
        raw = self.values[key]
        try:
            return [float(x) for x in _split(raw)]
        except ValueError:
            raise ScenarioParseError(f"'{key}' must be a list of numbers", self.lines[key]) from None


def _split(raw: str) -> list[str]:
    return [x.strip() for x in raw.split(",") if x.strip()]


@dataclass
class InfoSource:
    channel: list
    cost: float = 0.0
    observations: Optional[tuple] = None


@dataclass
class ScenarioFile:
    """Everything a scenario file can hold; market and VoI parts are both optional."""

    services: list = field(default_factory=list)
    mode: object = field(default_factory=Substitute)
    valuation: object = field(default_factory=Uniform)
    solver: dict = field(default_factory=dict)
    voi: Optional[DecisionProblem] = None
    voi_cost: float = 0.0
    sources: list = field(default_factory=list)

    @property
    def scenario(self) -> Scenario:
        if not self.services:
            raise MarketError("scenario file defines no [service] sections")
        return Scenario(tuple(self.services), self.mode, self.valuation)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(**self.solver)


def _tokenize(text: str, path=None) -> list[_Section]:
    sections: list[_Section] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioParseError(f"malformed section header {raw.strip()!r}", lineno, path)
            name = line[1:-1].strip().lower()
            if name not in SECTION_KEYS:
                raise ScenarioParseError(f"unknown section [{name}]", lineno, path)
            if name not in REPEATABLE and any(s.name == name for s in sections):
                raise ScenarioParseError(f"section [{name}] may appear only once", lineno, path)
            sections.append(_Section(name, lineno))
            continue
        if "=" not in line:
            raise ScenarioParseError(f"expected 'key = value', got {raw.strip()!r}", lineno, path)
        if not sections:
            raise ScenarioParseError("key outside of any section", lineno, path)
        key, value = (part.strip() for part in line.split("=", 1))
        sec = sections[-1]
        prefix = key.split(".", 1)[0]
        row_key = "." in key and prefix in ROW_PREFIXES.get(sec.name, ())
        if not row_key and key not in SECTION_KEYS[sec.name]:
            raise ScenarioParseError(f"unknown key '{key}' in [{sec.name}]", lineno, path)
        if key in sec.values:
            raise ScenarioParseError(f"duplicate key '{key}'", lineno, path)
        sec.values[key] = value
        sec.lines[key] = lineno
    return sections


def _rows(sec: _Section, prefix: str, states: tuple) -> list:
    rows = []
    for state in states:
        key = f"{prefix}.{state}"
        if key not in sec.values:
            raise ScenarioParseError(f"[{sec.name}] missing row '{key}'", sec.line)
        rows.append(sec.numbers(key))
    extra = [
        k for k in sec.values
        if k.startswith(prefix + ".") and k.split(".", 1)[1] not in states
    ]
    if extra:
        raise ScenarioParseError(f"row for unknown state '{extra[0]}'", sec.lines[extra[0]])
    return rows


def _parse_valuation(sec: _Section, base: Path):
    kind = sec.get("kind", "uniform").lower()
    if kind == "uniform":
        return Uniform(sec.number("lo", 0.0), sec.number("hi", 2.0))
    if kind == "empirical":
        if "samples" in sec.values:
            return Empirical(tuple(sec.numbers("samples")))
        if "path" in sec.values:
            path = base / sec.values["path"]
            try:
                text = path.read_text()
            except OSError as exc:
                raise ScenarioParseError(f"cannot read samples: {exc}", sec.lines["path"]) from None
            try:
                return Empirical(tuple(float(x) for x in text.split()))
            except ValueError:
                raise ScenarioParseError(f"bad number in {path}", sec.lines["path"]) from None
        raise ScenarioParseError("empirical valuation needs 'samples' or 'path'", sec.line)
    raise ScenarioParseError(f"unknown valuation kind '{kind}'", sec.lines.get("kind", sec.line))


def _parse_mode(sec: _Section):
    mode = sec.get("mode", "substitute").lower()
    if mode == "substitute":
        if "fusion" in sec.values:
            raise ScenarioParseError("'fusion' only applies to complementary markets", sec.lines["fusion"])
        return Substitute()
    if mode == "complementary":
        fusion = sec.get("fusion")
        if fusion is None:
            raise ScenarioParseError("complementary market needs 'fusion = or|and'", sec.line)
        try:
            return Complementary(FusionRule(fusion.lower()))
        except ValueError:
            raise ScenarioParseError(f"unknown fusion rule '{fusion}'", sec.lines["fusion"]) from None
    raise ScenarioParseError(f"unknown market mode '{mode}'", sec.lines.get("mode", sec.line))


def parse_scenario(text: str, path=None, base: Optional[Path] = None) -> ScenarioFile:
    """Parse scenario text; errors carry the offending line number."""
    base = base or (Path(path).parent if path else Path("."))
    out = ScenarioFile()
    voi_sec = None
    source_secs = []
    for sec in _tokenize(text, path):
        try:
            if sec.name == "service":
                out.services.append(
                    Service(sec.number("detection"), sec.number("false_alarm"), sec.number("cost", 0.0))
                )
            elif sec.name == "market":
                out.mode = _parse_mode(sec)
            elif sec.name == "valuation":
                out.valuation = _parse_valuation(sec, base)
            elif sec.name == "solver":
                out.solver = {
                    k: sec.number(k, integer=k in SOLVER_INTS) for k in sec.values
                }
                SolverConfig(**out.solver)
            elif sec.name == "voi":
                voi_sec = sec
            else:
                source_secs.append(sec)
        except (MarketError, DecisionError) as exc:
            raise ScenarioParseError(str(exc), sec.line, path) from None
        except ScenarioParseError as exc:
            raise ScenarioParseError(exc.message, exc.line, path) from None

    if voi_sec is None:
        if source_secs:
            raise ScenarioParseError("[source] needs a [voi] section", source_secs[0].line, path)
        return out
    try:
        _parse_voi(voi_sec, source_secs, out)
    except DecisionError as exc:
        raise ScenarioParseError(str(exc), voi_sec.line, path) from None
    except ScenarioParseError as exc:
        raise ScenarioParseError(exc.message, exc.line, path) from None
    return out


def _parse_voi(sec: _Section, source_secs: list, out: ScenarioFile) -> None:
    for key in ("states", "actions", "prior"):
        if key not in sec.values:
            raise ScenarioParseError(f"[voi] missing key '{key}'", sec.line)
    states = tuple(_split(sec.values["states"]))
    actions = tuple(_split(sec.values["actions"]))
    payoff = _rows(sec, "payoff", states)
    has_channel = any(k.startswith("channel.") for k in sec.values)
    channel = _rows(sec, "channel", states) if has_channel else None
    observations = tuple(_split(sec.values["observations"])) if "observations" in sec.values else None
    out.voi = DecisionProblem(sec.numbers("prior"), payoff, channel, states, actions, observations)
    out.voi_cost = sec.number("cost", 0.0)
    if out.voi_cost < 0:
        raise ScenarioParseError("[voi] cost must be nonnegative", sec.lines["cost"])
    for src in source_secs:
        obs = tuple(_split(src.values["observations"])) if "observations" in src.values else None
        source = InfoSource(_rows(src, "channel", states), src.number("cost", 0.0), obs)
        if source.cost < 0:
            raise ScenarioParseError("[source] cost must be nonnegative", src.lines["cost"])
        try:
            out.voi.with_channel(source.channel, obs)
        except DecisionError as exc:
            raise ScenarioParseError(str(exc), src.line) from None
        out.sources.append(source)


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioParseError(f"cannot read scenario: {exc.strerror}", path=path) from None
    return parse_scenario(text, path=path)


def _num(x: float) -> str:
    return repr(float(x))


def _nums(xs) -> str:
    return ", ".join(_num(x) for x in xs)


def dump_scenario(sf: ScenarioFile) -> str:
    """Normalized text form; ``parse_scenario(dump_scenario(sf))`` reproduces ``sf``."""
    lines = []
    for svc in sf.services:
        lines += [
            "[service]",
            f"detection = {_num(svc.detection_prob)}",
            f"false_alarm = {_num(svc.false_alarm_prob)}",
            f"cost = {_num(svc.fixed_cost)}",
            "",
        ]
    if sf.services:
        lines.append("[market]")
        if isinstance(sf.mode, Complementary):
            lines += ["mode = complementary", f"fusion = {sf.mode.rule.value}"]
        else:
            lines.append("mode = substitute")
        lines.append("")
        lines.append("[valuation]")
        if isinstance(sf.valuation, Uniform):
            lines += ["kind = uniform", f"lo = {_num(sf.valuation.lo)}", f"hi = {_num(sf.valuation.hi)}"]
        else:
            lines += ["kind = empirical", f"samples = {_nums(sf.valuation.samples)}"]
        lines.append("")
    if sf.solver:
        lines.append("[solver]")
        for f in dataclasses.fields(SolverConfig):
            if f.name in sf.solver:
                value = sf.solver[f.name]
                lines.append(f"{f.name} = {value if f.name in SOLVER_INTS else _num(value)}")
        lines.append("")
    if sf.voi is not None:
        p = sf.voi
        lines += [
            "[voi]",
            f"states = {', '.join(p.states)}",
            f"actions = {', '.join(p.actions)}",
            f"prior = {_nums(p.prior)}",
        ]
        lines += [f"payoff.{x} = {_nums(row)}" for x, row in zip(p.states, p.payoff)]
        if p.channel is not None:
            lines.append(f"observations = {', '.join(p.observations)}")
            lines += [f"channel.{x} = {_nums(row)}" for x, row in zip(p.states, p.channel)]
        lines += [f"cost = {_num(sf.voi_cost)}", ""]
        for src in sf.sources:
            lines.append("[source]")
            if src.observations is not None:
                lines.append(f"observations = {', '.join(src.observations)}")
            lines += [f"channel.{x} = {_nums(row)}" for x, row in zip(p.states, src.channel)]
            lines += [f"cost = {_num(src.cost)}", ""]
    return "\n".join(lines).rstrip("\n") + "\n"
