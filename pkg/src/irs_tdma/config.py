"""Run configuration: ``key = value`` text with ``[scenario]`` / ``[run]`` sections.

Keys before the first header may come from either section. Command-line
overrides are ``key=value`` or ``section.key=value`` and win over the file.
"""
import ast
import configparser
from dataclasses import dataclass, field, fields, replace
from importlib import resources

from .channel import SCENARIO_PARSERS, Scenario, scenario_from_mapping
from .clustering import Policy

EXPERIMENTS = ("sweep-z", "sweep-irs-size", "sweep-quantization", "single")
_TOP = "__top__"


class ConfigError(ValueError):
    """Bad configuration. ``lineno`` is set for syntax errors, ``key`` for bad values."""

    def __init__(self, message, lineno=None, key=None):
        super().__init__(message)
        self.lineno = lineno
        self.key = key


def parse_list(text, cast=int):
    return tuple(cast(p.strip()) for p in str(text).split(",") if p.strip())


def parse_bits_list(text):
    """``"cont,5,2"`` -> ``(None, 5, 2)``; ``cont`` means continuous phases."""
    out = []
    for p in str(text).split(","):
        p = p.strip().lower()
        if not p:
            continue
        out.append(None if p in ("cont", "continuous", "inf") else int(p))
    return tuple(out)


def parse_sizes(text):
    """``"4x8, 8x16"`` -> ``((4, 8), (8, 16))``."""
    sizes = []
    for p in str(text).split(","):
        p = p.strip().lower()
        if p:
            r, c = p.split("x")
            sizes.append((int(r), int(c)))
    return tuple(sizes)


def _policies(text):
    return tuple(Policy(p) for p in parse_list(text, str))


RUN_PARSERS = {
    "experiment": str,
    "policies": _policies,
    "z_values": parse_list,
    "bits": parse_bits_list,
    "irs_sizes": parse_sizes,
    "drops": int,
    "seed": int,
    "workers": int,
    "out": str,
    "rate_tol": float,
    "max_iter": int,
}


def default_z_values(K):
    """Eleven budgets: 1 and the tenths of K."""
    return tuple(sorted({1, *(max(1, round(K * i / 10)) for i in range(1, 11))}))


@dataclass
class RunConfig:
    scenario: Scenario = field(default_factory=Scenario)
    experiment: str = "sweep-z"
    policies: tuple = None
    z_values: tuple = None
    bits: tuple = None
    irs_sizes: tuple = None
    drops: int = 5
    seed: int = 0
    workers: int = 1
    out: str = "out"
    rate_tol: float = 1e-4
    max_iter: int = 50

    def resolved(self):
        """Copy with experiment-dependent defaults filled in."""
        K = self.scenario.K
        policies = self.policies
        if policies is None:
            policies = tuple(Policy) if self.experiment in ("sweep-z", "single") else (Policy.CWC,)
        bits = self.bits
        if bits is None:
            bits = (None, 5, 2, 1) if self.experiment == "sweep-quantization" else (None,)
        sizes = self.irs_sizes
        if sizes is None:
            sizes = ((4, 8), (8, 16), (10, 20)) if self.experiment == "sweep-irs-size" else (tuple(self.scenario.n_i),)
        return replace(self, policies=policies, z_values=self.z_values or default_z_values(K),
                       bits=bits, irs_sizes=sizes)


def _read(text):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       strict=True, empty_lines_in_values=False)
    parser.optionxform = str
    try:
        parser.read_string(f"[{_TOP}]\n" + text)
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"line {lineno - 1}: cannot parse {ast.literal_eval(line).strip()!r}",
                          lineno=lineno - 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"line {exc.lineno - 1}: duplicate key '{exc.option}'",
                          lineno=exc.lineno - 1, key=exc.option) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"line {exc.lineno - 1}: duplicate section [{exc.section}]",
                          lineno=exc.lineno - 1) from None
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _route(section, key, allowed=None):
    if section == _TOP and allowed == "scenario":
        return "scenario"
    if section == "scenario" or (section == _TOP and key in SCENARIO_PARSERS and key not in RUN_PARSERS):
        return "scenario"
    if section in ("run", _TOP):
        return "run"
    return None


def apply_values(cfg, values, allowed=None):
    """Apply ``{(section, key): text}`` to a RunConfig, validating names and types."""
    scen_vals, run_vals = {}, {}
    for (section, key), text in values.items():
        target = _route(section, key, allowed)
        if target is None:
            raise ConfigError(f"unknown section [{section}]", key=key)
        table = SCENARIO_PARSERS if target == "scenario" else RUN_PARSERS
        if key not in table or (allowed and target != allowed):
            raise ConfigError(f"unknown configuration key '{key}'", key=key)
        (scen_vals if target == "scenario" else run_vals)[key] = text
    try:
        scenario = scenario_from_mapping(scen_vals, base=cfg.scenario)
    except ValueError as exc:
        key = str(exc).split(":", 1)[0]
        raise ConfigError(f"invalid value for '{key}': {exc}", key=key) from None
    updates = {"scenario": scenario}
    for key, text in run_vals.items():
        try:
            updates[key] = RUN_PARSERS[key](text)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for '{key}': {exc}", key=key) from None
    return replace(cfg, **updates)


def load_config(text, base=None, allowed=None):
    """Parse configuration text into a RunConfig layered over ``base``."""
    sections = _read(text)
    values = {(s, k): v for s, kv in sections.items() for k, v in kv.items()}
    return apply_values(base or RunConfig(), values, allowed=allowed)


def apply_overrides(cfg, overrides):
    values = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value", key=item)
        key, text = (s.strip() for s in item.split("=", 1))
        section, _, name = key.rpartition(".")
        values[(section or _TOP, name)] = text
    return apply_values(cfg, values)


def load_profile(name):
    text = resources.files("irs_tdma").joinpath("profiles", f"{name}.ini").read_text()
    return load_config(text)


def dump_config(cfg):
    """Render a RunConfig back to text that :func:`load_config` reads."""
    s = cfg.scenario
    lines = ["[scenario]"]
    for f in fields(Scenario):
        if f.name == "ue_positions":
            continue
        v = getattr(s, f.name)
        if isinstance(v, tuple):
            sep = "x" if f.name in ("n_g", "n_i") else ","
            v = sep.join(repr(x) for x in v)
        lines.append(f"{f.name} = {v!r}" if isinstance(v, float) else f"{f.name} = {v}")
    lines.append("")
    lines.append("[run]")
    lines.append(f"experiment = {cfg.experiment}")
    if cfg.policies is not None:
        lines.append("policies = " + ",".join(Policy(p).value for p in cfg.policies))
    if cfg.z_values is not None:
        lines.append("z_values = " + ",".join(str(z) for z in cfg.z_values))
    if cfg.bits is not None:
        lines.append("bits = " + ",".join("cont" if b is None else str(b) for b in cfg.bits))
    if cfg.irs_sizes is not None:
        lines.append("irs_sizes = " + ",".join(f"{r}x{c}" for r, c in cfg.irs_sizes))
    for key in ("drops", "seed", "workers", "out", "rate_tol", "max_iter"):
        v = getattr(cfg, key)
        lines.append(f"{key} = {v!r}" if isinstance(v, float) else f"{key} = {v}")
    return "\n".join(lines) + "\n"


def validate(cfg):
    """Every problem with a RunConfig, as strings; empty means valid. Never mutates."""
    out = [f"scenario.{p}" for p in cfg.scenario.validate()]
    K = cfg.scenario.K
    if cfg.experiment not in EXPERIMENTS:
        out.append(f"experiment: '{cfg.experiment}' is not one of {', '.join(EXPERIMENTS)}")
    for z in cfg.z_values or ():
        if z > K:
            out.append(f"z_values: Z={z} exceeds K={K}; the block-static constraint needs Z <= K "
                       "(UEs are split into Z disjoint subsets)")
        elif z < 1:
            out.append(f"z_values: Z={z} is below 1")
    for b in cfg.bits or ():
        if b is not None and b < 1:
            out.append(f"bits: b={b}; the phase quantizer needs b > 0 bits")
    for size in cfg.irs_sizes or ():
        if len(size) != 2 or min(size) < 1:
            out.append(f"irs_sizes: {size} is not a valid rows x cols panel")
    if cfg.drops < 1:
        out.append("drops: must be >= 1")
    if cfg.workers < 1:
        out.append("workers: must be >= 1")
    if not 0 <= cfg.seed < 2**64:
        out.append("seed: must be an unsigned 64-bit integer")
    if not cfg.rate_tol > 0:
        out.append("rate_tol: must be > 0")
    if cfg.max_iter < 1:
        out.append("max_iter: must be >= 1")
    return out
