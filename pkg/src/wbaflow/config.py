"""Run configuration: a small sectioned key-value text format.

Example::

    [run]
    command = scan
    workers = 8

    [system]
    name = two-wave
    mu = 0.03

    [grid]
    axis = p0
    lo = 0.0
    hi = 0.5
    count = 501

    [numeric]
    T = 1000
    x0 = 0 0.45

Sections hold ``key = value`` lines; ``#`` starts a comment; arrays are
space-separated.  Parsing is strict: unknown sections or keys are rejected,
and validation reports every problem at once, not just the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from . import systems
from .core import DEFAULT_THRESHOLD
from .weights import DEFAULT_WIDTH, KINDS

COMMANDS = ("wba", "dig", "scan", "poincare", "fraction", "widths",
            "rotation", "eps-critical")

DEFAULT_TOL = 1e-13
DEFAULT_T = 1000.0
DEFAULT_WEIGHT = "bump"


class ParseError(ValueError):
    """Syntax error; carries (line, column)."""

    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValidationError(ValueError):
    """All validation problems found in a config, as a list of messages."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class RunConfig:
    command: str
    system: str
    params: dict = dc_field(default_factory=dict)
    modes: tuple | None = None  # optional farey mode list (m, n, amplitude)
    x0: tuple | None = None
    axis: str | None = None
    lo: float | None = None
    hi: float | None = None
    count: int | None = None
    inner_axis: str | None = None
    inner_lo: float | None = None
    inner_hi: float | None = None
    inner_count: int | None = None
    T: float = DEFAULT_T
    abs_tol: float = DEFAULT_TOL
    rel_tol: float = DEFAULT_TOL
    initial_step: float = 1e-2
    max_step: float = math.inf
    threshold: float = DEFAULT_THRESHOLD
    weight: str = DEFAULT_WEIGHT
    width: float = DEFAULT_WIDTH
    observable: str | None = None
    crossings: int = 1000
    widths: tuple | None = None
    eps_lo: float = 0.5
    eps_hi: float = 1.0
    eps_step: float = 0.005
    t_max: float = 1.0e4
    psi_target: float = 0.45
    out: str | None = None
    workers: int | None = None
    seed: int = 0  # reserved; deterministic commands ignore it
    timing: bool = False


# section -> key -> (type tag, RunConfig attribute)
_SCHEMA = {
    "run": {
        "command": ("str", "command"),
        "out": ("str", "out"),
        "workers": ("int", "workers"),
        "seed": ("int", "seed"),
        "timing": ("bool", "timing"),
    },
    "system": {
        "name": ("str", "system"),
        # system parameters are validated separately
    },
    "grid": {
        "axis": ("str", "axis"),
        "lo": ("float", "lo"),
        "hi": ("float", "hi"),
        "count": ("int", "count"),
        "inner_axis": ("str", "inner_axis"),
        "inner_lo": ("float", "inner_lo"),
        "inner_hi": ("float", "inner_hi"),
        "inner_count": ("int", "inner_count"),
    },
    "numeric": {
        "T": ("float", "T"),
        "abs_tol": ("float", "abs_tol"),
        "rel_tol": ("float", "rel_tol"),
        "initial_step": ("float", "initial_step"),
        "max_step": ("float", "max_step"),
        "threshold": ("float", "threshold"),
        "weight": ("str", "weight"),
        "width": ("float", "width"),
        "observable": ("str", "observable"),
        "x0": ("floats", "x0"),
        "crossings": ("int", "crossings"),
        "widths": ("floats", "widths"),
        "eps_lo": ("float", "eps_lo"),
        "eps_hi": ("float", "eps_hi"),
        "eps_step": ("float", "eps_step"),
        "t_max": ("float", "t_max"),
        "psi_target": ("float", "psi_target"),
    },
}

_SYSTEM_PARAMS = {
    "two-wave": ("mu",),
    "qp-pendulum": ("b", "nu", "a", "c", "gamma"),
    "farey": ("epsilon", "modes"),
}


def _parse_value(tag, raw, line):
    try:
        if tag == "str":
            return raw
        if tag == "int":
            return int(raw)
        if tag == "float":
            return float(raw)
        if tag == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if tag == "floats":
            return tuple(float(tok) for tok in raw.split())
    except ValueError:
        raise ParseError(f"cannot parse {raw!r} as {tag}", line) from None
    raise ParseError(f"unknown value type {tag}", line)


def _parse_modes(raw, line):
    """Farey mode list: semicolon-separated 'm n amplitude' triples."""
    modes = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        toks = chunk.split()
        if len(toks) != 3:
            raise ParseError(f"mode {chunk!r} is not 'm n amplitude'", line)
        try:
            m, n = int(toks[0]), int(toks[1])
            amp = Fraction(toks[2]) if "/" in toks[2] else float(toks[2])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"cannot parse mode {chunk!r}", line) from None
        modes.append((m, n, amp))
    if not modes:
        raise ParseError("empty mode list", line)
    return tuple(modes)


def parse_config(text):
    """Parse and fully validate; raises ParseError or ValidationError."""
    sections = {}
    current = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ParseError("unterminated section header", lineno,
                                 len(line))
            name = stripped[1:-1].strip()
            if name not in _SCHEMA:
                raise ParseError(f"unknown section [{name}]", lineno)
            current = name
            sections.setdefault(name, {})
            continue
        if current is None:
            raise ParseError("entry before any [section]", lineno)
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key in sections[current]:
            raise ParseError(f"duplicate key {key!r} in [{current}]", lineno)
        sections[current][key] = (raw, lineno)

    errors = []
    cfg = RunConfig(command="", system="")

    run = sections.get("run", {})
    if "command" not in run:
        errors.append("[run] command is required")
    system_sec = sections.get("system", {})
    if "name" not in system_sec:
        errors.append("[system] name is required")

    system_name = system_sec.get("name", ("", 0))[0]
    param_names = _SYSTEM_PARAMS.get(system_name, ())

    for section, entries in sections.items():
        schema = _SCHEMA[section]
        for key, (raw, lineno) in entries.items():
            if section == "system" and key != "name":
                if key not in param_names:
                    errors.append(
                        f"line {lineno}: unknown key {key!r} in [system] "
                        f"for {system_name!r}")
                    continue
                if key == "modes":
                    cfg.modes = _parse_modes(raw, lineno)
                else:
                    cfg.params[key] = _parse_value("float", raw, lineno)
                continue
            if key not in schema:
                errors.append(f"line {lineno}: unknown key {key!r} in [{section}]")
                continue
            tag, attr = schema[key]
            setattr(cfg, attr, _parse_value(tag, raw, lineno))

    errors.extend(_validate(cfg))
    if errors:
        raise ValidationError(errors)
    return cfg


def _validate(cfg):
    errors = []
    if cfg.command and cfg.command not in COMMANDS:
        errors.append(f"command must be one of {COMMANDS}, got {cfg.command!r}")
    if cfg.system and cfg.system not in systems.SYSTEM_NAMES:
        errors.append(f"system must be one of {systems.SYSTEM_NAMES}, "
                      f"got {cfg.system!r}")
    if cfg.T <= 0.0:
        errors.append("T must be positive")
    if cfg.abs_tol <= 0.0 or cfg.rel_tol <= 0.0:
        errors.append("tolerances must be positive")
    if cfg.initial_step <= 0.0 or cfg.max_step <= 0.0:
        errors.append("initial_step and max_step must be positive")
    if cfg.threshold <= 0.0:
        errors.append("threshold must be positive")
    if cfg.weight not in KINDS:
        errors.append(f"weight must be one of {KINDS}, got {cfg.weight!r}")
    if cfg.weight == "bump" and cfg.width <= 0.0:
        errors.append("width must be positive")
    if cfg.workers is not None and cfg.workers < 1:
        errors.append("workers must be at least 1")
    if cfg.crossings < 1:
        errors.append("crossings must be at least 1")

    if cfg.system == "qp-pendulum" and "b" not in cfg.params:
        errors.append("qp-pendulum requires parameter b")
    if cfg.system == "farey" and "epsilon" not in cfg.params \
            and cfg.command not in ("eps-critical", "fraction"):
        errors.append("farey requires parameter epsilon")

    needs_grid = cfg.command in ("scan", "rotation", "fraction")
    if needs_grid:
        missing = [k for k in ("axis", "lo", "hi", "count")
                   if getattr(cfg, k) is None]
        if missing:
            errors.append(f"{cfg.command} requires [grid] keys: "
                          f"{', '.join(missing)}")
        else:
            if not cfg.lo < cfg.hi:
                errors.append("grid must have lo < hi")
            if cfg.count < 2:
                errors.append("grid count must be at least 2")
    if cfg.command in ("wba", "dig", "widths", "poincare") and cfg.x0 is None:
        errors.append(f"{cfg.command} requires x0")
    if cfg.command == "widths" and not cfg.widths:
        errors.append("widths command requires a widths list")
    if cfg.command == "widths" and cfg.widths \
            and any(w <= 0.0 for w in cfg.widths):
        errors.append("all widths must be positive")
    if cfg.command == "eps-critical":
        if cfg.system != "farey":
            errors.append("eps-critical only applies to the farey system")
        if not cfg.eps_lo < cfg.eps_hi:
            errors.append("eps-critical requires eps_lo < eps_hi")
        if cfg.eps_step <= 0.0:
            errors.append("eps_step must be positive")
        if cfg.t_max <= 0.0:
            errors.append("t_max must be positive")
    if cfg.command == "fraction" and cfg.system != "farey":
        errors.append("fraction only applies to the farey system")

    if cfg.x0 is not None and cfg.system in systems.SYSTEM_NAMES:
        dim = {"two-wave": 3, "qp-pendulum": 4, "farey": 3}[cfg.system]
        if len(cfg.x0) not in (dim, dim - 1):
            errors.append(f"x0 for {cfg.system} needs {dim} (or {dim - 1}) "
                          f"coordinates, got {len(cfg.x0)}")
    return errors


def render_config(cfg):
    """Config text that parses back to an equal RunConfig."""
    lines = ["[run]", f"command = {cfg.command}"]
    if cfg.out is not None:
        lines.append(f"out = {cfg.out}")
    if cfg.workers is not None:
        lines.append(f"workers = {cfg.workers}")
    lines.append(f"seed = {cfg.seed}")
    lines.append(f"timing = {'true' if cfg.timing else 'false'}")

    lines += ["", "[system]", f"name = {cfg.system}"]
    for key, value in cfg.params.items():
        lines.append(f"{key} = {_fmt_float(value)}")
    if cfg.modes is not None:
        rendered = " ; ".join(f"{m} {n} {amp}" for m, n, amp in cfg.modes)
        lines.append(f"modes = {rendered}")

    grid_keys = ("axis", "lo", "hi", "count", "inner_axis", "inner_lo",
                 "inner_hi", "inner_count")
    grid_lines = []
    for key in grid_keys:
        value = getattr(cfg, key)
        if value is None:
            continue
        if isinstance(value, float):
            value = _fmt_float(value)
        grid_lines.append(f"{key} = {value}")
    if grid_lines:
        lines += ["", "[grid]"] + grid_lines

    lines += ["", "[numeric]"]
    lines.append(f"T = {_fmt_float(cfg.T)}")
    lines.append(f"abs_tol = {_fmt_float(cfg.abs_tol)}")
    lines.append(f"rel_tol = {_fmt_float(cfg.rel_tol)}")
    lines.append(f"initial_step = {_fmt_float(cfg.initial_step)}")
    if cfg.max_step != math.inf:
        lines.append(f"max_step = {_fmt_float(cfg.max_step)}")
    lines.append(f"threshold = {_fmt_float(cfg.threshold)}")
    lines.append(f"weight = {cfg.weight}")
    lines.append(f"width = {_fmt_float(cfg.width)}")
    if cfg.observable is not None:
        lines.append(f"observable = {cfg.observable}")
    if cfg.x0 is not None:
        lines.append("x0 = " + " ".join(_fmt_float(v) for v in cfg.x0))
    if cfg.widths is not None:
        lines.append("widths = " + " ".join(_fmt_float(v) for v in cfg.widths))
    defaults = RunConfig(command="", system="")
    if cfg.crossings != defaults.crossings:
        lines.append(f"crossings = {cfg.crossings}")
    for key in ("eps_lo", "eps_hi", "eps_step", "t_max", "psi_target"):
        value = getattr(cfg, key)
        if value != getattr(defaults, key):
            lines.append(f"{key} = {_fmt_float(value)}")
    return "\n".join(lines) + "\n"


def _fmt_float(x):
    if isinstance(x, int):
        return str(x)
    return repr(float(x))
