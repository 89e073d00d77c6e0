"""Simulation configuration: an INI-style text format parsed with
:mod:`configparser` in strict mode.

Example::

    [grid]
    n = 64
    length = 6.283185307179586

    [coefficients]
    mu1 = 0
    mu2 = -2
    mu3 = 1
    mu4 = 4
    mu5 = 1
    mu6 = 0

Every other section is optional.  Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Callable

from .kernels import GINZBURG_LANDAU, MODES, PROJECTION
from .params import LeslieCoefficients, validate

PRESETS = ("random", "taylor_green", "geodesic", "bubble", "file")
TWO_PI = 2 * math.pi


class ConfigError(ValueError):
    """Bad configuration; ``line`` and ``field`` locate it when known."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(field)
        super().__init__(f"{': '.join(where)}: {message}" if where else message)
        self.line = line
        self.field = field


# ----------------------------------------------------------------- value types

def _to_float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"{s!r} is not finite")
    return v


def _to_int(s: str) -> int:
    return int(s)


def _to_bool(s: str) -> bool:
    if s == "true":
        return True
    if s == "false":
        return False
    raise ValueError(f"expected true or false, got {s!r}")


def _to_str(s: str) -> str:
    if not s:
        raise ValueError("empty value")
    return s


def _tuple_of(conv, length=None):
    def parse(s: str):
        items = tuple(conv(p.strip()) for p in s.split(",") if p.strip())
        if length is not None and len(items) != length:
            raise ValueError(f"expected {length} comma-separated values, got {len(items)}")
        return items
    return parse


def _groups_of(length):
    """``a,b,c,d; e,f,g,h`` -> ((a,b,c,d), (e,f,g,h)); empty text -> ()."""
    inner = _tuple_of(_to_float, length)

    def parse(s: str):
        return tuple(inner(g) for g in s.split(";") if g.strip())
    return parse


def _optional(conv):
    def parse(s: str):
        return None if s in ("", "none") else conv(s)
    return parse


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return "; ".join(_fmt(g) for g in v)
        return ", ".join(_fmt(x) for x in v)
    return str(v)


# ------------------------------------------------------------------- sections

@dataclass(frozen=True)
class GridSection:
    n: int = 64
    length: float = TWO_PI


@dataclass(frozen=True)
class TimeSection:
    dt: float = 1e-3
    steps: int = 1000
    cfl_guard: float = 0.5
    snapshot_every: int = 100
    ledger_every: int = 1


@dataclass(frozen=True)
class ModeSection:
    kind: str = PROJECTION
    epsilon: float = 0.1
    dealias: bool = True


@dataclass(frozen=True)
class InitialSection:
    preset: str = "random"
    seed: int = 0
    spectrum_slope: float = 4.0
    amplitude: float = 1.0
    director_amplitude: float = 0.5
    director: tuple[float, ...] = (0.0, 0.0, 1.0)
    k: tuple[int, ...] = (1, 0)
    scale: float | None = None
    degree: int = 1
    center: tuple[float, ...] | None = None
    path: str | None = None


@dataclass(frozen=True)
class DiagnosticsSection:
    concentration_radii: tuple[float, ...] = ()
    threshold: float = 8 * math.pi
    flag_tol: float = 0.01
    # (x, y, t0, r) per probe
    phi_probes: tuple[tuple[float, ...], ...] = ()
    # (cx, cy, inner_r, outer_r) per window
    local_windows: tuple[tuple[float, ...], ...] = ()
    c_audit: float = 10.0


@dataclass(frozen=True)
class OutputSection:
    dir: str = "out"


@dataclass(frozen=True)
class SimConfig:
    coefficients: LeslieCoefficients
    grid: GridSection = field(default_factory=GridSection)
    time: TimeSection = field(default_factory=TimeSection)
    mode: ModeSection = field(default_factory=ModeSection)
    initial: InitialSection = field(default_factory=InitialSection)
    diagnostics: DiagnosticsSection = field(default_factory=DiagnosticsSection)
    output: OutputSection = field(default_factory=OutputSection)

    def solver_config(self):
        from .solver import SolverConfig
        return SolverConfig(dt=self.time.dt, steps=self.time.steps, mode=self.mode.kind,
                            epsilon=self.mode.epsilon, dealias=self.mode.dealias,
                            cfl_guard=self.time.cfl_guard)

    def make_grid(self):
        from .fields import TorusGrid
        return TorusGrid(self.grid.n, self.grid.length)


_CONVERTERS: dict[str, dict[str, Callable[[str], Any]]] = {
    "grid": {"n": _to_int, "length": _to_float},
    "coefficients": {f"mu{i}": _to_float for i in range(1, 7)},
    "time": {"dt": _to_float, "steps": _to_int, "cfl_guard": _to_float,
             "snapshot_every": _to_int, "ledger_every": _to_int},
    "mode": {"kind": _to_str, "epsilon": _to_float, "dealias": _to_bool},
    "initial": {"preset": _to_str, "seed": _to_int, "spectrum_slope": _to_float,
                "amplitude": _to_float, "director_amplitude": _to_float,
                "director": _tuple_of(_to_float, 3), "k": _tuple_of(_to_int, 2),
                "scale": _optional(_to_float), "degree": _to_int,
                "center": _optional(_tuple_of(_to_float, 2)), "path": _optional(_to_str)},
    "diagnostics": {"concentration_radii": _tuple_of(_to_float), "threshold": _to_float,
                    "flag_tol": _to_float, "phi_probes": _groups_of(4),
                    "local_windows": _groups_of(4), "c_audit": _to_float},
    "output": {"dir": _to_str},
}

_SECTION_TYPES = {"grid": GridSection, "time": TimeSection, "mode": ModeSection,
                  "initial": InitialSection, "diagnostics": DiagnosticsSection,
                  "output": OutputSection}


def _line_index(text: str) -> dict[tuple[str, str], int]:
    """Map (section, key) to its 1-based line so validation errors can point at it."""
    index, section = {}, None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            index[(section, "")] = no
        elif section is not None and "=" in line:
            index[(section, line.split("=", 1)[0].strip().lower())] = no
    return index


def _read(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(strict=True, interpolation=None,
                                   delimiters=("=",), comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",),
                                   empty_lines_in_values=False, default_section="\0")
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"duplicate key {e.option!r} in [{e.section}]", e.lineno, e.option) from e
    except configparser.DuplicateSectionError as e:
        raise ConfigError(f"duplicate section [{e.section}]", e.lineno) from e
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("key outside any [section]", e.lineno) from e
    except configparser.ParsingError as e:
        lineno, line = e.errors[0]
        raise ConfigError(f"cannot parse {line.strip()!r}", lineno) from e
    return cp


def _check(cond: bool, message: str, where: str, lines, key):
    if not cond:
        raise ConfigError(message, lines.get(key), where)


def parse_config(text: str, allow_invalid: bool = False) -> SimConfig:
    """Parse and validate; unset keys take their defaults.

    With ``allow_invalid`` an inadmissible coefficient set only triggers a
    warning; otherwise it is a :class:`ConfigError`.
    """
    cp = _read(text)
    lines = _line_index(text)

    values: dict[str, dict[str, Any]] = {}
    for section in cp.sections():
        if section not in _CONVERTERS:
            raise ConfigError(f"unknown section [{section}]", lines.get((section, "")))
        conv = _CONVERTERS[section]
        out = {}
        for key, raw in cp.items(section):
            where = f"{section}.{key}"
            if key not in conv:
                raise ConfigError("unknown key", lines.get((section, key)), where)
            try:
                out[key] = conv[key](raw.strip())
            except ValueError as e:
                raise ConfigError(str(e), lines.get((section, key)), where) from e
        values[section] = out

    coeff_vals = values.get("coefficients", {})
    missing = [k for k in _CONVERTERS["coefficients"] if k not in coeff_vals]
    if missing:
        raise ConfigError(f"missing {', '.join(missing)}", lines.get(("coefficients", "")),
                          "coefficients")
    coeffs = LeslieCoefficients(**coeff_vals)

    sections = {name: cls(**values.get(name, {})) for name, cls in _SECTION_TYPES.items()}
    cfg = SimConfig(coefficients=coeffs, **sections)
    _validate(cfg, lines, allow_invalid)
    return cfg


def _validate(cfg: SimConfig, lines, allow_invalid: bool):
    g, t, m, ini, dg = cfg.grid, cfg.time, cfg.mode, cfg.initial, cfg.diagnostics
    _check(g.n >= 8 and g.n % 2 == 0, f"n must be even and >= 8, got {g.n}",
           "grid.n", lines, ("grid", "n"))
    _check(g.length > 0, "length must be > 0", "grid.length", lines, ("grid", "length"))
    _check(t.dt > 0, "dt must be > 0", "time.dt", lines, ("time", "dt"))
    _check(t.steps >= 0, "steps must be >= 0", "time.steps", lines, ("time", "steps"))
    _check(t.cfl_guard > 0, "cfl_guard must be > 0", "time.cfl_guard", lines, ("time", "cfl_guard"))
    _check(t.snapshot_every >= 0, "snapshot_every must be >= 0 (0 = final only)",
           "time.snapshot_every", lines, ("time", "snapshot_every"))
    _check(t.ledger_every >= 1, "ledger_every must be >= 1",
           "time.ledger_every", lines, ("time", "ledger_every"))
    _check(m.kind in MODES, f"kind must be one of {', '.join(MODES)}",
           "mode.kind", lines, ("mode", "kind"))
    _check(m.epsilon > 0, "epsilon must be > 0", "mode.epsilon", lines, ("mode", "epsilon"))

    _check(ini.preset in PRESETS, f"preset must be one of {', '.join(PRESETS)}",
           "initial.preset", lines, ("initial", "preset"))
    _check(ini.degree >= 1, "degree must be >= 1", "initial.degree", lines, ("initial", "degree"))
    _check(ini.scale is None or ini.scale > 0, "scale must be > 0",
           "initial.scale", lines, ("initial", "scale"))
    _check(ini.director_amplitude >= 0, "director_amplitude must be >= 0",
           "initial.director_amplitude", lines, ("initial", "director_amplitude"))
    _check(any(ini.director), "director must be nonzero",
           "initial.director", lines, ("initial", "director"))
    _check(ini.preset != "file" or ini.path is not None, "file preset needs a path",
           "initial.path", lines, ("initial", "preset"))

    h = g.length / g.n
    _check(all(2 * h <= r < g.length / 2 for r in dg.concentration_radii),
           f"radii must lie in [2 h, L/2) = [{2 * h:g}, {g.length / 2:g})",
           "diagnostics.concentration_radii", lines, ("diagnostics", "concentration_radii"))
    _check(dg.threshold > 0, "threshold must be > 0",
           "diagnostics.threshold", lines, ("diagnostics", "threshold"))
    _check(dg.flag_tol >= 0, "flag_tol must be >= 0",
           "diagnostics.flag_tol", lines, ("diagnostics", "flag_tol"))
    _check(all(p[3] > 0 for p in dg.phi_probes), "phi probe radius must be > 0",
           "diagnostics.phi_probes", lines, ("diagnostics", "phi_probes"))
    _check(all(0 < w[2] < w[3] for w in dg.local_windows),
           "local window needs 0 < inner_r < outer_r",
           "diagnostics.local_windows", lines, ("diagnostics", "local_windows"))
    _check(dg.c_audit > 0, "c_audit must be > 0",
           "diagnostics.c_audit", lines, ("diagnostics", "c_audit"))

    report = validate(cfg.coefficients)
    if not report.valid:
        msg = "; ".join(report.messages)
        if not allow_invalid:
            key = "mu4" if not report.viscosity_positive else ""
            raise ConfigError(f"inadmissible coefficients: {msg}",
                              lines.get(("coefficients", key), lines.get(("coefficients", ""))),
                              f"coefficients.{key}" if key else "coefficients")
        import logging
        logging.getLogger(__name__).warning("inadmissible coefficients accepted: %s", msg)
    if m.kind == GINZBURG_LANDAU and cfg.coefficients.mu1 < 0:
        import logging
        logging.getLogger(__name__).warning(
            "mu1 < 0: the Ginzburg-Landau energy balance is not dissipative")


def serialize(cfg: SimConfig) -> str:
    """Text that :func:`parse_config` maps back to an equal config."""
    out = []
    sections = [("grid", cfg.grid), ("coefficients", cfg.coefficients),
                ("time", cfg.time), ("mode", cfg.mode), ("initial", cfg.initial),
                ("diagnostics", cfg.diagnostics), ("output", cfg.output)]
    for name, sec in sections:
        out.append(f"[{name}]")
        for f in fields(sec):
            out.append(f"{f.name} = {_fmt(getattr(sec, f.name))}")
        out.append("")
    return "\n".join(out)


def with_overrides(cfg: SimConfig, **sections) -> SimConfig:
    """Copy with some section fields replaced, e.g. ``time={"steps": 10}``."""
    changes = {name: replace(getattr(cfg, name), **kw) for name, kw in sections.items()}
    return replace(cfg, **changes)
