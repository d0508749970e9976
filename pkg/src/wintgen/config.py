"""Run configuration files.

The format is TOML restricted to four sections::

    [immersion]
    name = "cylinder over z^2"          # optional
    variables = ["u", "v", "s"]
    components = ["u", "v", "u^2 - v^2", "2*u*v", "s"]

    [domain]
    min = [-1.0, -1.0, -1.0]
    max = [1.0, 1.0, 1.0]
    grid = [5, 5, 5]

    [options]                           # optional, defaults shown
    jet_order = 4
    fd_step = 1e-3
    tol_exact = 1e-8
    tol_fd_constant = 10.0
    ambient_c = 0.0

    [checks]                            # optional
    suites = ["ddvv"]

Unknown sections or keys are errors, reported with their line number.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .errors import ConfigError, MissingSection, ParseError, UnknownKey, ValidationError, WintgenError
from .immersion import ImmersionSpec

DEFAULT_OPTIONS = {
    "jet_order": 4,
    "fd_step": 1e-3,
    "tol_exact": 1e-8,
    "tol_fd_constant": 10.0,
    "ambient_c": 0.0,
}
SUITES = ("parser", "jets", "geometry", "ddvv", "moebius", "constructions", "invariance", "all")
ALLOWED = {
    "immersion": {"name", "variables", "components"},
    "domain": {"min", "max", "grid"},
    "options": set(DEFAULT_OPTIONS),
    "checks": {"suites"},
}
REQUIRED_SECTIONS = ("immersion", "domain")
MIN_JET_ORDER, MAX_JET_ORDER = 4, 6


@dataclass
class RunConfig:
    spec: ImmersionSpec
    grid: tuple
    options: dict = field(default_factory=lambda: dict(DEFAULT_OPTIONS))
    suites: tuple = ()
    name: str = ""

    @property
    def fd_step(self) -> float:
        return float(self.options["fd_step"])

    @property
    def tol_exact(self) -> float:
        return float(self.options["tol_exact"])

    @property
    def ambient_c(self) -> float:
        return float(self.options["ambient_c"])

    def grid_points(self):
        return self.spec.grid(self.grid)

    def to_dict(self) -> dict:
        imm = {}
        if self.name:
            imm["name"] = self.name
        imm["variables"] = list(self.spec.variables)
        imm["components"] = self.spec.component_texts()
        out = {
            "immersion": imm,
            "domain": {
                "min": [float(lo) for lo, _ in self.spec.domain],
                "max": [float(hi) for _, hi in self.spec.domain],
                "grid": [int(k) for k in self.grid],
            },
            "options": {k: self.options[k] for k in DEFAULT_OPTIONS},
        }
        if self.suites:
            out["checks"] = {"suites": list(self.suites)}
        return out


def _key_lines(text: str) -> dict:
    """Map (section, key) -> first line number where it is assigned."""
    lines = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[\s*([^\]]+?)\s*\]", line)
        if m:
            section = m.group(1)
            lines.setdefault((None, section), lineno)
            continue
        m = re.match(r"^([A-Za-z0-9_\-\"']+)\s*=", line)
        if m:
            lines.setdefault((section, m.group(1).strip("\"'")), lineno)
    return lines


def parse_config(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ParseError(f"invalid config syntax: {exc}", int(m.group(1)) if m else None) from None
    lines = _key_lines(text)

    for section, body in data.items():
        if section not in ALLOWED:
            raise UnknownKey(section, lines.get((None, section)))
        if not isinstance(body, dict):
            raise ValidationError(f"[{section}] must be a section", lines.get((None, section)))
        for key in body:
            if key not in ALLOWED[section]:
                raise UnknownKey(key, lines.get((section, key)))
    for section in REQUIRED_SECTIONS:
        if section not in data:
            raise MissingSection(section)
    return _build(data, lines)


def _need(body, section, key, lines):
    if key not in body:
        raise ValidationError(f"[{section}] needs '{key}'", lines.get((None, section)))
    return body[key]


def _build(data, lines) -> RunConfig:
    imm, dom = data["immersion"], data["domain"]
    variables = _need(imm, "immersion", "variables", lines)
    components = _need(imm, "immersion", "components", lines)
    if not (isinstance(variables, list) and all(isinstance(v, str) for v in variables)):
        raise ValidationError("variables must be a list of strings", lines.get(("immersion", "variables")))
    if not (isinstance(components, list) and all(isinstance(c, str) for c in components)):
        raise ValidationError("components must be a list of strings", lines.get(("immersion", "components")))
    m = len(variables)
    lo = _need(dom, "domain", "min", lines)
    hi = _need(dom, "domain", "max", lines)
    grid = _need(dom, "domain", "grid", lines)
    for key, val in (("min", lo), ("max", hi), ("grid", grid)):
        if not isinstance(val, list) or len(val) != m:
            raise ValidationError(f"domain.{key} must list one value per variable ({m})", lines.get(("domain", key)))
    if not all(isinstance(k, int) and not isinstance(k, bool) for k in grid) or min(grid) < 2:
        raise ValidationError("grid counts must be integers >= 2", lines.get(("domain", "grid")))
    for a, b in zip(lo, hi):
        if not float(a) < float(b):
            raise ValidationError(f"domain min {a} is not below max {b}", lines.get(("domain", "min")))

    options = dict(DEFAULT_OPTIONS)
    for key, val in data.get("options", {}).items():
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ValidationError(f"option {key} must be a number", lines.get(("options", key)))
        options[key] = val
    if not isinstance(options["jet_order"], int) or not MIN_JET_ORDER <= options["jet_order"] <= MAX_JET_ORDER:
        raise ValidationError(
            f"jet_order must be an integer in [{MIN_JET_ORDER}, {MAX_JET_ORDER}]", lines.get(("options", "jet_order"))
        )
    for key in ("fd_step", "tol_exact", "tol_fd_constant"):
        if not options[key] > 0:
            raise ValidationError(f"{key} must be positive", lines.get(("options", key)))
    options = {k: (int(v) if k == "jet_order" else float(v)) for k, v in options.items()}

    suites = data.get("checks", {}).get("suites", [])
    if not isinstance(suites, list) or any(s not in SUITES for s in suites):
        raise ValidationError(f"checks.suites must be drawn from {list(SUITES)}", lines.get(("checks", "suites")))

    try:
        spec = ImmersionSpec.create(variables, components, list(zip(lo, hi)), **options)
    except ConfigError as exc:
        raise ValidationError(str(exc), lines.get(("immersion", "components"))) from None
    except WintgenError as exc:
        raise ValidationError(f"{type(exc).__name__}: {exc}", lines.get(("immersion", "components"))) from None
    return RunConfig(spec, tuple(int(k) for k in grid), options, tuple(suites), str(imm.get("name", "")))


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def dumps_config(cfg: RunConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())


def config_for_spec(spec: ImmersionSpec, grid=None, name: str = "", options=None) -> RunConfig:
    opts = dict(DEFAULT_OPTIONS)
    opts.update(options or {})
    grid = tuple(grid) if grid is not None else (5,) * spec.m
    return RunConfig(spec, grid, opts, (), name)
