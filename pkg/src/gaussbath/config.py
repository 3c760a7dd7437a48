"""Run configuration files.

A run is described by one TOML document::

    [run]
    name = "fig1"

    [model]
    kind = "cavity"          # or "chain"
    n_modes = 30
    length = 1
    omega = "3*pi"           # numbers may be given as simple expressions
    coupling = 0.05
    T_S = 1
    T_E = 3

    [switching]
    duration = 150
    ramp_fraction = 0.1      # or: ramp = 15

    [observables]
    columns = ["T_eff", "MI(S:E)", "MI(S:3)"]

    [assumptions]            # anything the figure does not state
    detector_position = 0.5
    dt = 5e-5
    samples = 2000           # sample intervals; rows = samples + 1
    thermality_rtol = 1e-3

Chain models take ``n_modes``, ``omega``, ``alpha``, ``coupling``, ``T_S``,
``T_E`` and optionally ``contacts`` (1-based sites). ``dt`` and ``samples``
may sit in a ``[grid]`` section instead of ``[assumptions]``; a value in
``[grid]`` wins.

Column labels
-------------
``T_eff``, ``S_S``, ``S_E``, ``S_SE``, ``zeta``, ``D`` and ``E_E`` name the
thermodynamic observables; ``MI(A:B)`` is a mutual information between two
disjoint groups of modes. Each side is a ``+``-joined list of tokens: ``S``
(detector), ``E`` (whole bath), ``E-j`` (bath without mode ``j``) or a bath
mode number ``j`` (1-based).
"""

from __future__ import annotations

import ast
import dataclasses
import math
import operator
import re
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .models import CavityModelSpec, ChainModelSpec, ModelSpec, SwitchingProfile
from .thermo import THERMALITY_RTOL

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PRESETS = ("fig1", "fig2", "fig3", "fig4", "fig5")

BUILTIN_COLUMNS = {
    "T_eff": "temperature, same units as omega (k_B = 1)",
    "S_S": "nats",
    "S_E": "nats",
    "S_SE": "nats",
    "zeta": "nats",
    "D": "nats",
    "E_E": "energy (natural units)",
}

_SECTIONS = {
    "run": {"name", "description"},
    "model": {"kind", "n_modes", "length", "omega", "coupling", "T_S", "T_E", "position", "alpha", "contacts"},
    "switching": {"duration", "ramp", "ramp_fraction"},
    "grid": {"dt", "samples"},
    "observables": {"columns"},
    "assumptions": {"detector_position", "dt", "samples", "thermality_rtol", "contacts"},
    "oracle": {"n_max", "dt"},
}

_MODEL_KEYS = {
    "cavity": ({"n_modes", "length", "omega", "coupling", "T_S", "T_E"}, {"position"}),
    "chain": ({"n_modes", "omega", "alpha", "coupling", "T_S", "T_E"}, {"contacts"}),
}

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt}


def evaluate(value, key: str = "value") -> float:
    """Turn a TOML number or an arithmetic string such as ``"3*pi"`` into a float."""
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a number, got {type(value).__name__}")
    try:
        tree = ast.parse(value, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"{key}: cannot parse {value!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ConfigError(f"{key}: unsupported expression {value!r}")

    try:
        result = ev(tree)
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from exc
    if not math.isfinite(result):
        raise ConfigError(f"{key}: {value!r} is not finite")
    return result


def _integer(value, key: str) -> int:
    x = evaluate(value, key)
    if x != int(x):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return int(x)


@dataclass(frozen=True)
class Column:
    """One output column: a builtin observable or ``MI`` between two mode groups.

    Mode indices are 0-based (detector = 0, bath mode ``j`` = ``j``).
    """

    label: str
    modes_a: tuple[int, ...] = ()
    modes_b: tuple[int, ...] = ()

    @property
    def is_pair(self) -> bool:
        return bool(self.modes_a)


_MI_RE = re.compile(r"^MI\(([^:()]+):([^:()]+)\)$")


def _parse_side(text: str, n_bath: int, label: str) -> tuple[int, ...]:
    modes: list[int] = []
    for token in text.replace(" ", "").split("+"):
        if token == "S":
            modes.append(0)
        elif token == "E":
            modes.extend(range(1, n_bath + 1))
        elif re.fullmatch(r"E(-\d+)+", token):
            drop = {int(x) for x in token[2:].split("-")}
            if any(not 1 <= j <= n_bath for j in drop):
                raise ConfigError(f"column {label!r}: bath mode out of range 1..{n_bath}")
            modes.extend(j for j in range(1, n_bath + 1) if j not in drop)
        elif token.isdigit():
            j = int(token)
            if not 1 <= j <= n_bath:
                raise ConfigError(f"column {label!r}: bath mode {j} out of range 1..{n_bath}")
            modes.append(j)
        else:
            raise ConfigError(f"column {label!r}: unknown mode token {token!r}")
    if not modes or len(set(modes)) != len(modes):
        raise ConfigError(f"column {label!r}: empty or repeated modes")
    return tuple(modes)


def parse_column(label: str, n_bath: int) -> Column:
    if label in BUILTIN_COLUMNS:
        return Column(label)
    m = _MI_RE.match(label)
    if not m:
        raise ConfigError(
            f"unknown column {label!r}; expected one of {sorted(BUILTIN_COLUMNS)} or MI(A:B)"
        )
    a = _parse_side(m.group(1), n_bath, label)
    b = _parse_side(m.group(2), n_bath, label)
    if set(a) & set(b):
        raise ConfigError(f"column {label!r}: the two sides overlap")
    return Column(label, a, b)


@dataclass(frozen=True)
class RunConfig:
    name: str
    model: ModelSpec
    columns: tuple[Column, ...]
    dt: float
    samples: int
    thermality_rtol: float = THERMALITY_RTOL
    assumptions: dict = field(default_factory=dict, compare=False)
    document: dict = field(default_factory=dict, compare=False)
    overrides: dict = field(default_factory=dict, compare=False)

    @property
    def duration(self) -> float:
        return self.model.switching.duration

    def with_overrides(self, dt: float | None = None, samples: int | None = None) -> "RunConfig":
        """Copy with a different step size or sample count (recorded in the metadata)."""
        changes, notes = {}, dict(self.overrides)
        if dt is not None:
            changes["dt"] = notes["dt"] = float(dt)
        if samples is not None:
            changes["samples"] = notes["samples"] = int(samples)
        new = dataclasses.replace(self, overrides=notes, **changes)
        _check_grid(new.duration, new.dt, new.samples)
        return new


def _check_grid(duration: float, dt: float, samples: int) -> None:
    if not dt > 0:
        raise ConfigError("dt must be positive")
    if samples < 1:
        raise ConfigError("samples must be at least 1")
    steps = duration / dt
    if abs(steps - round(steps)) > 1e-6:
        raise ConfigError(f"duration {duration} is not a multiple of dt={dt}")
    if round(steps) % samples:
        raise ConfigError(f"{round(steps)} steps cannot be split into {samples} equal sample intervals")


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = set(sec) - _SECTIONS[name]
    if unknown:
        raise ConfigError(f"[{name}] has unknown keys: {sorted(unknown)}")
    return sec


def parse_config(doc: dict, default_name: str = "run") -> RunConfig:
    """Validate a parsed TOML document and build the run description."""
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    run = _section(doc, "run")
    model = _section(doc, "model")
    switching = _section(doc, "switching")
    grid = _section(doc, "grid")
    observables = _section(doc, "observables")
    assumptions = _section(doc, "assumptions")

    kind = model.get("kind")
    if kind not in _MODEL_KEYS:
        raise ConfigError(f"[model] kind must be 'cavity' or 'chain', got {kind!r}")
    required, optional = _MODEL_KEYS[kind]
    missing = required - set(model)
    if missing:
        raise ConfigError(f"[model] missing keys for {kind}: {sorted(missing)}")
    extra = set(model) - required - optional - {"kind"}
    if extra:
        raise ConfigError(f"[model] keys not valid for {kind}: {sorted(extra)}")

    if "duration" not in switching:
        raise ConfigError("[switching] needs 'duration'")
    duration = evaluate(switching["duration"], "switching.duration")
    if ("ramp" in switching) == ("ramp_fraction" in switching):
        raise ConfigError("[switching] needs exactly one of 'ramp' or 'ramp_fraction'")
    if "ramp" in switching:
        ramp = evaluate(switching["ramp"], "switching.ramp")
    else:
        ramp = evaluate(switching["ramp_fraction"], "switching.ramp_fraction") * duration
    profile = SwitchingProfile(ramp, duration)

    params = {k: evaluate(model[k], f"model.{k}") for k in required}
    params["n_modes"] = _integer(model["n_modes"], "model.n_modes")
    if kind == "cavity":
        position = model.get("position", assumptions.get("detector_position"))
        spec = CavityModelSpec(
            switching=profile,
            position=None if position is None else evaluate(position, "detector_position"),
            **params,
        )
    else:
        contacts = model.get("contacts", assumptions.get("contacts", [1]))
        if not isinstance(contacts, list):
            contacts = [contacts]
        spec = ChainModelSpec(
            switching=profile,
            contacts=tuple(_integer(c, "contacts") for c in contacts),
            **params,
        )

    def pick(key):
        if key in grid:
            return grid[key]
        if key in assumptions:
            return assumptions[key]
        raise ConfigError(f"'{key}' must be set under [grid] or [assumptions]")

    dt = evaluate(pick("dt"), "dt")
    samples = _integer(pick("samples"), "samples")
    _check_grid(duration, dt, samples)

    rtol = evaluate(assumptions.get("thermality_rtol", THERMALITY_RTOL), "thermality_rtol")
    if not rtol > 0:
        raise ConfigError("thermality_rtol must be positive")

    labels = observables.get("columns")
    if not isinstance(labels, list) or not labels or not all(isinstance(c, str) for c in labels):
        raise ConfigError("[observables] columns must be a non-empty list of strings")
    if len(set(labels)) != len(labels):
        raise ConfigError("[observables] columns contain duplicates")
    columns = tuple(parse_column(c, spec.n_modes) for c in labels)

    flags = dict(assumptions)
    if kind == "cavity":
        flags["detector_position"] = spec.position
    return RunConfig(
        name=str(run.get("name", default_name)),
        model=spec,
        columns=columns,
        dt=dt,
        samples=samples,
        thermality_rtol=rtol,
        assumptions=flags,
        document=doc,
    )


def read_document(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_config(path) -> RunConfig:
    return parse_config(read_document(path), Path(path).stem)


def preset_path(name: str):
    resource = resources.files("gaussbath") / "presets" / f"{name}.toml"
    if not resource.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(available_presets())}")
    return resource


def available_presets() -> list[str]:
    folder = resources.files("gaussbath") / "presets"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".toml"))


def preset_document(name: str) -> dict:
    return tomllib.loads(preset_path(name).read_text(encoding="utf-8"))


def load_preset(name: str) -> RunConfig:
    return parse_config(preset_document(name), name)
