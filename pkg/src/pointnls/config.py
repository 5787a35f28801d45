"""TOML run and sweep configuration (``schema_version = 1``).

Run file layout::

    schema_version = 1
    [datum]   kind = "gaussian" | "ground_state" | "sampled", plus parameters
    [solver]  p, dt, T and optional corrector/ceiling settings
    [grid]    half_width, dx           (spatial grid for snapshots)
    [output]  dir, snapshot_times, observable_every, scattering, residual_times

A sweep file has a ``[base]`` table holding a run configuration (without
``schema_version``) and a ``[sweep]`` table with ``threads``, ``resume``
and one or more ``[[sweep.axes]]`` entries naming a dotted key of the base
configuration with either ``values`` or ``start``/``stop``/``step``.
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from pointnls.propagator import GaussianPacket, GroundState, InitialDatum, Sampled
from pointnls.solver import SolverConfig

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; ``where`` names the offending key or file position."""

    def __init__(self, where: str, message: str) -> None:
        super().__init__(f"{where}: {message}")
        self.where = where


def _table(raw: dict, key: str, where: str) -> dict:
    val = raw.get(key)
    if not isinstance(val, dict):
        raise ConfigError(f"{where}{key}", "missing table")
    return val


def _number(tbl: dict, key: str, where: str, default: float | None = None, positive: bool = False) -> float:
    if key not in tbl:
        if default is None:
            raise ConfigError(f"{where}.{key}", "required")
        return default
    val = tbl[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigError(f"{where}.{key}", f"expected a finite number, got {val!r}")
    if positive and not val > 0:
        raise ConfigError(f"{where}.{key}", f"must be positive, got {val!r}")
    return float(val)


def _check_keys(tbl: dict, allowed: set[str], where: str) -> None:
    extra = sorted(set(tbl) - allowed)
    if extra:
        raise ConfigError(f"{where}.{extra[0]}", "unknown key")


@dataclass(frozen=True)
class DatumSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def build(self, base_dir: Path | None = None) -> InitialDatum:
        try:
            if self.kind == "gaussian":
                return GaussianPacket(**self.params)
            if self.kind == "ground_state":
                return GroundState(**self.params)
        except ValueError as exc:
            raise ConfigError("datum", str(exc)) from exc
        path = Path(self.params["file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        except OSError as exc:
            raise ConfigError("datum.file", f"cannot read {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError("datum.file", f"malformed samples in {path}: {exc}") from exc
        if data.shape[1] != 3:
            raise ConfigError("datum.file", "expected columns x, re, im")
        try:
            return Sampled(x=data[:, 0], values=data[:, 1] + 1j * data[:, 2])
        except ValueError as exc:
            raise ConfigError("datum.file", str(exc)) from exc


_DATUM_KEYS = {
    "gaussian": {"amplitude", "width", "center", "velocity"},
    "ground_state": {"p", "factor", "scale"},
    "sampled": {"file"},
}


def _parse_datum(tbl: dict) -> DatumSpec:
    kind = tbl.get("kind")
    if kind not in _DATUM_KEYS:
        raise ConfigError("datum.kind", f"expected one of {sorted(_DATUM_KEYS)}, got {kind!r}")
    _check_keys(tbl, _DATUM_KEYS[kind] | {"kind"}, "datum")
    if kind == "sampled":
        if not isinstance(tbl.get("file"), str):
            raise ConfigError("datum.file", "expected a path string")
        return DatumSpec(kind, {"file": tbl["file"]})
    params = {k: _number(tbl, k, "datum") for k in _DATUM_KEYS[kind] if k in tbl}
    if kind == "gaussian" and params.get("width", 1.0) <= 0:
        raise ConfigError("datum.width", "must be positive")
    if kind == "ground_state" and "p" not in params:
        raise ConfigError("datum.p", "required")
    return DatumSpec(kind, params)


@dataclass(frozen=True)
class RunConfig:
    datum: DatumSpec
    solver: SolverConfig
    half_width: float
    dx: float
    out_dir: str
    snapshot_times: tuple[float, ...] = ()
    observable_every: float = 0.0
    scattering: bool = False
    residual_times: tuple[float, ...] = ()
    base_dir: str = ""
    source: dict = field(default_factory=dict, repr=False, compare=False)

    def with_overrides(self, dt: float | None = None, T: float | None = None, out: str | None = None) -> RunConfig:
        raw = copy.deepcopy(self.source)
        if dt is not None:
            raw["solver"]["dt"] = dt
        if T is not None:
            raw["solver"]["T"] = T
        if out is not None:
            raw.setdefault("output", {})["dir"] = out
        return replace(parse_run(raw), base_dir=self.base_dir)

    def build_datum(self) -> InitialDatum:
        return self.datum.build(Path(self.base_dir) if self.base_dir else None)


def _times(tbl: dict, key: str, horizon: float, dt: float) -> tuple[float, ...]:
    vals = tbl.get(key, [])
    if not isinstance(vals, list):
        raise ConfigError(f"output.{key}", "expected a list of times")
    out = []
    for i, v in enumerate(vals):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 <= v <= horizon:
            raise ConfigError(f"output.{key}[{i}]", f"time {v!r} outside [0, {horizon}]")
        k = round(v / dt)
        if not math.isclose(k * dt, v, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigError(f"output.{key}[{i}]", f"time {v!r} is not a multiple of dt")
        out.append(float(v))
    return tuple(out)


def parse_run(raw: dict) -> RunConfig:
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {raw.get('schema_version')!r}")
    _check_keys(raw, {"schema_version", "datum", "solver", "grid", "output"}, "config")
    datum = _parse_datum(_table(raw, "datum", ""))

    s = _table(raw, "solver", "")
    _check_keys(s, {"p", "dt", "T", "fp_tol", "fp_max_iters", "blowup_amp", "blowup_growth", "nonlinear"}, "solver")
    nonlinear = s.get("nonlinear", True)
    if not isinstance(nonlinear, bool):
        raise ConfigError("solver.nonlinear", "expected true or false")
    max_iters = s.get("fp_max_iters", 50)
    if isinstance(max_iters, bool) or not isinstance(max_iters, int) or max_iters < 1:
        raise ConfigError("solver.fp_max_iters", "expected a positive integer")
    try:
        solver = SolverConfig(
            p=_number(s, "p", "solver"),
            dt=_number(s, "dt", "solver", positive=True),
            T=_number(s, "T", "solver", positive=True),
            fp_tol=_number(s, "fp_tol", "solver", 1e-12, positive=True),
            fp_max_iters=max_iters,
            blowup_amp=_number(s, "blowup_amp", "solver", 1e6, positive=True),
            blowup_growth=_number(s, "blowup_growth", "solver", 10.0, positive=True),
            nonlinear=nonlinear,
        )
        solver.grid  # horizon must be a multiple of dt
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("solver", str(exc)) from exc

    g = _table(raw, "grid", "")
    _check_keys(g, {"half_width", "dx"}, "grid")
    half_width = _number(g, "half_width", "grid", positive=True)
    dx = _number(g, "dx", "grid", positive=True)
    if half_width < 3 * dx:
        raise ConfigError("grid.half_width", "need at least three nodes on each side of the origin")

    o = raw.get("output", {})
    if not isinstance(o, dict):
        raise ConfigError("output", "expected a table")
    _check_keys(o, {"dir", "snapshot_times", "observable_every", "scattering", "residual_times"}, "output")
    out_dir = o.get("dir", "")
    if not isinstance(out_dir, str):
        raise ConfigError("output.dir", "expected a path string")
    every = _number(o, "observable_every", "output", 0.0)
    if every < 0:
        raise ConfigError("output.observable_every", "must be nonnegative")
    if every > 0:
        k = round(every / solver.dt)
        if k < 1 or not math.isclose(k * solver.dt, every, rel_tol=1e-9):
            raise ConfigError("output.observable_every", "must be a positive multiple of dt")
    scattering = o.get("scattering", False)
    if not isinstance(scattering, bool):
        raise ConfigError("output.scattering", "expected true or false")

    return RunConfig(
        datum=datum,
        solver=solver,
        half_width=half_width,
        dx=dx,
        out_dir=out_dir,
        snapshot_times=_times(o, "snapshot_times", solver.T, solver.dt),
        observable_every=every,
        scattering=scattering,
        residual_times=_times(o, "residual_times", solver.T, solver.dt),
        source=copy.deepcopy(raw),
    )


@dataclass(frozen=True)
class Axis:
    key: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class SweepConfig:
    base: dict
    axes: tuple[Axis, ...]
    threads: int = 1
    resume: bool = True
    out_dir: str = ""
    base_dir: str = ""

    def points(self) -> list[dict[str, float]]:
        """Cartesian product of the axes, first axis slowest."""
        pts: list[dict[str, float]] = [{}]
        for axis in self.axes:
            pts = [{**pt, axis.key: v} for pt in pts for v in axis.values]
        return pts

    def run_config(self, point: dict[str, float], out_dir: str) -> RunConfig:
        raw = copy.deepcopy(self.base)
        raw["schema_version"] = SCHEMA_VERSION
        for key, value in point.items():
            section, name = key.split(".", 1)
            raw.setdefault(section, {})[name] = value
        raw.setdefault("output", {})["dir"] = out_dir
        return replace(parse_run(raw), base_dir=self.base_dir)


def _axis(tbl: dict, i: int) -> Axis:
    where = f"sweep.axes[{i}]"
    key = tbl.get("key")
    if not isinstance(key, str) or key.count(".") != 1:
        raise ConfigError(f"{where}.key", "expected a dotted key such as 'datum.amplitude'")
    if "values" in tbl:
        vals = tbl["values"]
        if not isinstance(vals, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals
        ):
            raise ConfigError(f"{where}.values", "expected a list of numbers")
        values = tuple(float(v) for v in vals)
    else:
        start = _number(tbl, "start", where)
        stop = _number(tbl, "stop", where)
        step = _number(tbl, "step", where, positive=True)
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = tuple(round(start + k * step, 12) for k in range(max(count, 0)))
    if not values:
        raise ConfigError(where, "axis is empty")
    return Axis(key, values)


def parse_sweep(raw: dict) -> SweepConfig:
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {raw.get('schema_version')!r}")
    _check_keys(raw, {"schema_version", "base", "sweep"}, "config")
    base = _table(raw, "base", "")
    sw = _table(raw, "sweep", "")
    _check_keys(sw, {"axes", "threads", "resume", "dir"}, "sweep")
    axes_raw = sw.get("axes")
    if not isinstance(axes_raw, list) or not axes_raw:
        raise ConfigError("sweep.axes", "at least one axis is required")
    axes = tuple(_axis(a, i) for i, a in enumerate(axes_raw))
    threads = sw.get("threads", 1)
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        raise ConfigError("sweep.threads", "expected a positive integer")
    resume = sw.get("resume", True)
    if not isinstance(resume, bool):
        raise ConfigError("sweep.resume", "expected true or false")
    out_dir = sw.get("dir", "")
    if not isinstance(out_dir, str):
        raise ConfigError("sweep.dir", "expected a path string")
    cfg = SweepConfig(base=copy.deepcopy(base), axes=axes, threads=threads, resume=resume, out_dir=out_dir)
    # validate every grid point before any run starts
    for pt in cfg.points():
        cfg.run_config(pt, "")
    return cfg


def load_toml(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read: {exc.strerror or exc}") from exc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), str(exc)) from exc


def load_run(path: str | Path) -> RunConfig:
    return replace(parse_run(load_toml(path)), base_dir=str(Path(path).resolve().parent))


def load_sweep(path: str | Path) -> SweepConfig:
    return replace(parse_sweep(load_toml(path)), base_dir=str(Path(path).resolve().parent))


def is_sweep(raw: dict) -> bool:
    return "sweep" in raw
