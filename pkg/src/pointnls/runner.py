"""Execute run and sweep configurations and write their artifacts.

Every numeric CSV cell is written as the shortest round-trip repr and metadata
carries no timestamps, so identical configurations give identical files.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from importlib import metadata as importlib_metadata
from pathlib import Path

import numpy as np
import scipy

from pointnls.config import RunConfig, SweepConfig
from pointnls.field import reconstruct
from pointnls.observables import observe
from pointnls.scattering import (
    ClassificationResult,
    classify,
    decay_exponent,
    lq_tail,
    scattering_diagnostics,
)
from pointnls.snapshot import FieldSnapshot, symmetric_grid
from pointnls.solver import ChargeTrajectory, Status, solve_charge

OUT_ENV = "POINTNLS_OUT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STALL = 3
EXIT_IO = 4


def fmt(value: float) -> str:
    return repr(float(value))


def default_out_root() -> Path:
    return Path(os.environ.get(OUT_ENV, "pointnls-out"))


def resolve_out(out_dir: str, name: str) -> Path:
    path = Path(out_dir) if out_dir else default_out_root() / name
    return path


def versions() -> dict[str, str]:
    try:
        pkg = importlib_metadata.version("artifact")
    except importlib_metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"package": pkg, "numpy": np.__version__, "scipy": scipy.__version__}


def write_csv(path: Path, header: list[str], rows: list[list[float | str]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, int, np.floating)) else v for v in row])


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n", encoding="utf-8")


def write_snapshot(path: Path, snap: FieldSnapshot) -> None:
    v = np.asarray(snap.values)
    write_csv(path, ["x", "re", "im"], [[x, a, b] for x, a, b in zip(snap.x, v.real, v.imag)])


def trajectory_rows(traj: ChargeTrajectory) -> list[list[float]]:
    q = traj.q
    return [[t, a, b, m] for t, a, b, m in zip(traj.t, q.real, q.imag, np.abs(q))]


def classification_dict(c: ClassificationResult | None) -> dict | None:
    if c is None:
        return None
    d = asdict(c)
    d["verdict"] = c.verdict.value
    return d


def status_dict(traj: ChargeTrajectory) -> dict:
    d: dict = {"status": traj.status.value, "reason": traj.reason, "last_time": float(traj.t[-1])}
    if traj.t_detect is not None:
        d["t_detect"] = traj.t_detect
        d["blowup_interval"] = list(traj.blowup_interval)
    if traj.stall_step is not None:
        d["stall_step"] = traj.stall_step
    return d


def _classify_or_none(datum, p: float) -> ClassificationResult | None:
    return classify(datum, p) if p > 3 else None


def observable_times(cfg: RunConfig, last: float) -> list[float]:
    dt = cfg.solver.dt
    times = set()
    if cfg.observable_every > 0:
        stride = int(round(cfg.observable_every / dt))
        n_last = int(round(last / dt))
        times.update(k * dt for k in range(0, n_last + 1, stride))
    times.update(t for t in cfg.snapshot_times if t <= last + 1e-9 * dt)
    return sorted(times)


@dataclass(frozen=True)
class RunOutcome:
    exit_code: int
    status: Status
    out_dir: Path
    metadata: dict


def execute_run(cfg: RunConfig, name: str = "run") -> RunOutcome:
    """Solve, reconstruct requested snapshots and write all artifacts."""
    datum = cfg.build_datum()
    p = cfg.solver.p
    classification = _classify_or_none(datum, p)
    traj = solve_charge(datum, cfg.solver)
    out = resolve_out(cfg.out_dir, name)
    out.mkdir(parents=True, exist_ok=True)

    x = symmetric_grid(cfg.half_width, cfg.dx)
    last = float(traj.t[-1])
    obs_rows = []
    for t in observable_times(cfg, last):
        snap = reconstruct(traj, datum, t, x)
        q = traj.at(t)
        rec = observe(snap, p, q)
        obs_rows.append([rec.t, q.real, q.imag, abs(q), rec.mass, rec.energy, rec.eta, rec.gap])
        if any(math.isclose(t, s, abs_tol=1e-9 * cfg.solver.dt) for s in cfg.snapshot_times):
            write_snapshot(out / f"snapshot_t{fmt(t)}.csv", snap)

    write_csv(out / "trajectory.csv", ["t", "re_q", "im_q", "abs_q"], trajectory_rows(traj))
    write_csv(out / "observables.csv", ["t", "re_q", "im_q", "abs_q", "mass", "energy", "eta", "gap"], obs_rows)

    diagnostics = None
    if cfg.scattering and traj.completed:
        diag = scattering_diagnostics(traj, datum, x, cfg.residual_times, fit=False)
        try:
            alpha = decay_exponent(traj.t, traj.q)
        except ValueError:
            alpha = None
        write_snapshot(out / "psi_plus.csv", diag.psi_plus)
        diagnostics = {
            "T_max": diag.T_max,
            "lq_total": diag.lq_total,
            "decay_exponent": alpha,
            "h1_residual": {fmt(t): r for t, r in zip(diag.residual_times, diag.h1_residual)},
        }

    agreement = classification.agrees_with(traj.status) if classification else None
    meta = {
        "config": cfg.source,
        "versions": versions(),
        "run": status_dict(traj),
        "classification": classification_dict(classification),
        "agreement": agreement,
        "diagnostics": diagnostics,
        "max_corrector_iterations": traj.max_iterations,
    }
    write_json(out / "metadata.json", meta)
    code = EXIT_STALL if traj.status is Status.STALLED else EXIT_OK
    return RunOutcome(code, traj.status, out, meta)


# {{{ sweeps

ROW_FIELDS = [
    "mass",
    "energy",
    "me_product",
    "eta0",
    "verdict",
    "outcome",
    "t_detect",
    "agrees",
    "lq_total",
    "lq_tail_ratio_08",
]


def point_key(point: dict[str, float]) -> str:
    return ",".join(f"{k}={fmt(v)}" for k, v in point.items())


def _sweep_row(cfg: RunConfig) -> dict:
    datum = cfg.build_datum()
    p = cfg.solver.p
    c = _classify_or_none(datum, p)
    traj = solve_charge(datum, cfg.solver)
    r = 2.0 * (p - 1)
    tail = lq_tail(traj.q, traj.grid.dt, r)
    k08 = min(int(round(0.8 * (len(traj.q) - 1))), len(traj.q) - 1)
    ratio = float(tail[k08] / tail[0]) if tail[0] > 0 else 0.0
    return {
        "mass": c.mass if c else math.nan,
        "energy": c.energy if c else math.nan,
        "me_product": c.me_product if c else math.nan,
        "eta0": c.eta0 if c else math.nan,
        "verdict": c.verdict.value if c else "",
        "outcome": traj.status.value,
        "t_detect": traj.t_detect if traj.t_detect is not None else math.nan,
        "agrees": "" if c is None or c.agrees_with(traj.status) is None else str(c.agrees_with(traj.status)),
        "lq_total": float(tail[0]),
        "lq_tail_ratio_08": ratio,
        "_trajectory": trajectory_rows(traj),
    }


def _run_row(args: tuple[dict, SweepConfig, str]) -> tuple[str, dict | str]:
    point, sweep, row_dir = args
    key = point_key(point)
    try:
        cfg = sweep.run_config(point, row_dir)
        row = _sweep_row(cfg)
        path = Path(row_dir)
        path.mkdir(parents=True, exist_ok=True)
        write_csv(path / "trajectory.csv", ["t", "re_q", "im_q", "abs_q"], row.pop("_trajectory"))
        write_json(path / "row.json", {"point": point, "config": cfg.source, "row": row})
        return key, row
    except Exception as exc:  # recorded per row; the sweep continues
        return key, f"{type(exc).__name__}: {exc}"


def _load_row(row_dir: Path, point: dict, expected_cfg: dict) -> dict | None:
    path = row_dir / "row.json"
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return None
    if payload.get("point") != point or payload.get("config") != expected_cfg:
        return None
    if not (row_dir / "trajectory.csv").exists():
        return None
    row = payload.get("row")
    if not isinstance(row, dict) or set(row) != set(ROW_FIELDS):
        return None
    return row


@dataclass(frozen=True)
class SweepOutcome:
    out_dir: Path
    rows: list[tuple[dict, dict | str]]
    decided: int
    agreed: int

    @property
    def agreement(self) -> float:
        return self.agreed / self.decided if self.decided else math.nan


def execute_sweep(sweep: SweepConfig, name: str = "sweep", threads: int | None = None) -> SweepOutcome:
    """Run every grid point (skipping valid finished rows when resuming) and write the table."""
    out = resolve_out(sweep.out_dir, name)
    (out / "rows").mkdir(parents=True, exist_ok=True)
    points = sweep.points()
    results: dict[str, dict | str] = {}
    todo = []
    for pt in points:
        row_dir = out / "rows" / point_key(pt)
        if sweep.resume:
            expected = sweep.run_config(pt, str(row_dir)).source
            row = _load_row(row_dir, pt, expected)
            if row is not None:
                results[point_key(pt)] = row
                continue
        todo.append((pt, sweep, str(row_dir)))

    workers = threads or sweep.threads
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for key, row in pool.map(_run_row, todo):
                results[key] = row
    else:
        for job in todo:
            key, row = _run_row(job)
            results[key] = row

    axis_keys = [a.key for a in sweep.axes]
    ordered = [(pt, results[point_key(pt)]) for pt in points]
    with_errors = any(isinstance(r, str) for _, r in ordered)
    header = axis_keys + ROW_FIELDS + (["error"] if with_errors else [])
    table = []
    decided = agreed = 0
    for pt, row in ordered:
        coords = [pt[k] for k in axis_keys]
        if isinstance(row, str):
            table.append(coords + [""] * len(ROW_FIELDS) + [row])
            continue
        table.append(coords + [row[f] for f in ROW_FIELDS] + ([""] if with_errors else []))
        if row["agrees"]:
            decided += 1
            agreed += row["agrees"] == "True"
    write_csv(out / "sweep.csv", header, table)
    write_json(
        out / "sweep.json",
        {"versions": versions(), "points": len(points), "decided": decided, "agreed": agreed},
    )
    return SweepOutcome(out, ordered, decided, agreed)


# }}}
