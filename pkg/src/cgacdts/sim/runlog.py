"""Per-iteration / per-tick run logs and their CSV form."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ..cdts import CdtsState
from ..solvers import GaussNewtonReport, MpcLog


class LogWriteError(OSError):
    """A log file could not be written."""


def ik_columns(n: int) -> list[str]:
    return (
        ["iter", "cost", "constraint_norm"]
        + [f"q_{i + 1}" for i in range(n)]
        + ["ee1_x", "ee1_y", "ee1_z", "ee2_x", "ee2_y", "ee2_z"]
    )


def mpc_columns(n: int) -> list[str]:
    return (
        ["tick", "time_s", "cost", "res_align", "res_axis", "res_dist"]
        + [f"q_{i + 1}" for i in range(n)]
        + [f"dq_{i + 1}" for i in range(n)]
        + [f"u_{i + 1}" for i in range(n)]
    )


@dataclass
class RunLog:
    """Rows of a run plus metadata; the first column is a monotone index."""

    kind: str  # "ik" or "mpc"
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def __len__(self) -> int:
        return len(self.rows)


def ik_log(report: GaussNewtonReport, system, metadata: dict) -> RunLog:
    log = RunLog("ik", ik_columns(system.dof), metadata=dict(metadata))
    for rec in report.history:
        x1, x2 = CdtsState.from_q(system, rec.q).ee_positions
        log.rows.append([rec.iteration, rec.merit, rec.constraint_norm, *rec.q, *x1, *x2])
    return log


def mpc_log(run: MpcLog, nq: int, metadata: dict) -> RunLog:
    log = RunLog("mpc", mpc_columns(nq), metadata=dict(metadata))
    for rec in run.records:
        r = rec.residuals
        log.rows.append([
            rec.tick, rec.time, rec.cost, r["align"], r["axis"], r["dist"],
            *rec.x[:nq], *rec.x[nq:], *rec.u,
        ])
    return log


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def export_csv(log: RunLog, path, timestamp: bool = True) -> Path:
    """Write ``log`` as CSV: one ``#`` metadata line, a header, then rows.

    Floats use 17 significant digits, which round-trips IEEE doubles exactly.
    Only the metadata line carries a timestamp.

    Raises:
        LogWriteError: with the path if the file cannot be written.
    """
    path = Path(path)
    meta = dict(log.metadata)
    if timestamp:
        meta["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    meta_line = "# " + " ".join(f"{k}={meta[k]}" for k in sorted(meta))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            fh.write(meta_line + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(log.columns)
            for row in log.rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise LogWriteError(f"cannot write log {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path) -> tuple[dict, list[str], np.ndarray]:
    """Parse a file written by :func:`export_csv` into (metadata, columns, values)."""
    path = Path(path)
    with path.open(newline="") as fh:
        lines = fh.read().splitlines()
    meta = {}
    if lines and lines[0].startswith("#"):
        for item in lines[0][1:].split():
            key, _, val = item.partition("=")
            meta[key] = val
        lines = lines[1:]
    reader = csv.reader(lines)
    columns = next(reader)
    values = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, len(columns))
    return meta, columns, values


def csv_body(path) -> bytes:
    """File contents without the metadata line (for determinism comparisons)."""
    data = Path(path).read_bytes()
    if data.startswith(b"#"):
        data = data.split(b"\n", 1)[1] if b"\n" in data else b""
    return data
