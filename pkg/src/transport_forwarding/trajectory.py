"""Time-series container, run summary, and CSV emission.

CSV schema: header ``t,z,u,V,E1,E2,z_sq,w_l2_sq``, one row per sample time,
17 significant digits so float64 values round-trip exactly.  Snapshots of w
go to sibling files ``w_t<time>.csv`` with ``x,w`` columns.
"""

from __future__ import annotations

import dataclasses
import os
from pathlib import Path

import numpy as np

__all__ = [
    "Trajectory",
    "Snapshot",
    "RunSummary",
    "summarize",
    "write_csv",
    "read_csv",
    "snapshot_filename",
]

_COLUMNS = ("t", "z", "u", "V", "E1", "E2", "z_sq", "w_l2_sq")


@dataclasses.dataclass(frozen=True)
class Snapshot:
    """A rendered w profile at a single time."""

    time: float
    x: np.ndarray
    w: np.ndarray


@dataclasses.dataclass
class Trajectory:
    """Sampled diagnostics of one run; all arrays share the same length."""

    t: np.ndarray
    z: np.ndarray
    u: np.ndarray
    v: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    z_sq: np.ndarray
    w_l2_sq: np.ndarray
    snapshots: list[Snapshot] = dataclasses.field(default_factory=list)

    def __post_init__(self):
        cols = self.columns()
        n = cols[0].size
        if any(c.shape != (n,) for c in cols):
            raise ValueError("trajectory columns must share one length")
        if n > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("trajectory times must be strictly increasing")
        if not all(np.isfinite(c).all() for c in cols):
            raise ValueError("trajectory contains non-finite values")

    def columns(self) -> tuple[np.ndarray, ...]:
        return (self.t, self.z, self.u, self.v, self.e1, self.e2, self.z_sq, self.w_l2_sq)


@dataclasses.dataclass(frozen=True)
class RunSummary:
    """Headline numbers for one run."""

    v_initial: float
    v_final: float
    dv_min: float
    dv_max: float
    t_z_small: float | None
    u_tail_sup: tuple[tuple[float, float], ...]
    compat_defect: float

    def lines(self) -> list[str]:
        out = [
            f"V(0)      = {self.v_initial:.6e}",
            f"V(end)    = {self.v_final:.6e}",
            f"dV step   in [{self.dv_min:.3e}, {self.dv_max:.3e}]",
            f"first |z| < 1e-3 at t = "
            + (f"{self.t_z_small:.6g}" if self.t_z_small is not None else "never"),
            f"initial boundary defect = {self.compat_defect:.3e}",
        ]
        for t0, sup in self.u_tail_sup:
            out.append(f"sup |u| over [{t0:g}, end] = {sup:.6e}")
        return out


def summarize(traj: Trajectory, compat_defect: float = 0.0, n_tail: int = 4) -> RunSummary:
    dv = np.diff(traj.v)
    below = np.nonzero(np.abs(traj.z) < 1e-3)[0]
    t_small = float(traj.t[below[0]]) if below.size else None
    t0, t1 = traj.t[0], traj.t[-1]
    tails = []
    for k in range(n_tail):
        lo = t0 + (t1 - t0) * k / n_tail
        mask = traj.t >= lo
        tails.append((float(lo), float(np.max(np.abs(traj.u[mask])))))
    return RunSummary(
        v_initial=float(traj.v[0]),
        v_final=float(traj.v[-1]),
        dv_min=float(dv.min()) if dv.size else 0.0,
        dv_max=float(dv.max()) if dv.size else 0.0,
        t_z_small=t_small,
        u_tail_sup=tuple(tails),
        compat_defect=compat_defect,
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def snapshot_filename(time: float) -> str:
    return f"w_t{time:g}.csv"


def resolve_output_path(path: str | os.PathLike) -> Path:
    """Resolve a run output path, honoring the TFWD_OUT_DIR override.

    Relative paths land under TFWD_OUT_DIR when it is set; absolute paths
    are used as given.
    """
    p = Path(path)
    base = os.environ.get("TFWD_OUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def write_csv(traj: Trajectory, path: str | os.PathLike) -> Path:
    """Write the trajectory (and any snapshots) next to each other."""
    p = resolve_output_path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    cols = traj.columns()
    with open(p, "w") as fh:
        fh.write(",".join(_COLUMNS) + "\n")
        for i in range(cols[0].size):
            fh.write(",".join(_fmt(c[i]) for c in cols) + "\n")
    for snap in traj.snapshots:
        sp = p.parent / snapshot_filename(snap.time)
        with open(sp, "w") as fh:
            fh.write("x,w\n")
            for x, w in zip(snap.x, snap.w):
                fh.write(f"{_fmt(x)},{_fmt(w)}\n")
    return p


def read_csv(path: str | os.PathLike) -> Trajectory:
    """Parse a trajectory CSV written by write_csv (snapshots not loaded)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != ",".join(_COLUMNS):
            raise ValueError(f"unexpected CSV header {header!r} in {path}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(_COLUMNS):
        raise ValueError(f"expected {len(_COLUMNS)} columns in {path}")
    return Trajectory(*(data[:, i].copy() for i in range(len(_COLUMNS))))
