"""CSV tables with fixed column order."""
from __future__ import annotations

import csv
import math
import os
from typing import Iterable, Sequence, Union

from .fidelity import CrosstalkMatrix, FidelitySeries
from .tiptilt import TipTilt
from .tracking import TrackSet

PathLike = Union[str, os.PathLike]


def _fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.6f}"


def _write(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_orientations(path: PathLike, series: FidelitySeries, frame_indices: Sequence[int] | None = None) -> None:
    idx = frame_indices if frame_indices is not None else range(len(series.results))
    rows = []
    for i, r, f in zip(idx, series.results, series.fidelity):
        if r is None:
            rows.append([i, "", "", "", ""])
        else:
            rows.append([i, _fmt(math.degrees(r.angle)), _fmt(math.degrees(r.theta)), _fmt(r.quality), _fmt(f)])
    _write(path, ["frame", "angle_deg", "theta_deg", "quality", "fidelity"], rows)


def write_crosstalk(path: PathLike, m: CrosstalkMatrix) -> None:
    header = ["received_theta_deg"] + [f"sent_{math.degrees(s):.3f}" for s in m.sent_phases]
    rows = [[_fmt(math.degrees(t))] + [_fmt(v) for v in row] for t, row in zip(m.received_phases, m.values)]
    _write(path, header, rows)


def write_trajectories(path: PathLike, tracks: TrackSet) -> None:
    rows = sorted((f, tid, x, y) for tid, traj in tracks.trajectories.items() for f, x, y in traj)
    _write(path, ["frame", "core_id", "x", "y"], [[f, tid, _fmt(x), _fmt(y)] for f, tid, x, y in rows])


def write_tip_tilt(path: PathLike, tt: TipTilt, length: float) -> None:
    rows = [
        ["length_m", _fmt(length)],
        ["theta_x_rms_urad", _fmt(tt.theta_x_rms * 1e6)],
        ["theta_y_rms_urad", _fmt(tt.theta_y_rms * 1e6)],
        ["radial_rms_mm", _fmt(tt.radial_rms * 1e3)],
        ["mean_radial_mm", _fmt(tt.mean_radial * 1e3)],
    ]
    _write(path, ["quantity", "value"], rows)


def read_table(path: PathLike) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
