"""Frame-to-frame vortex core tracking."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .vortices import VortexCore


@dataclass
class TrackSet:
    trajectories: dict[int, list[tuple[int, float, float]]] = field(default_factory=dict)
    # per frame: {(track_a, track_b): distance in pixels}
    inter_core_distances: list[dict[tuple[int, int], float]] = field(default_factory=list)
    discontinuities: list[int] = field(default_factory=list)

    def distance_std(self) -> float:
        """Mean over core pairs of the std of their separation across frames."""
        series: dict[tuple[int, int], list[float]] = {}
        for frame in self.inter_core_distances:
            for pair, d in frame.items():
                series.setdefault(pair, []).append(d)
        stds = [np.std(v) for v in series.values() if len(v) > 1]
        return float(np.mean(stds)) if stds else 0.0

    def mean_positions(self) -> np.ndarray:
        """Per-frame centroid of all cores present, shape (frames, 2)."""
        by_frame: dict[int, list[tuple[float, float]]] = {}
        for traj in self.trajectories.values():
            for f, x, y in traj:
                by_frame.setdefault(f, []).append((x, y))
        return np.array([np.mean(by_frame[f], axis=0) for f in sorted(by_frame)])

    def wander_std(self) -> float:
        """2-D rms scatter of the core-set centroid about its mean, pixels."""
        pos = self.mean_positions()
        return float(np.sqrt(pos.var(axis=0).sum())) if len(pos) > 1 else 0.0


def track_cores(per_frame_cores: Sequence[Sequence[VortexCore]]) -> TrackSet:
    """Link cores between consecutive frames by minimum total squared displacement.

    A change in core count closes unmatched tracks and opens new ones; the
    frame index is recorded in ``discontinuities``.
    """
    tracks = TrackSet()
    active: dict[int, tuple[float, float]] = {}
    next_id = 0
    last_frame = None
    for k, cores in enumerate(per_frame_cores):
        frame_index = cores[0].frame_index if cores else k
        if last_frame is not None and frame_index <= last_frame:
            frame_index = last_frame + 1
        last_frame = frame_index

        ids = list(active)
        pts = np.array([c.position for c in cores], dtype=float).reshape(-1, 2)
        assigned: dict[int, int] = {}
        if ids and len(pts):
            prev = np.array([active[i] for i in ids])
            cost = ((prev[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
            rows, cols = linear_sum_assignment(cost)
            assigned = {int(c): ids[r] for r, c in zip(rows, cols)}
        if k > 0 and (len(pts) != len(ids)):
            tracks.discontinuities.append(frame_index)

        active = {}
        for j, (x, y) in enumerate(pts):
            tid = assigned.get(j)
            if tid is None:
                tid = next_id
                next_id += 1
                tracks.trajectories[tid] = []
            tracks.trajectories[tid].append((frame_index, float(x), float(y)))
            active[tid] = (float(x), float(y))

        distances = {}
        for a, b in combinations(sorted(active), 2):
            distances[(a, b)] = float(np.hypot(active[a][0] - active[b][0], active[a][1] - active[b][1]))
        tracks.inter_core_distances.append(distances)
    return tracks
