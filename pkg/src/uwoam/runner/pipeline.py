"""End-to-end runs: emit -> transmit -> capture -> analyze -> write.

Seed derivation from ``master_seed`` (m):

* turbulence base seed   ``derive_seed(m, CHANNEL)``
* camera seed, state i   ``derive_seed(m, DETECTOR, i)``
* realization, (i, j)    ``derive_seed(m, FRAME, i, j)``

The realization seed picks the launch tilt and every phase screen of frame j;
the camera seed together with j picks the shot noise.  Frames are therefore
independent tasks and may be rendered in any order or process.
"""
from __future__ import annotations

import hashlib
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from .. import seeds
from ..analysis.fidelity import DetectionError, crosstalk_ensemble, recover, series_from_results
from ..analysis.petals import OrientationResult, angle_deviation
from ..analysis.tables import write_crosstalk, write_orientations, write_tip_tilt, write_trajectories
from ..analysis.tiptilt import frame_centroid, tip_tilt
from ..analysis.tracking import track_cores
from ..analysis.vortices import VortexCore, find_vortices_field, total_charge
from ..channel import transmit
from ..detector import capture_frame, frame_bytes
from ..modes import ComplexField, GridSpec, SuperpositionSpec
from ..source import PureState, SourceSpec, emit, photon_budget
from .config import ExperimentConfig, config_to_text, format_state
from .manifest import RunManifest, sha256_file

FRAME = 5  # seed namespace for per-frame realizations


@dataclass
class FrameRecord:
    state_index: int
    frame_index: int
    path: str
    sha256: str
    orientation: OrientationResult | None = None
    failure: str | None = None
    field_cores: list[VortexCore] = field(default_factory=list)
    centroid: tuple[float, float] | None = None  # m, from the frame


def turbulence_seed(cfg: ExperimentConfig) -> int:
    return seeds.derive_seed(cfg.master_seed, seeds.CHANNEL)


def detector_seed(cfg: ExperimentConfig, state_index: int) -> int:
    return seeds.derive_seed(cfg.master_seed, seeds.DETECTOR, state_index)


def frame_seed(cfg: ExperimentConfig, state_index: int, frame_index: int) -> int:
    return seeds.derive_seed(cfg.master_seed, FRAME, state_index, frame_index)


def expected_photons(cfg: ExperimentConfig) -> float:
    """Photons reaching the sensor plane per exposure: rate x exposure x exp(-cL)."""
    return photon_budget(cfg.source).rate * cfg.detector.exposure * cfg.channel.transmittance


@lru_cache(maxsize=16)
def _launch(src: SourceSpec, grid: GridSpec, waist: float) -> ComplexField:
    return emit(src, grid, waist)


def received_field(cfg: ExperimentConfig, state_index: int, frame_index: int) -> ComplexField:
    state = cfg.sent_states[state_index]
    f0 = _launch(replace(cfg.source, state=state), cfg.grid, cfg.waist)
    channel = replace(cfg.channel, turbulence=replace(cfg.channel.turbulence, seed=turbulence_seed(cfg)))
    return transmit(f0, channel, frame_seed(cfg, state_index, frame_index))


def frame_path(state_index: int, frame_index: int) -> str:
    return f"frames/state_{state_index:02d}/frame_{frame_index:04d}.pgm"


def render_frame(cfg: ExperimentConfig, state_index: int, frame_index: int) -> FrameRecord:
    """Simulate, capture, write and analyze one frame."""
    state = cfg.sent_states[state_index]
    f = received_field(cfg, state_index, frame_index)
    det = replace(cfg.detector, seed=detector_seed(cfg, state_index))
    frame = capture_frame(f, det, expected_photons(cfg), frame_index)
    data = frame_bytes(frame)
    rel = frame_path(state_index, frame_index)
    (cfg.output_dir / rel).write_bytes(data)
    rec = FrameRecord(state_index, frame_index, rel, hashlib.sha256(data).hexdigest())

    if isinstance(state, SuperpositionSpec):
        rec.orientation = recover(frame, state.ell, cfg.threshold_fraction, cfg.smoothing_passes)
        if rec.orientation is None:
            rec.failure = "petal detection failed or low confidence"
    else:
        if state.ell != 0:
            rec.field_cores = find_vortices_field(f, frame_index=frame_index)
        try:
            rec.centroid = frame_centroid(frame, det.pitch, det.background)
        except ValueError as exc:
            rec.failure = str(exc)
    return rec


def _render_task(args) -> FrameRecord:
    return render_frame(*args)


def _versions() -> dict[str, str]:
    try:
        pkg = metadata.version("uwoam")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"package": pkg, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "platform": sys.platform}


def _superposition_summary(state: SuperpositionSpec, records: list[FrameRecord], tables: Path,
                           i: int, failures: list[str]) -> dict[str, object]:
    summary: dict[str, object] = {"failed_frames": sum(r.orientation is None for r in records)}
    try:
        series = series_from_results([r.orientation for r in records], state)
    except DetectionError as exc:
        failures.append(f"state {i:02d}: {exc}")
        return summary
    write_orientations(tables / f"state_{i:02d}_orientations.csv", series, [r.frame_index for r in records])
    dev = np.array([angle_deviation(state.theta, r, state.ell) for r in series.results if r is not None])
    summary.update(fidelity_mean=series.mean, fidelity_std=series.std, fidelity_min=series.min,
                   fidelity_max=series.max, deviation_mean_deg=float(dev.mean()),
                   deviation_std_deg=float(dev.std()), deviation_max_deg=float(dev.max()))
    return summary


def _pure_summary(cfg: ExperimentConfig, state: PureState, records: list[FrameRecord], tables: Path,
                  i: int, failures: list[str]) -> dict[str, object]:
    ell = abs(state.ell)
    summary: dict[str, object] = {"failed_frames": sum(r.failure is not None for r in records)}
    centroids = [r.centroid for r in records if r.centroid is not None]
    if len(centroids) >= 2:
        tt = tip_tilt(centroids, cfg.channel.length)
        write_tip_tilt(tables / f"state_{i:02d}_tiptilt.csv", tt, cfg.channel.length)
        summary.update(tilt_x_rms_urad=tt.theta_x_rms * 1e6, tilt_y_rms_urad=tt.theta_y_rms * 1e6,
                       mean_radial_mm=tt.mean_radial * 1e3)
    if ell == 0:
        return summary
    counts = [len(r.field_cores) for r in records]
    unit = [all(abs(c.charge) == 1 for c in r.field_cores) for r in records]
    exact = np.mean([n == ell and u for n, u in zip(counts, unit)])
    conserved = np.mean([total_charge(r.field_cores) == state.ell for r in records])
    tracks = track_cores([r.field_cores for r in records])
    write_trajectories(tables / f"state_{i:02d}_trajectories.csv", tracks)
    summary.update(cores_mean=float(np.mean(counts)), exact_unit_cores_fraction=float(exact),
                   charge_conserved_fraction=float(conserved),
                   distance_std_px=tracks.distance_std(), wander_std_px=tracks.wander_std(),
                   track_discontinuities=len(tracks.discontinuities))
    return summary


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Render every (state, frame) pair, analyze, and write frames, tables and manifest.

    Per-frame or per-state analysis failures are listed in the manifest and
    the run carries on.  Output files are identical for a fixed config,
    whatever the worker count.
    """
    t0 = time.perf_counter()
    out = Path(cfg.output_dir)
    tables = out / "tables"
    tables.mkdir(parents=True, exist_ok=True)
    for i in range(len(cfg.sent_states)):
        (out / "frames" / f"state_{i:02d}").mkdir(parents=True, exist_ok=True)

    tasks = [(cfg, i, j) for i in range(len(cfg.sent_states)) for j in range(cfg.frames_per_state)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_render_task, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))))
    else:
        records = [_render_task(t) for t in tasks]

    manifest = RunManifest(config_to_text(cfg), versions=_versions())
    manifest.seeds["master_seed"] = cfg.master_seed
    manifest.seeds["turbulence"] = turbulence_seed(cfg)
    by_state: list[list[FrameRecord]] = [[] for _ in cfg.sent_states]
    for r in records:
        by_state[r.state_index].append(r)
        manifest.files[r.path] = r.sha256
        manifest.seeds[f"state_{r.state_index:02d}.frame_{r.frame_index:04d}"] = frame_seed(
            cfg, r.state_index, r.frame_index)
        if r.failure:
            manifest.failures.append(f"state {r.state_index:02d} frame {r.frame_index:04d}: {r.failure}")

    groups: dict[int, list[int]] = {}
    for i, (state, recs) in enumerate(zip(cfg.sent_states, by_state)):
        manifest.seeds[f"state_{i:02d}.detector"] = detector_seed(cfg, i)
        summary: dict[str, object] = {"state": format_state(state), "frames": len(recs)}
        if isinstance(state, SuperpositionSpec):
            summary.update(_superposition_summary(state, recs, tables, i, manifest.failures))
            if "fidelity_mean" in summary:
                groups.setdefault(state.ell, []).append(i)
        else:
            summary.update(_pure_summary(cfg, state, recs, tables, i, manifest.failures))
        manifest.states.append(summary)

    for ell, members in sorted(groups.items()):
        if len(members) < 2:
            continue
        sent = [cfg.sent_states[i].theta for i in members]
        received = [[r.orientation for r in by_state[i] if r.orientation is not None] for i in members]
        m = crosstalk_ensemble(sent, received)
        write_crosstalk(tables / f"crosstalk_l{ell}.csv", m)
        for i, d in zip(members, m.diagonal):
            manifest.states[i]["crosstalk_diagonal"] = float(d)

    for p in sorted(tables.glob("*.csv")):
        manifest.files[p.relative_to(out).as_posix()] = sha256_file(p)
    manifest.wall_clock = time.perf_counter() - t0
    manifest.write(out / "manifest.txt")
    return manifest


def analyze_frames(frames, ell: int, sent_theta: float, threshold_fraction: float = 0.5,
                   smoothing_passes: int = 2):
    """Fidelity series for already-captured frames of a superposition of +-ell."""
    sent = SuperpositionSpec(ell, sent_theta)
    return series_from_results([recover(f, ell, threshold_fraction, smoothing_passes) for f in frames], sent)

