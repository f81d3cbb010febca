"""One-off calibration of the turbulence strength and the launch tilt jitter.

Both routines use the full emit -> transmit -> capture -> analyze chain with
fixed seeds, so every evaluation sees the same random numbers and the
objective is a smooth function of the parameter being tuned.  Their outputs
are frozen into ``uwoam.calibration``.
"""
from __future__ import annotations

import math
from dataclasses import replace
from typing import Iterator

import numpy as np

from ..analysis.fidelity import recover, series_from_results
from ..analysis.tiptilt import frame_centroid
from ..channel import ChannelSpec, TurbulenceSpec
from ..detector import Frame, capture_frame
from ..modes import ComplexField, SuperpositionSpec
from ..source import PureState
from .config import ExperimentConfig
from .pipeline import detector_seed, expected_photons, received_field


def simulate(cfg: ExperimentConfig, state_index: int = 0) -> Iterator[tuple[ComplexField, Frame]]:
    """Received field and captured frame for each frame of one state, nothing written."""
    det = replace(cfg.detector, seed=detector_seed(cfg, state_index))
    n_ph = expected_photons(cfg)
    for j in range(cfg.frames_per_state):
        f = received_field(cfg, state_index, j)
        yield f, capture_frame(f, det, n_ph, j)


def _with(cfg: ExperimentConfig, cn2: float | None = None, tilt: float | None = None) -> ExperimentConfig:
    ch = cfg.channel
    if cn2 is not None:
        ch = replace(ch, turbulence=replace(ch.turbulence, cn2=cn2))
    if tilt is not None:
        ch = replace(ch, tilt_rms=tilt)
    return replace(cfg, channel=ch)


def fidelity_std(cfg: ExperimentConfig, state_index: int = 0) -> float:
    state = cfg.sent_states[state_index]
    results = [recover(fr, state.ell, cfg.threshold_fraction, cfg.smoothing_passes)
               for _, fr in simulate(cfg, state_index)]
    return series_from_results(results, state).std


def calibrate_cn2(target_std: float = 0.010, ell: int = 1, frames: int = 200, master_seed: int = 1,
                  bounds: tuple[float, float] = (2e-13, 2e-12), iterations: int = 8) -> tuple[float, float]:
    """Cn2 whose ell-superposition fidelity std equals ``target_std``; returns (cn2, achieved std).

    Bisection in log(cn2); tilt jitter is off so only turbulence contributes.
    """
    base = ExperimentConfig(sent_states=(SuperpositionSpec(ell, math.pi / 3),), frames_per_state=frames,
                            master_seed=master_seed, channel=ChannelSpec(turbulence=TurbulenceSpec()))
    lo, hi = (math.log(b) for b in bounds)
    best = (math.nan, math.nan)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        std = fidelity_std(_with(base, cn2=math.exp(mid)))
        best = (math.exp(mid), std)
        if std < target_std:
            lo = mid
        else:
            hi = mid
    return best


def centroid_track(cfg: ExperimentConfig, state_index: int = 0) -> np.ndarray:
    det = cfg.detector
    return np.array([frame_centroid(fr, det.pitch, det.background) for _, fr in simulate(cfg, state_index)])


def calibrate_tilt(mean_radial: float = 0.64e-3, cn2: float | None = None, ell: int = 3, frames: int = 300,
                   master_seed: int = 2) -> tuple[float, float]:
    """Per-axis tilt rms so that turbulence wander plus tilt gives ``mean_radial``.

    Returns (tilt_rms, turbulence-only per-axis wander sigma in m).  The
    radial offset of a circular Gaussian wander has mean sigma*sqrt(pi/2).
    """
    base = ExperimentConfig(sent_states=(PureState(ell),), frames_per_state=frames, master_seed=master_seed)
    if cn2 is not None:
        base = _with(base, cn2=cn2)
    pos = centroid_track(_with(base, tilt=0.0))
    sigma_turb = float(np.sqrt(pos.var(axis=0).mean()))
    sigma_total = mean_radial / math.sqrt(math.pi / 2)
    length = base.channel.length
    if sigma_turb >= sigma_total:
        return 0.0, sigma_turb
    return math.atan(math.sqrt(sigma_total ** 2 - sigma_turb ** 2) / length), sigma_turb
