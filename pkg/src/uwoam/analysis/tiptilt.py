"""Tip and tilt angles from centroid wander over a link of known length."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TipTilt:
    theta_x: np.ndarray  # rad, per sample
    theta_y: np.ndarray
    radial_rms: float  # m
    mean_radial: float  # m

    @property
    def theta_x_rms(self) -> float:
        return float(np.sqrt(np.mean(self.theta_x ** 2)))

    @property
    def theta_y_rms(self) -> float:
        return float(np.sqrt(np.mean(self.theta_y ** 2)))


def tilt_angle(dx: float, length: float) -> float:
    return math.atan(dx / length)


def tip_tilt(positions, length: float) -> TipTilt:
    """Angles arctan(d/L) of each (x, y) sample's offset from the series mean."""
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 2 or len(pos) < 2:
        raise ValueError("need at least two (x, y) samples")
    if not length > 0:
        raise ValueError("link length must be positive")
    d = pos - pos.mean(axis=0)
    radial = np.hypot(d[:, 0], d[:, 1])
    return TipTilt(np.arctan(d[:, 0] / length), np.arctan(d[:, 1] / length),
                   float(np.sqrt(np.mean(radial ** 2))), float(radial.mean()))


def tilt_rms_for_mean_radial(mean_radial: float, length: float) -> float:
    """Per-axis rms launch tilt whose receiver wander has the given mean radius.

    Independent Gaussian axes make the radial offset Rayleigh distributed,
    with mean sigma*sqrt(pi/2).
    """
    return math.atan(mean_radial / math.sqrt(math.pi / 2) / length)


def frame_centroid(frame, pitch: float, background: float = 0.0) -> tuple[float, float]:
    """Background-subtracted intensity centroid in meters, optical axis at pixel n/2."""
    img = np.asarray(getattr(frame, "counts", frame), dtype=float) - background
    np.maximum(img, 0.0, out=img)
    total = img.sum()
    if not total > 0:
        raise ValueError("frame has no signal above background")
    ny, nx = img.shape
    x = (img.sum(axis=0) @ np.arange(nx)) / total
    y = (img.sum(axis=1) @ np.arange(ny)) / total
    return (x - nx / 2) * pitch, (y - ny / 2) * pitch
