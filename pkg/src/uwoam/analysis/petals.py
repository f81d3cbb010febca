"""Angle recognition on petal images.

Petals are segmented by thresholding a smoothed image; the orientation of the
2l-fold pattern is the circular mean of the petal bearings taken 2l times
around the circle.  For two petals this is just the direction of the line
through both centroids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class PetalSet:
    centroids: np.ndarray  # (k, 2) array of (x, y) pixel positions
    pattern_center: tuple[float, float]
    ell: int
    found: int  # components above threshold, before keeping the 2l largest

    @property
    def accepted(self) -> bool:
        return len(self.centroids) == 2 * self.ell


@dataclass(frozen=True)
class OrientationResult:
    angle: float
    theta: float
    quality: float
    ell: int

    @property
    def low_confidence(self) -> bool:
        return self.quality < 0.5


def _image(frame) -> np.ndarray:
    return np.asarray(getattr(frame, "counts", frame), dtype=float)


def smooth(img: np.ndarray, passes: int = 2) -> np.ndarray:
    for _ in range(passes):
        img = ndimage.uniform_filter(img, size=3, mode="constant")
    return img


def segment_petals(frame, ell: int, threshold_fraction: float = 0.5,
                   smoothing_passes: int = 2) -> PetalSet:
    """Locate the 2l brightest lobes and their intensity-weighted centroids.

    A frame with fewer than 2l components above threshold yields a set with
    ``accepted == False``; ``found`` carries the number of components seen.
    """
    ell = abs(int(ell))
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if not 0 < threshold_fraction < 1:
        raise ValueError("threshold_fraction must lie in (0, 1)")
    img = _image(frame)
    if img.size == 0:
        raise ValueError("empty frame")
    empty = PetalSet(np.empty((0, 2)), (math.nan, math.nan), ell, 0)

    smoothed = smooth(img, smoothing_passes)
    peak = smoothed.max()
    if not peak > 0:
        return empty
    labels, count = ndimage.label(smoothed >= threshold_fraction * peak, structure=_EIGHT)
    if count == 0:
        return empty

    flat = labels.ravel()
    area = np.bincount(flat, minlength=count + 1)[1:]
    mass = np.bincount(flat, weights=img.ravel(), minlength=count + 1)[1:]
    # largest by area, ties broken by collected signal
    order = np.lexsort((-mass, -area))
    keep = order[: 2 * ell]
    keep = keep[mass[keep] > 0]
    if len(keep) == 0:
        return PetalSet(np.empty((0, 2)), (math.nan, math.nan), ell, int(count))

    ny, nx = img.shape
    mx = np.bincount(flat, weights=(img * np.arange(nx)[None, :]).ravel(), minlength=count + 1)[1:]
    my = np.bincount(flat, weights=(img * np.arange(ny)[:, None]).ravel(), minlength=count + 1)[1:]
    centroids = np.column_stack([mx[keep] / mass[keep], my[keep] / mass[keep]])
    total = mass[keep].sum()
    center = (float(mx[keep].sum() / total), float(my[keep].sum() / total))
    return PetalSet(centroids, center, ell, int(count))


def orientation(petals: PetalSet) -> OrientationResult:
    """Circular-mean orientation of the petal pattern and the implied relative phase."""
    if not petals.accepted:
        raise ValueError(f"need {2 * petals.ell} petals, found {petals.found}")
    ell = petals.ell
    cx, cy = petals.pattern_center
    d = petals.centroids - np.array([cx, cy])
    bearings = np.arctan2(d[:, 1], d[:, 0])
    resultant = np.exp(1j * 2 * ell * bearings).sum()
    angle = (np.angle(resultant) / (2 * ell)) % (math.pi / ell)
    angle = 0.0 if math.isclose(angle, math.pi / ell) else float(angle)
    quality = float(abs(resultant) / len(bearings))
    return OrientationResult(angle, theta_from_angle(angle, ell), quality, ell)


def theta_from_angle(angle: float, ell: int) -> float:
    theta = (-2 * abs(ell) * angle) % (2 * math.pi)
    return 0.0 if math.isclose(theta, 2 * math.pi) else float(theta)


def angle_deviation(sent_theta: float, result: OrientationResult, ell: int) -> float:
    """|expected - measured| orientation in degrees, folded into [0, 90/l]."""
    period = math.pi / abs(ell)
    expected = (-sent_theta / (2 * abs(ell))) % period
    d = abs(result.angle - expected) % period
    return math.degrees(min(d, period - d))
