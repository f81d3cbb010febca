"""Vortex cores from complex fields (phase winding) and from intensity frames."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..modes import ComplexField
from .petals import smooth

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class VortexCore:
    position: tuple[float, float]  # (x, y) in pixels of the source grid
    charge: int
    frame_index: int = 0
    signed: bool = True  # False when only |charge| is known (intensity data)


def plaquette_winding(amplitude: np.ndarray) -> np.ndarray:
    """Integer winding of every 2x2 plaquette; entry [iy, ix] has its corner at [iy, ix]."""
    ph = np.angle(amplitude)

    def wrap(d):
        # round-half-even keeps wrap(-d) == -wrap(d) at exact +-pi ties, so
        # interior edges cancel and a degenerate on-axis core sums correctly
        return d - 2 * np.pi * np.rint(d / (2 * np.pi))

    # counter-clockwise in (x, y): (x,y) -> (x+1,y) -> (x+1,y+1) -> (x,y+1)
    total = (wrap(ph[:-1, 1:] - ph[:-1, :-1]) + wrap(ph[1:, 1:] - ph[:-1, 1:])
             + wrap(ph[1:, :-1] - ph[1:, 1:]) + wrap(ph[:-1, :-1] - ph[1:, :-1]))
    return np.rint(total / (2 * np.pi)).astype(int)


def refine_minimum(img: np.ndarray, iy: int, ix: int) -> tuple[float, float]:
    """Sub-pixel (x, y) of a minimum by least-squares paraboloid over the 3x3 patch."""
    ny, nx = img.shape
    if not (0 < iy < ny - 1 and 0 < ix < nx - 1):
        return float(ix), float(iy)
    patch = img[iy - 1:iy + 2, ix - 1:ix + 2].ravel()
    u, v = np.meshgrid([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0])
    u, v = u.ravel(), v.ravel()
    design = np.column_stack([np.ones(9), u, v, u * u, u * v, v * v])
    c = np.linalg.lstsq(design, patch, rcond=None)[0]
    hess = np.array([[2 * c[3], c[4]], [c[4], 2 * c[5]]])
    if np.linalg.det(hess) <= 0 or hess[0, 0] <= 0:
        return float(ix), float(iy)
    du, dv = np.linalg.solve(hess, -c[1:3])
    if abs(du) > 1 or abs(dv) > 1:
        return float(ix), float(iy)
    return ix + float(du), iy + float(dv)


def find_vortices_field(field: ComplexField, aperture_radius: float | None = None,
                        center: tuple[float, float] | None = None,
                        frame_index: int = 0) -> list[VortexCore]:
    """Phase singularities inside a circular aperture.

    ``aperture_radius`` and ``center`` are in meters; they default to the
    second-moment beam radius and the intensity centroid.
    """
    g = field.grid
    if center is None:
        center = field.centroid()
    if aperture_radius is None:
        aperture_radius = field.beam_radius()
    cx = center[0] / g.pitch + g.center
    cy = center[1] / g.pitch + g.center
    rad = aperture_radius / g.pitch

    winding = plaquette_winding(field.amplitude)
    py, px = np.mgrid[0:g.n - 1, 0:g.n - 1] + 0.5
    inside = (px - cx) ** 2 + (py - cy) ** 2 <= rad ** 2
    marked = (winding != 0) & inside
    labels, count = ndimage.label(marked, structure=_EIGHT)
    if count == 0:
        return []

    intensity = field.intensity
    cores = []
    for k, sl in enumerate(ndimage.find_objects(labels), start=1):
        mask = labels[sl] == k
        charge = int(winding[sl][mask].sum())
        if charge == 0:
            continue
        # corner samples of the cluster's plaquettes
        ys, xs = np.nonzero(mask)
        ys, xs = ys + sl[0].start, xs + sl[1].start
        cy_s = np.concatenate([ys, ys, ys + 1, ys + 1])
        cx_s = np.concatenate([xs, xs + 1, xs, xs + 1])
        j = np.argmin(intensity[cy_s, cx_s])
        x, y = refine_minimum(intensity, int(cy_s[j]), int(cx_s[j]))
        cores.append(VortexCore((x, y), charge, frame_index))
    cores.sort(key=lambda c: (c.position[1], c.position[0]))
    return cores


def total_charge(cores: list[VortexCore]) -> int:
    return sum(c.charge for c in cores)


def find_vortices_frame(frame, beam_support_fraction: float = 0.1, depth_fraction: float = 0.2,
                        smoothing_passes: int = 2) -> list[VortexCore]:
    """Dark cores of an intensity image: local minima enclosed by the beam.

    The beam support is the region above ``beam_support_fraction`` of the
    smoothed peak with its holes filled; a core is a strict local minimum
    lying in one of those holes and darker than ``depth_fraction`` of the
    peak.  Only |charge| = 1 can be claimed from intensity.
    """
    img = np.asarray(getattr(frame, "counts", frame), dtype=float)
    index = int(getattr(frame, "index", 0))
    sm = smooth(img, smoothing_passes)
    peak = sm.max()
    if not peak > 0:
        return []
    bright = sm > beam_support_fraction * peak
    holes = ndimage.binary_fill_holes(bright) & ~bright
    minima = (sm == ndimage.minimum_filter(sm, size=3, mode="nearest")) & holes & (sm < depth_fraction * peak)
    labels, count = ndimage.label(minima, structure=_EIGHT)
    cores = []
    for k, sl in enumerate(ndimage.find_objects(labels), start=1):
        ys, xs = np.nonzero(labels[sl] == k)
        iy = int(round(ys.mean())) + sl[0].start
        ix = int(round(xs.mean())) + sl[1].start
        if len(ys) == 1:
            x, y = refine_minimum(sm, iy, ix)
        else:
            x, y = float(xs.mean() + sl[1].start), float(ys.mean() + sl[0].start)
        cores.append(VortexCore((x, y), 1, index, signed=False))
    cores.sort(key=lambda c: (c.position[1], c.position[0]))
    return cores


def field_to_pixels(position_m: tuple[float, float], pitch: float, n: int) -> tuple[float, float]:
    return position_m[0] / pitch + n / 2, position_m[1] / pitch + n / 2


def pixels_to_field(position_px: tuple[float, float], pitch: float, n: int) -> tuple[float, float]:
    return (position_px[0] - n / 2) * pitch, (position_px[1] - n / 2) * pitch


def core_separation(cores: list[VortexCore]) -> float:
    """Smallest pairwise distance, pixels (inf for fewer than two cores)."""
    pts = np.array([c.position for c in cores])
    if len(pts) < 2:
        return math.inf
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    return float(d[np.triu_indices(len(pts), 1)].min())
