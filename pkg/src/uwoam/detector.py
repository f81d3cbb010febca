"""Photon-counting camera model and 16-bit PGM frame files."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Union

import numpy as np
from scipy import sparse

from . import seeds
from .modes import ComplexField, GridSpec

MAX_COUNT = 65535


@dataclass(frozen=True)
class DetectorSpec:
    pixels: int = 512
    pitch: float = 1e-4
    exposure: float = 0.03
    qe: float = 0.25
    background: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.pixels < 32:
            raise ValueError("sensor must have at least 32 pixels per side")
        if not self.pitch > 0:
            raise ValueError("pixel pitch must be positive")
        if not self.exposure > 0:
            raise ValueError("exposure must be positive")
        if not 0 <= self.qe <= 1:
            raise ValueError("quantum efficiency must lie in [0, 1]")
        if self.background < 0:
            raise ValueError("background must be non-negative")


@dataclass(frozen=True, eq=False)
class Frame:
    counts: np.ndarray = field(repr=False)
    exposure: float
    index: int = 0
    timestamp: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2 or (c.size and c.min() < 0):
            raise ValueError("counts must be a non-negative 2-D array")
        c = c.astype(np.int64, copy=True)
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@lru_cache(maxsize=8)
def _resampling_matrix(grid: GridSpec, det: DetectorSpec) -> sparse.csr_matrix:
    """(pixels x n) weights: bilinear interpolation averaged over each pixel.

    Each pixel is split into ``ceil(pitch_sensor / pitch_grid)`` sub-samples
    per axis so that coarse pixels integrate rather than point-sample.
    Sensor pixel ``i`` is centred at ``(i - pixels/2) * pitch``.
    """
    sub = max(1, math.ceil(det.pitch / grid.pitch))
    offsets = (np.arange(sub) + 0.5) / sub - 0.5
    centres = np.arange(det.pixels) - det.pixels / 2
    pos = (centres[:, None] + offsets[None, :]) * det.pitch / grid.pitch + grid.n / 2
    lo = np.floor(pos).astype(int)
    frac = pos - lo
    rows = np.repeat(np.arange(det.pixels), sub)
    cols = np.concatenate([lo.ravel(), lo.ravel() + 1])
    vals = np.concatenate([(1 - frac).ravel(), frac.ravel()]) / sub
    rows = np.concatenate([rows, rows])
    ok = (cols >= 0) & (cols < grid.n)
    return sparse.csr_matrix((vals[ok], (rows[ok], cols[ok])), shape=(det.pixels, grid.n))


def pixel_fractions(f: ComplexField, det: DetectorSpec) -> np.ndarray:
    """Fraction of the field's power landing on each sensor pixel (bilinear resampling)."""
    w = _resampling_matrix(f.grid, det)
    per_pixel = w @ (w @ f.intensity).T
    return per_pixel.T * det.pitch ** 2 / f.norm2()


def capture_frame(f: ComplexField, det: DetectorSpec, expected_photons: float,
                  frame_index: int = 0) -> Frame:
    """Poisson photon counts; the mean per pixel is qe*N*fraction + background."""
    if expected_photons < 0:
        raise ValueError("expected_photons must be non-negative")
    mean = det.qe * expected_photons * pixel_fractions(f, det) + det.background
    counts = seeds.rng(det.seed, seeds.DETECTOR, frame_index).poisson(mean)
    np.minimum(counts, MAX_COUNT, out=counts)
    return Frame(counts, det.exposure, frame_index, frame_index * det.exposure)


FieldSource = Union[Iterable[ComplexField], Callable[[int], ComplexField]]


def capture_sequence(field_source: FieldSource, det: DetectorSpec, expected_photons: float,
                     n_frames: int) -> list[Frame]:
    """Frames 0..n-1, one field each; a callable source is called with the frame index."""
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    if callable(field_source):
        fields = (field_source(i) for i in range(n_frames))
    else:
        fields = iter(field_source)
    frames = []
    for i in range(n_frames):
        try:
            f = next(fields)
        except StopIteration:
            raise ValueError(f"field source exhausted after {i} frames") from None
        frames.append(capture_frame(f, det, expected_photons, i))
    return frames


def frame_bytes(frame: Frame) -> bytes:
    """Binary 16-bit PGM (P5, maxval 65535, big-endian samples)."""
    c = frame.counts
    if c.size and c.max() > MAX_COUNT:
        raise ValueError("counts exceed the 16-bit range")
    h, w = c.shape
    header = (f"P5\n# exposure {frame.exposure!r}\n# index {frame.index}\n"
              f"# timestamp {frame.timestamp!r}\n{w} {h}\n{MAX_COUNT}\n")
    return header.encode("ascii") + c.astype(">u2").tobytes()


def write_pgm(frame: Frame, path: Union[str, os.PathLike]) -> None:
    with open(path, "wb") as fh:
        fh.write(frame_bytes(frame))


def read_pgm(path: Union[str, os.PathLike]) -> Frame:
    """Read a 16-bit P5 file; exposure/index/timestamp come from header comments if present."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, meta, pos = [], {}, 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            end = data.index(b"\n", pos)
            key, _, value = data[pos + 1:end].decode("ascii").strip().partition(" ")
            meta[key] = value
            pos = end + 1
            continue
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode("ascii"))
    pos += 1  # single whitespace byte before the raster
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic != "P5":
        raise ValueError(f"not a binary PGM: {magic}")
    dtype = ">u2" if maxval > 255 else "u1"
    counts = np.frombuffer(data, dtype=dtype, count=w * h, offset=pos).reshape(h, w)
    return Frame(counts, float(meta.get("exposure", "nan")), int(meta.get("index", 0)),
                 float(meta.get("timestamp", 0.0)))
