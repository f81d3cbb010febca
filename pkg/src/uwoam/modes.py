"""Laguerre-Gaussian fields, OAM superpositions and overlaps on a square grid.

Conventions used everywhere in the package:

* arrays are indexed ``[iy, ix]``; sample ``i`` on either axis sits at
  ``(i - n/2) * pitch`` so the optical axis falls exactly on sample ``n/2``;
* the azimuth is ``atan2(y, x)``, counter-clockwise from +x;
* a pure mode carries ``exp(i*ell*phi)``;
* a balanced superposition ``(|-l> + e^{i theta}|+l>)/sqrt(2)`` has intensity
  proportional to ``cos^2(l*phi + theta/2)``, so its petal pattern is oriented
  at ``(-theta / (2l)) mod (pi/l)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre


class SamplingError(ValueError):
    """The grid cannot represent the requested beam."""


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    n: int
    extent: float

    def __post_init__(self):
        if self.n < 64 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 64, got {self.n}")
        if not self.extent > 0:
            raise ValueError(f"grid extent must be positive, got {self.extent}")

    @property
    def pitch(self) -> float:
        return self.extent / self.n

    @property
    def center(self) -> float:
        """Index of the on-axis sample (same on both axes)."""
        return self.n / 2

    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.pitch

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Return broadcastable ``(x, y)`` arrays of shapes (1, n) and (n, 1)."""
        a = self.axis()
        return a[np.newaxis, :], a[:, np.newaxis]

    def polar(self) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.coords()
        return np.hypot(x, y), np.arctan2(y, x)

    def frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        """Angular spatial frequencies in FFT order, shapes (1, n) and (n, 1)."""
        k = 2 * np.pi * np.fft.fftfreq(self.n, d=self.pitch)
        return k[np.newaxis, :], k[:, np.newaxis]


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Sampled complex amplitude; ``sum(|a|^2) * pitch^2`` is the power."""

    grid: GridSpec
    amplitude: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.amplitude, dtype=np.complex128, copy=True)
        if a.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"amplitude shape {a.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(a)):
            raise ValueError("field contains non-finite samples")
        a.flags.writeable = False
        object.__setattr__(self, "amplitude", a)

    @property
    def intensity(self) -> np.ndarray:
        return self.amplitude.real ** 2 + self.amplitude.imag ** 2

    def norm2(self) -> float:
        return float(self.intensity.sum() * self.grid.pitch ** 2)

    def normalized(self) -> "ComplexField":
        p = self.norm2()
        if p <= 0:
            raise ValueError("cannot normalize a zero field")
        return ComplexField(self.grid, self.amplitude / math.sqrt(p))

    def scaled(self, factor: complex) -> "ComplexField":
        return ComplexField(self.grid, self.amplitude * factor)

    def centroid(self) -> tuple[float, float]:
        """Intensity-weighted centre ``(x, y)`` in meters."""
        x, y = self.grid.coords()
        intensity = self.intensity
        total = intensity.sum()
        return float((intensity * x).sum() / total), float((intensity * y).sum() / total)

    def beam_radius(self) -> float:
        """Second-moment radius sqrt(2<r^2>) about the centroid (w0*sqrt(|l|+1) for LG_0^l)."""
        x, y = self.grid.coords()
        cx, cy = self.centroid()
        intensity = self.intensity
        r2 = ((x - cx) ** 2 + (y - cy) ** 2) * intensity
        return math.sqrt(2 * r2.sum() / intensity.sum())


@dataclass(frozen=True)
class LGModeSpec:
    ell: int
    p: int = 0
    waist: float = 2e-3
    wavelength: float = 532e-9

    def __post_init__(self):
        if int(self.ell) != self.ell:
            raise ValueError("ell must be an integer")
        if self.p < 0 or int(self.p) != self.p:
            raise ValueError("radial index p must be a non-negative integer")
        if not self.waist > 0:
            raise ValueError("waist must be positive")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.waist ** 2 / self.wavelength

    def width(self, z: float) -> float:
        return self.waist * math.sqrt(1 + (z / self.rayleigh_range) ** 2)

    def radius(self, z: float) -> float:
        """1/e^2-equivalent radius of the whole mode (grows with |l| and p)."""
        return self.width(z) * math.sqrt(2 * self.p + abs(self.ell) + 1)


@dataclass(frozen=True)
class SuperpositionSpec:
    ell: int
    theta: float = 0.0
    weight: float = 0.5

    def __post_init__(self):
        if int(self.ell) != self.ell or abs(self.ell) < 1:
            raise ValueError("superposition order must be a non-zero integer")
        if not 0 <= self.weight <= 1:
            raise ValueError("weight must lie in [0, 1]")
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        object.__setattr__(self, "theta", self.theta % (2 * math.pi))

    @property
    def orientation(self) -> float:
        """Petal orientation in [0, pi/|l|) for the balanced state."""
        return expected_orientation(self.theta, self.ell)


def expected_orientation(theta: float, ell: int) -> float:
    ell = abs(ell)
    return (-theta / (2 * ell)) % (math.pi / ell)


def check_sampling(mode: LGModeSpec, grid: GridSpec, z: float = 0.0) -> None:
    if mode.waist < 8 * grid.pitch:
        raise SamplingError(
            f"under-resolved: waist {mode.waist:.3g} m spans {mode.waist / grid.pitch:.2f} "
            f"samples, need >= 8 (pitch {grid.pitch:.3g} m)"
        )
    radius = mode.radius(z)
    if grid.extent < 6 * radius:
        raise SamplingError(
            f"under-resolved: grid extent {grid.extent:.3g} m < 6 x beam radius "
            f"{radius:.3g} m at z={z:g} m"
        )


def lg_field(mode: LGModeSpec, grid: GridSpec, z: float = 0.0) -> ComplexField:
    """LG_p^l amplitude at distance ``z`` from the waist, normalized on the grid."""
    if not math.isfinite(z):
        raise ValueError("z must be finite")
    check_sampling(mode, grid, z)
    k = 2 * math.pi / mode.wavelength
    zr = mode.rayleigh_range
    w = mode.width(z)
    gouy = (2 * mode.p + abs(mode.ell) + 1) * math.atan2(z, zr)
    inv_curv = z / (z ** 2 + zr ** 2)  # 1/R(z), zero at the waist

    r, phi = grid.polar()
    rho2 = 2 * r ** 2 / w ** 2
    radial = rho2 ** (abs(mode.ell) / 2) * eval_genlaguerre(mode.p, abs(mode.ell), rho2)
    amp = radial * np.exp(-r ** 2 / w ** 2) * np.exp(
        1j * (0.5 * k * r ** 2 * inv_curv + mode.ell * phi - gouy)
    )
    return ComplexField(grid, amp).normalized()


def superpose(spec: SuperpositionSpec, grid: GridSpec, waist: float, wavelength: float,
              z: float = 0.0) -> ComplexField:
    """sqrt(1-w)|-l> + sqrt(w) e^{i theta}|+l>, renormalized."""
    ell = abs(spec.ell)
    minus = lg_field(LGModeSpec(-ell, 0, waist, wavelength), grid, z)
    plus = lg_field(LGModeSpec(ell, 0, waist, wavelength), grid, z)
    amp = (math.sqrt(1 - spec.weight) * minus.amplitude
           + math.sqrt(spec.weight) * np.exp(1j * spec.theta) * plus.amplitude)
    return ComplexField(grid, amp).normalized()


def overlap(a: ComplexField, b: ComplexField) -> complex:
    """Discrete inner product <a|b>; its squared magnitude is the projection fidelity."""
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")
    return complex(np.vdot(a.amplitude, b.amplitude) * a.grid.pitch ** 2)


def analytic_fidelity(theta_a: float, theta_b: float) -> float:
    """Projection of two balanced same-order superpositions: cos^2(dtheta/2)."""
    return math.cos((theta_b - theta_a) / 2) ** 2


def loop_winding(amplitude: np.ndarray, ix: np.ndarray, iy: np.ndarray) -> int:
    """Net phase circulation, in units of 2pi, along a closed loop of samples."""
    ph = np.angle(amplitude[iy, ix])
    steps = np.diff(np.append(ph, ph[0]))
    steps = steps - 2 * np.pi * np.rint(steps / (2 * np.pi))
    return int(round(steps.sum() / (2 * np.pi)))


def square_loop(cx: int, cy: int, half: int) -> tuple[np.ndarray, np.ndarray]:
    """Counter-clockwise (in x/y) perimeter of the square of half-width ``half`` samples."""
    s = np.arange(-half, half)
    xs = np.concatenate([cx + s, np.full(2 * half, cx + half), cx - s, np.full(2 * half, cx - half)])
    ys = np.concatenate([np.full(2 * half, cy - half), cy + s, np.full(2 * half, cy + half), cy - s])
    return xs, ys


def winding_number(f: ComplexField, radius: float, center: tuple[float, float] = (0.0, 0.0)) -> int:
    """Topological charge enclosed by a square sample loop of half-width ``radius`` (meters)."""
    g = f.grid
    half = max(1, int(round(radius / g.pitch)))
    cx = int(round(center[0] / g.pitch + g.center))
    cy = int(round(center[1] / g.pitch + g.center))
    if min(cx, cy) - half < 0 or max(cx, cy) + half >= g.n:
        raise ValueError("winding loop leaves the grid")
    xs, ys = square_loop(cx, cy, half)
    return loop_winding(f.amplitude, xs, ys)
