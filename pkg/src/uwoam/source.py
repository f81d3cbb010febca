"""Attenuated-laser source: photon budget and the emitted OAM state."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from scipy.constants import c as SPEED_OF_LIGHT, h as PLANCK

from .modes import ComplexField, GridSpec, LGModeSpec, SuperpositionSpec, lg_field, superpose


@dataclass(frozen=True)
class PureState:
    ell: int

    def __post_init__(self):
        if int(self.ell) != self.ell:
            raise ValueError("ell must be an integer")


State = Union[PureState, SuperpositionSpec]


@dataclass(frozen=True)
class SourceSpec:
    power: float
    wavelength: float = 532e-9
    slot: float = 1e-9
    state: State = PureState(1)

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("power must be non-negative")
        if not self.slot > 0:
            raise ValueError("slot must be positive")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")


@dataclass(frozen=True)
class PhotonBudget:
    photon_energy: float  # J
    rate: float  # photons / s
    mean_per_slot: float


def photon_energy(wavelength: float) -> float:
    return PLANCK * SPEED_OF_LIGHT / wavelength


def photon_budget(src: SourceSpec) -> PhotonBudget:
    energy = photon_energy(src.wavelength)
    rate = src.power / energy
    return PhotonBudget(energy, rate, rate * src.slot)


def power_for_mean(mean_per_slot: float, wavelength: float = 532e-9, slot: float = 1e-9) -> float:
    """Optical power that yields ``mean_per_slot`` photons per time slot."""
    return mean_per_slot / slot * photon_energy(wavelength)


def emit(src: SourceSpec, grid: GridSpec, waist: float) -> ComplexField:
    """The state leaving the encoder, as a unit-power field at the waist.

    Polarization bookkeeping inside the interferometer is collapsed: the
    state is what remains after projection onto diagonal polarization.
    """
    state = src.state
    if isinstance(state, PureState):
        return lg_field(LGModeSpec(state.ell, 0, waist, src.wavelength), grid)
    if isinstance(state, SuperpositionSpec):
        return superpose(state, grid, waist, src.wavelength)
    raise TypeError(f"unsupported state {state!r}")
