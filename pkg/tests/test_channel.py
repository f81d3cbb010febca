import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from uwoam.channel import (ChannelSpec, SamplingWarning, TurbulenceSpec, apply_tilt, channel_loss_db,
                           make_screen, propagate_step, tilt_angles, transmit)
from uwoam.modes import GridSpec, LGModeSpec, lg_field, overlap, superpose, SuperpositionSpec

WL = 532e-9


def von_karman_phase_psd(kx, ky, cn2, l0, L0, dz, wl):
    # written out again here so the oracle does not share code with the generator
    k2 = kx * kx + ky * ky
    k = 2 * math.pi / wl
    return 2 * math.pi * k ** 2 * dz * 0.033 * cn2 * math.exp(-k2 * (l0 / 5.92) ** 2) / (k2 + L0 ** -2) ** (11 / 6)


def band_variance(grid, cn2, l0, L0, dz, wl):
    """Integral of the phase PSD over the grid's frequency band, minus the piston cell."""
    kmax = math.pi / grid.pitch
    h = math.pi / grid.extent  # half-width of one frequency cell
    f = lambda y, x: von_karman_phase_psd(x, y, cn2, l0, L0, dz, wl)
    total = 0.0
    # frame around the central cell, split into 4 rectangles
    for (x0, x1, y0, y1) in [(-kmax, -h, -kmax, kmax), (h, kmax, -kmax, kmax),
                             (-h, h, -kmax, -h), (-h, h, h, kmax)]:
        total += integrate.dblquad(f, x0, x1, y0, y1, epsabs=0, epsrel=1e-6)[0]
    return total


def test_channel_spec_validation():
    with pytest.raises(ValueError):
        TurbulenceSpec(cn2=-1)
    with pytest.raises(ValueError):
        TurbulenceSpec(inner_scale=2.0, outer_scale=1.0)
    with pytest.raises(ValueError):
        ChannelSpec(length=0)
    with pytest.raises(ValueError):
        ChannelSpec(extinction=-0.1)
    with pytest.raises(ValueError):
        ChannelSpec(tilt_rms=-1)


def test_loss_db():
    assert channel_loss_db(0.16, 55) == pytest.approx(10 * math.log10(math.exp(0.16 * 55)), rel=1e-12)
    assert channel_loss_db(0.0, 10) == 0.0
    with pytest.raises(ValueError):
        channel_loss_db(0.1, 0)


def test_screen_variance_matches_integrated_spectrum():
    g = GridSpec(128, 0.048)
    turb = TurbulenceSpec(cn2=1e-12, inner_scale=1e-3, outer_scale=1.0, seed=5)
    dz = 5.5
    expected = band_variance(g, turb.cn2, turb.inner_scale, turb.outer_scale, dz, WL)
    var = np.mean([make_screen(turb, g, dz, WL, i).phase.var() for i in range(400)])
    assert var / expected == pytest.approx(1.0, abs=0.08)


def test_structure_function_follows_kolmogorov_convention():
    # inertial-range check of the normalization; FFT screens without
    # sub-harmonics fall short at large separations, so the band is one-sided
    g = GridSpec(256, 1.0)
    turb = TurbulenceSpec(cn2=1e-13, outer_scale=1e3, inner_scale=1e-2, seed=3)
    dz = 10.0
    k = 2 * math.pi / WL
    r0 = (0.423 * k ** 2 * turb.cn2 * dz) ** (-3 / 5)
    d = np.mean([np.mean((p[:, 8:] - p[:, :-8]) ** 2)
                 for p in (make_screen(turb, g, dz, WL, i).phase for i in range(100))])
    ratio = d / (6.88 * (8 * g.pitch / r0) ** (5 / 3))
    assert 0.6 < ratio < 1.05


def test_screens_deterministic_and_independent(grid128):
    turb = TurbulenceSpec(cn2=1e-12, seed=9)
    a = make_screen(turb, grid128, 5.5, WL, 0).phase
    assert np.array_equal(a, make_screen(turb, grid128, 5.5, WL, 0).phase)
    assert abs(a.mean()) < 1e-12
    # the two halves of a pair, and screens from different seeds, are uncorrelated
    other = TurbulenceSpec(cn2=1e-12, seed=10)
    same, pair, seeds_ = [], [], []
    for i in range(0, 300, 2):
        x = make_screen(turb, grid128, 5.5, WL, i).phase
        pair.append(np.mean(x * make_screen(turb, grid128, 5.5, WL, i + 1).phase))
        seeds_.append(np.mean(x * make_screen(other, grid128, 5.5, WL, i).phase))
        same.append(np.mean(x * x))
    assert abs(np.mean(pair)) < 0.1 * np.mean(same)
    assert abs(np.mean(seeds_)) < 0.1 * np.mean(same)


def test_zero_cn2_screen_is_flat(grid128):
    assert not make_screen(TurbulenceSpec(cn2=0.0), grid128, 1.0, WL, 0).phase.any()


def test_sampling_warnings(grid128):
    with pytest.warns(SamplingWarning, match="inner scale"):
        make_screen(TurbulenceSpec(cn2=1e-13, inner_scale=1e-4), grid128, 1.0, WL, 0)
    f = lg_field(LGModeSpec(0, 0, 2e-3, WL), grid128)
    with pytest.warns(SamplingWarning, match="wrap-around"):
        propagate_step(f, 400.0, WL)


def test_propagation_is_unitary_and_reversible(grid256):
    f = superpose(SuperpositionSpec(2, 1.0), grid256, 2e-3, WL)
    g = propagate_step(f, 20.0, WL)
    assert g.norm2() == pytest.approx(1.0, abs=1e-12)
    back = propagate_step(g, 0.0, WL)
    assert back is g
    with pytest.raises(ValueError):
        propagate_step(f, -1.0, WL)


def test_steps_compose(grid256):
    f = lg_field(LGModeSpec(1, 0, 2e-3, WL), grid256)
    one = propagate_step(f, 40.0, WL)
    two = propagate_step(propagate_step(f, 15.0, WL), 25.0, WL)
    assert np.allclose(one.amplitude, two.amplitude, atol=1e-10 * np.abs(one.amplitude).max())


def test_transmit_without_turbulence_is_propagation_times_extinction(grid256):
    f = lg_field(LGModeSpec(1, 0, 2e-3, WL), grid256)
    ch = ChannelSpec(turbulence=TurbulenceSpec(cn2=0.0))
    out = transmit(f, ch)
    ref = propagate_step(f, 55.0, WL)
    assert np.allclose(out.amplitude, ref.amplitude * math.exp(-0.16 * 55 / 2))
    assert out.norm2() == pytest.approx(ch.transmittance, rel=1e-12)


def test_transmit_turbulent_conserves_power_and_is_seeded(grid256):
    f = lg_field(LGModeSpec(1, 0, 2e-3, WL), grid256)
    ch = ChannelSpec(extinction=0.0, turbulence=TurbulenceSpec(cn2=5e-13, seed=1))
    a = transmit(f, ch, 3)
    assert a.norm2() == pytest.approx(1.0, abs=1e-10)
    assert np.array_equal(a.amplitude, transmit(f, ch, 3).amplitude)
    b = transmit(f, ch, 4)
    assert not np.array_equal(a.amplitude, b.amplitude)
    # weak turbulence only mildly perturbs the mode
    ideal = propagate_step(f, 55.0, WL)
    assert abs(overlap(ideal, a)) ** 2 > 0.5


def test_tilt_moves_centroid_by_l_tan_theta(grid256):
    f = lg_field(LGModeSpec(0, 0, 2e-3, WL), grid256)
    tx, ty = 10e-6, -6e-6
    out = propagate_step(apply_tilt(f, tx, ty, WL), 55.0, WL)
    cx, cy = out.centroid()
    assert cx == pytest.approx(55 * math.tan(tx), rel=1e-3)
    assert cy == pytest.approx(55 * math.tan(ty), rel=1e-3)


def test_tilt_draws():
    ch = ChannelSpec(tilt_rms=1e-5)
    draws = np.array([tilt_angles(ch, s) for s in range(4000)])
    assert draws.std(axis=0) == pytest.approx([1e-5, 1e-5], rel=0.05)
    assert tilt_angles(ChannelSpec(), 0) == (0.0, 0.0)
    assert tilt_angles(ch, 7) == tilt_angles(ch, 7)


@settings(max_examples=15, deadline=None)
@given(dz=st.floats(0.1, 60.0), ell=st.integers(-3, 3))
def test_diffraction_preserves_norm(dz, ell):
    g = GridSpec(128, 0.032)
    f = lg_field(LGModeSpec(ell, 0, 2e-3, WL), g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SamplingWarning)
        assert propagate_step(f, dz, WL).norm2() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(c=st.floats(0.0, 1.0), length=st.floats(1.0, 100.0))
def test_extinction_is_beer_law(c, length):
    g = GridSpec(64, 0.03)
    f = lg_field(LGModeSpec(0, 0, 4e-3, WL), g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SamplingWarning)
        out = transmit(f, ChannelSpec(length=length, extinction=c, turbulence=TurbulenceSpec(cn2=0.0)))
    assert out.norm2() == pytest.approx(math.exp(-c * length), rel=1e-12)
