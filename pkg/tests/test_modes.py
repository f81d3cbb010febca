import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uwoam.channel import propagate_step
from uwoam.modes import (ComplexField, GridMismatchError, GridSpec, LGModeSpec, SamplingError,
                         SuperpositionSpec, analytic_fidelity, check_sampling, expected_orientation,
                         lg_field, overlap, superpose, winding_number)

WL = 532e-9
W0 = 2e-3


def gaussian_width(w0, wl, z):
    # textbook Gaussian beam, written out independently of LGModeSpec
    zr = math.pi * w0 ** 2 / wl
    return w0 * math.sqrt(1 + (z / zr) ** 2)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(100, 0.01)
    with pytest.raises(ValueError):
        GridSpec(32, 0.01)
    with pytest.raises(ValueError):
        GridSpec(64, 0.0)
    g = GridSpec(64, 0.0064)
    assert g.pitch == pytest.approx(1e-4)
    x, y = g.coords()
    assert x[0, 32] == 0 and y[32, 0] == 0


def test_sampling_errors(grid128):
    with pytest.raises(SamplingError):
        check_sampling(LGModeSpec(0, 0, 8 * grid128.pitch * 0.9, WL), grid128)
    with pytest.raises(SamplingError, match="extent"):
        lg_field(LGModeSpec(3, 0, 2e-3, WL), GridSpec(128, 0.02))
    check_sampling(LGModeSpec(1, 0, 2e-3, WL), GridSpec(256, 0.048))


def test_field_is_read_only_and_finite(grid128):
    a = np.ones((128, 128), complex)
    f = ComplexField(grid128, a)
    a[0, 0] = 5
    assert f.amplitude[0, 0] == 1
    with pytest.raises(ValueError):
        f.amplitude[0, 0] = 2
    bad = np.ones((128, 128), complex)
    bad[3, 3] = np.nan
    with pytest.raises(ValueError):
        ComplexField(grid128, bad)
    with pytest.raises(ValueError):
        ComplexField(grid128, np.ones((64, 64)))


@pytest.mark.parametrize("ell", [-3, -1, 0, 1, 2, 3])
def test_lg_norm_and_winding(grid256, ell):
    f = lg_field(LGModeSpec(ell, 0, W0, WL), grid256)
    assert f.norm2() == pytest.approx(1.0, abs=1e-12)
    assert winding_number(f, 2e-3) == ell
    # phase increases counter-clockwise for positive l
    i = grid256.n // 2
    j = i + 10
    ph_x = np.angle(f.amplitude[i, j])  # +x axis
    ph_y = np.angle(f.amplitude[j, i])  # +y axis
    assert (ph_y - ph_x - ell * math.pi / 2 + math.pi) % (2 * math.pi) - math.pi == pytest.approx(0, abs=1e-9)


@pytest.mark.parametrize("z", [0.0, 20.0, 55.0])
@pytest.mark.parametrize("ell", [0, 1, 3])
def test_second_moment_radius_matches_gaussian_optics(ell, z):
    g = GridSpec(256, 0.064)
    f = lg_field(LGModeSpec(ell, 0, W0, WL), g, z)
    # <r^2> of LG_0^l is (|l|+1) w^2 / 2
    expected = gaussian_width(W0, WL, z) * math.sqrt(abs(ell) + 1)
    assert f.beam_radius() == pytest.approx(expected, rel=2e-3)


@pytest.mark.parametrize("ell", [0, 2])
def test_analytic_propagation_agrees_with_angular_spectrum(ell):
    g = GridSpec(256, 0.064)
    mode = LGModeSpec(ell, 0, W0, WL)
    numeric = propagate_step(lg_field(mode, g), 30.0, WL)
    analytic = lg_field(mode, g, 30.0)
    assert abs(overlap(analytic, numeric)) ** 2 == pytest.approx(1.0, abs=1e-6)
    # the global (Gouy) phase must agree too, not just the shape
    assert np.angle(overlap(analytic, numeric)) == pytest.approx(0.0, abs=2e-3)


def test_lg_modes_orthogonal(grid256):
    fields = {ell: lg_field(LGModeSpec(ell, 0, W0, WL), grid256) for ell in range(-3, 4)}
    for a in fields:
        for b in fields:
            v = abs(overlap(fields[a], fields[b]))
            assert v == pytest.approx(1.0 if a == b else 0.0, abs=1e-9)


def test_overlap_grid_mismatch(grid128, grid256):
    a = lg_field(LGModeSpec(0, 0, 2e-3, WL), grid128)
    b = lg_field(LGModeSpec(0, 0, 2e-3, WL), grid256)
    with pytest.raises(GridMismatchError):
        overlap(a, b)


def test_superposition_validation():
    with pytest.raises(ValueError):
        SuperpositionSpec(0)
    with pytest.raises(ValueError):
        SuperpositionSpec(1, weight=1.5)
    with pytest.raises(ValueError):
        SuperpositionSpec(1, theta=math.inf)
    assert SuperpositionSpec(1, 5 * math.pi).theta == pytest.approx(math.pi)


def test_petal_orientation_convention(grid256):
    # intensity ~ 1 + cos(2 l phi + theta): its 2l-th angular harmonic has phase -theta
    spec = SuperpositionSpec(2, math.pi / 3)
    f = superpose(spec, grid256, W0, WL)
    _, phi = grid256.polar()
    harmonic = (f.intensity * np.exp(1j * 4 * phi)).sum()
    peak = (np.angle(harmonic) / 4) % (math.pi / 2)
    assert peak == pytest.approx(spec.orientation, abs=1e-5)


def test_expected_orientation_range():
    assert expected_orientation(0.0, 1) == 0.0
    assert expected_orientation(math.pi / 2, 1) == pytest.approx(3 * math.pi / 4)
    assert expected_orientation(math.pi / 2, -1) == pytest.approx(3 * math.pi / 4)


@settings(max_examples=25, deadline=None)
@given(ell=st.integers(1, 3), ta=st.floats(0, 2 * math.pi), tb=st.floats(0, 2 * math.pi))
def test_overlap_equals_cos2(ell, ta, tb):
    g = GridSpec(128, 0.03)
    a = superpose(SuperpositionSpec(ell, ta), g, W0, WL)
    b = superpose(SuperpositionSpec(ell, tb), g, W0, WL)
    fid = abs(overlap(a, b)) ** 2
    assert 0 <= fid <= 1 + 1e-12
    assert fid == pytest.approx(analytic_fidelity(ta, tb), abs=1e-6)
    assert fid == pytest.approx(abs(overlap(b, a)) ** 2, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(ell=st.integers(1, 3), theta=st.floats(0, 2 * math.pi), weight=st.floats(0, 1))
def test_superposition_unit_norm(ell, theta, weight):
    g = GridSpec(128, 0.03)
    f = superpose(SuperpositionSpec(ell, theta, weight), g, W0, WL)
    assert f.norm2() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(factor=st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_scaling_is_quadratic_in_power(factor):
    g = GridSpec(64, 0.016)
    f = lg_field(LGModeSpec(0, 0, W0, WL), g)
    assert f.scaled(factor).norm2() == pytest.approx(abs(factor) ** 2, rel=1e-12)
    assert f.scaled(factor).normalized().norm2() == pytest.approx(1.0, rel=1e-12)
