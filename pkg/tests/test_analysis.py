import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uwoam.analysis.fidelity import (DetectionError, crosstalk, crosstalk_ensemble, fidelity_series, recover,
                                     series_from_results)
from uwoam.analysis.petals import (OrientationResult, angle_deviation, orientation, segment_petals,
                                   theta_from_angle)
from uwoam.analysis.tables import (read_table, write_crosstalk, write_orientations, write_tip_tilt,
                                   write_trajectories)
from uwoam.analysis.tiptilt import frame_centroid, tilt_angle, tilt_rms_for_mean_radial, tip_tilt
from uwoam.analysis.tracking import track_cores
from uwoam.analysis.vortices import (VortexCore, core_separation, field_to_pixels, find_vortices_field,
                                     find_vortices_frame, pixels_to_field, plaquette_winding, total_charge)
from uwoam.detector import DetectorSpec, pixel_fractions
from uwoam.modes import ComplexField, GridSpec, LGModeSpec, SuperpositionSpec, lg_field, superpose

DET = DetectorSpec(pixels=256, pitch=1e-4)


def petal_image(ell, theta, grid):
    return 1e5 * pixel_fractions(superpose(SuperpositionSpec(ell, theta), grid, 2e-3, 532e-9), DET)


# ---------------------------------------------------------------- petals

@settings(max_examples=30, deadline=None)
@given(ell=st.integers(1, 3), theta=st.floats(0, 2 * math.pi, exclude_max=True))
def test_noiseless_phase_recovery(grid256, ell, theta):
    res = orientation(segment_petals(petal_image(ell, theta, grid256), ell))
    assert res.quality > 0.99
    assert angle_deviation(theta, res, ell) < 1.0
    assert math.cos((res.theta - theta) / 2) ** 2 > 0.999


def test_petal_count_and_rejection(grid256):
    img = petal_image(2, 0.4, grid256)
    petals = segment_petals(img, 2)
    assert petals.accepted and petals.found == 4 and petals.centroids.shape == (4, 2)
    blank = segment_petals(np.zeros((64, 64)), 1)
    assert not blank.accepted
    with pytest.raises(ValueError):
        orientation(blank)
    # a donut has one ring, not two petals
    donut = 1e5 * pixel_fractions(lg_field(LGModeSpec(1, 0, 2e-3), grid256), DET)
    assert recover(donut, 1) is None


def test_theta_from_angle_inverts_orientation():
    for ell in (1, 2, 3):
        for k in range(16):
            theta = k * math.pi / 8
            spec = SuperpositionSpec(ell, theta)
            assert theta_from_angle(spec.orientation, ell) == pytest.approx(theta % (2 * math.pi), abs=1e-12)


def test_angle_deviation_folds():
    r = OrientationResult(angle=math.radians(179), theta=0.0, quality=1.0, ell=1)
    assert angle_deviation(0.0, r, 1) == pytest.approx(1.0)
    r3 = OrientationResult(angle=math.radians(59.5), theta=0.0, quality=1.0, ell=3)
    assert angle_deviation(0.0, r3, 3) == pytest.approx(0.5)


# --------------------------------------------------------------- fidelity

def test_crosstalk_values():
    sent = [k * math.pi / 4 for k in range(8)]
    received = [OrientationResult(0, t, 1.0, 1) for t in sent]
    m = crosstalk(sent, received)
    assert np.allclose(m.diagonal, 1.0)
    assert m.values[0, 4] == pytest.approx(0.0, abs=1e-15)
    assert m.values[0, 1] == pytest.approx(math.cos(math.pi / 8) ** 2)
    with pytest.raises(ValueError):
        crosstalk([], received)


def test_crosstalk_ensemble_averages_rows():
    sent = [0.0, math.pi]
    rows = [[OrientationResult(0, 0.1, 1, 1), OrientationResult(0, -0.1 % (2 * math.pi), 1, 1)],
            [OrientationResult(0, math.pi, 1, 1)]]
    m = crosstalk_ensemble(sent, rows)
    assert m.values[0, 0] == pytest.approx(math.cos(0.05) ** 2)
    assert m.received_phases[0] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        crosstalk_ensemble(sent, [rows[0], []])


def test_fidelity_series_gaps(grid256):
    spec = SuperpositionSpec(1, 1.0)
    good = petal_image(1, 1.0, grid256)
    s = fidelity_series([good, np.zeros_like(good), good], spec)
    assert s.failures == 1 and np.isnan(s.fidelity[1])
    assert s.mean > 0.999 and s.std < 1e-6
    with pytest.raises(DetectionError):
        fidelity_series([np.zeros_like(good)] * 2, spec)
    with pytest.raises(ValueError):
        series_from_results([], spec)


# ---------------------------------------------------------------- vortices

@pytest.mark.parametrize("ell", [-3, -2, -1, 1, 2, 3])
def test_degenerate_core_charge(grid256, ell):
    f = lg_field(LGModeSpec(ell, 0, 2e-3), grid256)
    cores = find_vortices_field(f)
    assert total_charge(cores) == ell
    assert plaquette_winding(f.amplitude).sum() == ell


def test_gaussian_has_no_vortex(grid256):
    assert find_vortices_field(lg_field(LGModeSpec(0, 0, 2e-3), grid256)) == []


def test_split_cores_are_found_at_their_positions(grid256):
    # product of three displaced unit vortices under a Gaussian envelope
    x, y = grid256.coords()
    sites = [(1e-3, 0.0), (-0.5e-3, 0.8e-3), (-0.5e-3, -0.8e-3)]
    amp = np.exp(-(x ** 2 + y ** 2) / (3e-3) ** 2).astype(complex)
    for sx, sy in sites:
        amp = amp * ((x - sx) + 1j * (y - sy))
    cores = find_vortices_field(ComplexField(grid256, amp), aperture_radius=4e-3, center=(0.0, 0.0))
    assert len(cores) == 3 and all(c.charge == 1 for c in cores)
    found = sorted(pixels_to_field(c.position, grid256.pitch, grid256.n) for c in cores)
    for (fx, fy), (sx, sy) in zip(found, sorted(sites)):
        assert math.hypot(fx - sx, fy - sy) < grid256.pitch


def test_opposite_charges_and_aperture(grid256):
    x, y = grid256.coords()
    amp = np.exp(-(x ** 2 + y ** 2) / (4e-3) ** 2) * ((x - 1e-3) + 1j * y) * ((x + 1e-3) - 1j * y)
    f = ComplexField(grid256, amp)
    cores = find_vortices_field(f, aperture_radius=3e-3, center=(0.0, 0.0))
    assert sorted(c.charge for c in cores) == [-1, 1]
    assert find_vortices_field(f, aperture_radius=0.5e-3, center=(0.0, 0.0)) == []


def test_frame_vortices_on_clean_image(grid256):
    x, y = grid256.coords()
    amp = np.exp(-(x ** 2 + y ** 2) / (3e-3) ** 2).astype(complex)
    for sx, sy in [(1.2e-3, 0.0), (-0.6e-3, 1.0e-3), (-0.6e-3, -1.0e-3)]:
        amp = amp * ((x - sx) + 1j * (y - sy))
    img = 1e7 * pixel_fractions(ComplexField(grid256, amp), DET)
    cores = find_vortices_frame(img)
    assert len(cores) == 3 and not any(c.signed for c in cores)
    assert core_separation(cores) == pytest.approx(math.hypot(1.8e-3, 1.0e-3) / DET.pitch, rel=0.1)


def test_pixel_field_conversion_round_trip():
    p = field_to_pixels((1.3e-3, -2e-4), 1e-4, 256)
    assert pixels_to_field(p, 1e-4, 256) == pytest.approx((1.3e-3, -2e-4))
    assert core_separation([VortexCore((0, 0), 1)]) == math.inf


# ---------------------------------------------------------------- tracking

def brute_force_assignment(prev, cur):
    best, best_cost = None, math.inf
    for perm in itertools.permutations(range(len(cur)), len(prev)):
        cost = sum((prev[i][0] - cur[j][0]) ** 2 + (prev[i][1] - cur[j][1]) ** 2 for i, j in enumerate(perm))
        if cost < best_cost:
            best, best_cost = perm, cost
    return best


@settings(max_examples=40, deadline=None)
@given(pts=st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100)), min_size=2, max_size=5, unique=True),
       jitter=st.lists(st.tuples(st.floats(-20, 20), st.floats(-20, 20)), min_size=5, max_size=5),
       order=st.permutations(range(5)))
def test_tracking_matches_brute_force(pts, jitter, order):
    n = len(pts)
    nxt = [(pts[i][0] + jitter[i][0], pts[i][1] + jitter[i][1]) for i in range(n)]
    shuffled = [nxt[i] for i in order if i < n]
    tracks = track_cores([[VortexCore(p, 1, 0) for p in pts], [VortexCore(p, 1, 1) for p in shuffled]])
    perm = brute_force_assignment(pts, shuffled)
    cost = lambda pairs: sum((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 for a, b in pairs)
    got = [(traj[0][1:], traj[1][1:]) for traj in tracks.trajectories.values()]
    want = [(pts[i], shuffled[j]) for i, j in enumerate(perm)]
    assert len(got) == n
    assert cost(got) == pytest.approx(cost(want), rel=1e-9, abs=1e-9)


def test_tracking_rigid_motion_keeps_distances():
    base = np.array([(0.0, 0.0), (5.0, 0.0), (0.0, 7.0)])
    frames = [[VortexCore(tuple(p + (k, 2 * k)), 1, k) for p in base] for k in range(6)]
    tracks = track_cores(frames)
    assert len(tracks.trajectories) == 3 and tracks.discontinuities == []
    assert tracks.distance_std() == pytest.approx(0.0, abs=1e-12)
    assert tracks.wander_std() > 1.0


def test_tracking_count_change_is_recorded():
    f0 = [VortexCore((0, 0), 1, 0), VortexCore((10, 0), 1, 0)]
    f1 = [VortexCore((0, 1), 1, 1), VortexCore((10, 1), 1, 1), VortexCore((5, 5), -1, 1)]
    tracks = track_cores([f0, f1])
    assert tracks.discontinuities == [1]
    assert len(tracks.trajectories) == 3


# ---------------------------------------------------------------- tip-tilt

def test_tilt_angle_oracle():
    assert tilt_angle(0.64e-3, 55) * 1e6 == pytest.approx(11.636, abs=0.001)


def test_tip_tilt_estimator():
    rng = np.random.default_rng(0)
    sigma = 0.5e-3
    pos = rng.normal(0, sigma, size=(20000, 2)) + [3e-3, -1e-3]
    tt = tip_tilt(pos, 55.0)
    assert tt.theta_x_rms == pytest.approx(math.atan(sigma / 55), rel=0.02)
    assert tt.mean_radial == pytest.approx(sigma * math.sqrt(math.pi / 2), rel=0.02)
    assert tilt_rms_for_mean_radial(tt.mean_radial, 55) == pytest.approx(math.atan(sigma / 55), rel=0.02)
    with pytest.raises(ValueError):
        tip_tilt([(0, 0)], 55)


def test_frame_centroid():
    img = np.zeros((64, 64))
    img[40, 20] = 10
    img += 0.5
    x, y = frame_centroid(img, 1e-4, background=0.5)
    assert (x, y) == pytest.approx(((20 - 32) * 1e-4, (40 - 32) * 1e-4))
    with pytest.raises(ValueError):
        frame_centroid(np.zeros((8, 8)), 1e-4)


# ---------------------------------------------------------------- tables

def test_tables_round_trip(tmp_path, grid256):
    spec = SuperpositionSpec(1, 0.5)
    img = petal_image(1, 0.5, grid256)
    s = fidelity_series([img, np.zeros_like(img)], spec)
    write_orientations(tmp_path / "o.csv", s)
    rows = read_table(tmp_path / "o.csv")
    assert list(rows[0]) == ["frame", "angle_deg", "theta_deg", "quality", "fidelity"]
    assert float(rows[0]["fidelity"]) == pytest.approx(s.fidelity[0], abs=1e-6)
    assert rows[1]["fidelity"] == ""

    m = crosstalk([0.0, math.pi], [OrientationResult(0, 0.0, 1, 1), OrientationResult(0, math.pi, 1, 1)])
    write_crosstalk(tmp_path / "x.csv", m)
    rows = read_table(tmp_path / "x.csv")
    assert list(rows[0]) == ["received_theta_deg", "sent_0.000", "sent_180.000"]

    tracks = track_cores([[VortexCore((1.0, 2.0), 1, 0)], [VortexCore((1.5, 2.0), 1, 1)]])
    write_trajectories(tmp_path / "t.csv", tracks)
    assert [r["x"] for r in read_table(tmp_path / "t.csv")] == ["1.000000", "1.500000"]

    write_tip_tilt(tmp_path / "tt.csv", tip_tilt([(0, 0), (1e-3, 0)], 55.0), 55.0)
    assert read_table(tmp_path / "tt.csv")[0] == {"quantity": "length_m", "value": "55.000000"}
