"""Frozen calibration constants (see ``uwoam.runner.calibrate`` for how they were obtained)."""

# Refractive-index structure constant, m^(-2/3).  Chosen so that an l=1
# superposition on the default grid, detector and classical flux shows a
# 1.0% frame-to-frame fidelity std.
CALIBRATED_CN2 = 5.3e-13

# Weak turbulence for vortex statistics: one decade below CALIBRATED_CN2.
WEAK_CN2 = 5.3e-14

# Per-axis launch pointing jitter, rad, chosen so that together with the
# turbulence-induced wander the received beam centroid moves 0.64 mm on
# average.
CALIBRATED_TILT_RMS = 4.85e-6

# Source power giving ~3e5 detected photons per exposure, well above the
# ~3e4 needed for reliable petal segmentation.
CLASSICAL_POWER = 1e-7

# Launch jitter giving the same 0.64 mm mean radial wander under WEAK_CN2.
WEAK_TILT_RMS = 8.94e-6
