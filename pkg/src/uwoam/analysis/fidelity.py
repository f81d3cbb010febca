"""Fidelities from recovered phases: cross-talk matrices and time series."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..modes import SuperpositionSpec, analytic_fidelity
from .petals import OrientationResult, orientation, segment_petals


class DetectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class CrosstalkMatrix:
    sent_phases: tuple[float, ...]
    received_phases: tuple[float, ...]
    values: np.ndarray  # [received, sent]

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.values)


def crosstalk(sent_phases: Sequence[float], received: Sequence[OrientationResult]) -> CrosstalkMatrix:
    """values[i][j] = cos^2((sent_j - received_i)/2)."""
    if not sent_phases or not received:
        raise ValueError("need at least one sent and one received state")
    rx = [r.theta for r in received]
    values = np.array([[analytic_fidelity(s, t) for s in sent_phases] for t in rx])
    return CrosstalkMatrix(tuple(sent_phases), tuple(rx), values)


def crosstalk_ensemble(sent_phases: Sequence[float],
                       received: Sequence[Sequence[OrientationResult]]) -> CrosstalkMatrix:
    """Frame-averaged cross-talk: row i is the mean projection over state i's frames.

    ``received_phases`` holds the circular mean of each row's recovered phases.
    """
    rows, means = [], []
    for results in received:
        if not results:
            raise ValueError("a received state has no usable frames")
        m = crosstalk(sent_phases, results).values
        rows.append(m.mean(axis=0))
        means.append(float(np.angle(np.mean(np.exp(1j * np.array([r.theta for r in results])))) % (2 * math.pi)))
    return CrosstalkMatrix(tuple(sent_phases), tuple(means), np.array(rows))


@dataclass(frozen=True)
class FidelitySeries:
    fidelity: np.ndarray  # NaN where detection failed
    results: tuple  # OrientationResult or None per frame
    failures: int

    @property
    def valid(self) -> np.ndarray:
        return self.fidelity[~np.isnan(self.fidelity)]

    @property
    def mean(self) -> float:
        return float(self.valid.mean())

    @property
    def std(self) -> float:
        return float(self.valid.std())

    @property
    def min(self) -> float:
        return float(self.valid.min())

    @property
    def max(self) -> float:
        return float(self.valid.max())


def recover(frame, ell: int, threshold_fraction: float = 0.5,
            smoothing_passes: int = 2) -> OrientationResult | None:
    """Orientation of one frame, or None if the petals are missing or ambiguous."""
    petals = segment_petals(frame, abs(ell), threshold_fraction, smoothing_passes)
    if not petals.accepted:
        return None
    result = orientation(petals)
    return None if result.low_confidence else result


def series_from_results(results: Sequence[OrientationResult | None], sent: SuperpositionSpec) -> FidelitySeries:
    """Fidelity against the sent phase; None entries are gaps (NaN, counted)."""
    if not len(results):
        raise ValueError("a fidelity series needs at least one frame")
    fidelity = np.array([math.nan if r is None else analytic_fidelity(sent.theta, r.theta) for r in results])
    failures = int(np.isnan(fidelity).sum())
    if failures == len(results):
        raise DetectionError(f"petal detection failed on all {len(results)} frames")
    return FidelitySeries(fidelity, tuple(results), failures)


def fidelity_series(frames: Sequence, sent: SuperpositionSpec, threshold_fraction: float = 0.5,
                    smoothing_passes: int = 2) -> FidelitySeries:
    """Per-frame segment -> orient -> cos^2 against the sent phase.

    Frames whose petals cannot be found, or whose orientation is flagged
    low-confidence, are gaps: recorded as NaN and counted, not averaged.
    """
    return series_from_results([recover(f, sent.ell, threshold_fraction, smoothing_passes) for f in frames], sent)
