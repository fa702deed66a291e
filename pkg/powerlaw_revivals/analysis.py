"""Recurrence detection on autocorrelation signals and comparison with predictions."""

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        """Backport of enum.StrEnum."""

        def __str__(self) -> str:
            return str(self.value)

import csv
from dataclasses import dataclass, field
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, TextIO, Union

import numpy as np
from numpy.typing import NDArray
from scipy.ndimage import maximum_filter1d
from scipy.signal import find_peaks

from .const import (
    COLLAPSE_LEVEL,
    DEGENERATE_FLATNESS,
    FULL_RECONSTRUCTION,
    HALF_REVIVAL_RATIO,
    MIN_PERIODS_IN_RUN,
    MIN_SAMPLES_PER_PERIOD,
    PEAK_PROMINENCE,
    PEAK_TIE_TOL,
    REVIVAL_RUN_FACTOR,
    REVIVAL_SEARCH_START,
    REVIVAL_WINDOW,
    WEAK_REVIVAL_THRESHOLD,
)
from .exceptions import DomainError, GridMismatchError
from .formatting import csv_cell, encode_mapping
from .quantum import WaveState
from .recurrence import driven_times, undriven_times
from .resonance import DriveSpec
from .spectrum import SpectrumModel

_LOGGER = logging.getLogger(__name__)

AUTOCORRELATION_COLUMNS = ("t", "ReA", "ImA", "abs2A")


class DetectionStatus(StrEnum):
    """Outcome of a recurrence search."""

    FOUND = "found"
    NO_RECURRENCE = "no_recurrence"
    WEAK = "weak"
    DEGENERATE = "degenerate"


@dataclass
class Autocorrelation:
    """Class for holding A(t) = <psi(0)|psi(t)> on the sampled times."""

    times: NDArray[np.float64]
    values: NDArray[np.complex128]
    norms: NDArray[np.float64]
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def intensity(self) -> NDArray[np.float64]:
        """|A(t)|^2."""
        return np.abs(self.values) ** 2

    @property
    def sampling_interval(self) -> float:
        return float(np.median(np.diff(self.times)))

    @classmethod
    def from_intensity(
        cls, times: Iterable[float], intensity: Iterable[float], **metadata: Any
    ) -> "Autocorrelation":
        """Build a real-valued signal with the given |A|^2 (synthetic checks)."""
        times = np.asarray(list(times), dtype=float)
        values = np.sqrt(np.asarray(list(intensity), dtype=float)).astype(complex)
        return cls(times=times, values=values, norms=np.ones_like(times), metadata=metadata)


@dataclass
class Detection:
    """Class for holding a detected recurrence time."""

    time: float
    uncertainty: float
    status: DetectionStatus
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def usable(self) -> bool:
        return self.status in (DetectionStatus.FOUND, DetectionStatus.WEAK)


@dataclass
class RecurrenceReport:
    """Class for holding detected and predicted recurrence times."""

    T_cl_detected: float
    T_cl_uncertainty: float
    T_Q_detected: float
    T_Q_uncertainty: float
    T_cl_predicted: float
    T_Q_predicted: float
    relative_errors: Dict[str, Optional[float]]
    status: Dict[str, str]
    detection_diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_flat_dict(self) -> Dict[str, Any]:
        """Flatten nested fields into dotted keys with JSON-safe values."""
        flat: Dict[str, Any] = {
            "T_cl_detected": self.T_cl_detected,
            "T_cl_uncertainty": self.T_cl_uncertainty,
            "T_Q_detected": self.T_Q_detected,
            "T_Q_uncertainty": self.T_Q_uncertainty,
            "T_cl_predicted": self.T_cl_predicted,
            "T_Q_predicted": self.T_Q_predicted,
        }
        for name, value in self.relative_errors.items():
            flat[f"relative_error.{name}"] = value
        for name, value in self.status.items():
            flat[f"status.{name}"] = value
        for name, value in self.detection_diagnostics.items():
            flat[f"diagnostics.{name}"] = value
        return encode_mapping(flat)


def autocorrelate(
    trajectory: Iterable[WaveState], metadata: Optional[Dict[str, Any]] = None
) -> Autocorrelation:
    """Overlap of every state in the trajectory with the first one.

    Raises:
        DomainError: If the trajectory is empty
        GridMismatchError: If a state lives on another grid
    """
    iterator = iter(trajectory)
    initial = next(iterator, None)
    if initial is None:
        raise DomainError("trajectory must include the initial state")
    grid = initial.grid
    reference = initial.psi.copy()

    times: List[float] = [initial.t]
    values: List[complex] = [grid.inner(reference, initial.psi)]
    norms: List[float] = [initial.norm]
    for state in iterator:
        if state.grid != grid:
            raise GridMismatchError("trajectory changes grid", t=state.t)
        times.append(state.t)
        values.append(grid.inner(reference, state.psi))
        norms.append(state.norm)
    return Autocorrelation(
        times=np.asarray(times),
        values=np.asarray(values),
        norms=np.asarray(norms),
        metadata=dict(metadata or {}),
    )


def _refine_peak(
    times: NDArray[np.float64], signal: NDArray[np.float64], index: int
) -> float:
    # vertex of the parabola through the three samples around the peak
    if index == 0 or index == len(signal) - 1:
        return float(times[index])
    left, centre, right = signal[index - 1 : index + 2]
    curvature = left - 2.0 * centre + right
    if curvature == 0:
        return float(times[index])
    step = 0.5 * (times[index + 1] - times[index - 1])
    return float(times[index] + 0.5 * step * (left - right) / curvature)


def detect_classical_period(
    ac: Autocorrelation, prominence: float = PEAK_PROMINENCE
) -> Detection:
    """First prominent maximum of |A(t)|^2 after t = 0."""
    intensity = ac.intensity
    dt = ac.sampling_interval
    peaks, properties = find_peaks(intensity, prominence=prominence)
    peaks = peaks[ac.times[peaks] > ac.times[0]]
    if not len(peaks):
        _LOGGER.info("No classical recurrence above prominence %s", prominence)
        return Detection(
            time=math.nan,
            uncertainty=dt,
            status=DetectionStatus.NO_RECURRENCE,
            diagnostics={"prominence_threshold": prominence},
        )

    index = int(peaks[0])
    period = _refine_peak(ac.times, intensity, index)
    diagnostics: Dict[str, Any] = {
        "peak_height": float(intensity[index]),
        "peak_count": int(len(peaks)),
    }
    run_length = ac.times[-1] - ac.times[0]
    if run_length < MIN_PERIODS_IN_RUN * period:
        _LOGGER.warning(
            "Run covers %.2f periods, fewer than %d", run_length / period, MIN_PERIODS_IN_RUN
        )
        diagnostics["short_run"] = True
    if period / dt < MIN_SAMPLES_PER_PERIOD:
        _LOGGER.warning("Only %.1f samples per period", period / dt)
        diagnostics["coarse_sampling"] = True
    return Detection(
        time=period, uncertainty=dt, status=DetectionStatus.FOUND, diagnostics=diagnostics
    )


def _envelope(intensity: NDArray[np.float64], window: int) -> NDArray[np.float64]:
    return maximum_filter1d(intensity, size=max(window, 1), mode="nearest")


def _highest_sample(
    times: NDArray[np.float64],
    intensity: NDArray[np.float64],
    centre: int,
    window: int,
) -> tuple[int, float]:
    lo, hi = max(centre - window, 0), min(centre + window + 1, len(intensity))
    index = lo + int(np.argmax(intensity[lo:hi]))
    return index, _refine_peak(times, intensity, index)


def _fractional_peaks(
    times: NDArray[np.float64],
    envelope: NDArray[np.float64],
    start: int,
    stop: int,
    window: int,
) -> List[float]:
    peaks, _ = find_peaks(envelope[start:stop], prominence=PEAK_PROMINENCE, distance=window)
    return [float(times[start + index]) for index in peaks]


def detect_revival(
    ac: Autocorrelation,
    T_cl_hint: float,
    search_start: float = REVIVAL_SEARCH_START,
    window_periods: float = REVIVAL_WINDOW,
) -> Detection:
    """Location of the global maximum of the sliding-window envelope of |A|^2.

    The search starts at search_start classical periods, or after the initial
    collapse of the envelope when that comes later. Near-equal maxima resolve to
    the earliest one. When a candidate that is not a full reconstruction has a
    peak at twice its time at least half as high, it is a half revival and the
    later peak is reported instead.
    """
    if not T_cl_hint > 0:
        raise DomainError("classical period hint must be positive", T_cl_hint=T_cl_hint)
    intensity = ac.intensity
    times = ac.times
    dt = ac.sampling_interval
    window = max(int(round(window_periods * T_cl_hint / dt)), 1)
    uncertainty = window * dt
    envelope = _envelope(intensity, window)

    start = int(np.searchsorted(times, times[0] + search_start * T_cl_hint))
    if intensity[0] >= COLLAPSE_LEVEL:
        # skip the initial collapse so early classical peaks do not compete
        collapsed = np.nonzero(envelope < COLLAPSE_LEVEL * envelope[0])[0]
        if collapsed.size:
            start = max(start, int(collapsed[0]))
    if start >= len(times) - 2:
        _LOGGER.warning("Run ends before the revival search window opens")
        return Detection(
            time=math.nan,
            uncertainty=uncertainty,
            status=DetectionStatus.NO_RECURRENCE,
            diagnostics={"search_start": float(times[0] + search_start * T_cl_hint)},
        )

    region = envelope[start:]
    diagnostics: Dict[str, Any] = {
        "envelope_max": float(region.max()),
        "envelope_min": float(region.min()),
        "window": uncertainty,
    }
    if region.min() >= DEGENERATE_FLATNESS * region.max():
        # every classical period is a full reconstruction
        classical = detect_classical_period(ac)
        return Detection(
            time=classical.time,
            uncertainty=classical.uncertainty,
            status=DetectionStatus.DEGENERATE,
            diagnostics=diagnostics,
        )

    leading = int(np.argmax(region >= (1.0 - PEAK_TIE_TOL) * region.max()))
    index, candidate = _highest_sample(times, intensity, start + leading, window)
    later = int(np.searchsorted(times, 2.0 * candidate - times[0]))
    if later < len(times) and intensity[index] < FULL_RECONSTRUCTION:
        later_index, later_candidate = _highest_sample(times, intensity, later, window)
        if intensity[later_index] >= HALF_REVIVAL_RATIO * intensity[index]:
            diagnostics["half_revival"] = candidate
            index, candidate = later_index, later_candidate

    height = float(intensity[index])
    diagnostics["revival_height"] = height
    diagnostics["fractional_revivals"] = _fractional_peaks(
        times, envelope, start, index, window
    )
    status = DetectionStatus.FOUND
    if height < WEAK_REVIVAL_THRESHOLD:
        _LOGGER.info("Revival envelope peaks at %.3f only", height)
        status = DetectionStatus.WEAK
    if times[-1] - times[0] < REVIVAL_RUN_FACTOR * (candidate - times[0]):
        diagnostics["short_run"] = True
    return Detection(
        time=candidate, uncertainty=uncertainty, status=status, diagnostics=diagnostics
    )


def _relative_error(detection: Detection, predicted: float) -> Optional[float]:
    if not detection.usable or not math.isfinite(predicted) or predicted == 0:
        return None
    return abs(detection.time - predicted) / abs(predicted)


def _comparison_status(detection: Detection, predicted: float) -> str:
    if not math.isfinite(predicted):
        return "skipped: infinite prediction"
    return detection.status.value


def compare(
    classical: Detection,
    revival: Detection,
    spectrum: SpectrumModel,
    drive: DriveSpec,
) -> RecurrenceReport:
    """Report detections next to the closed-form predictions.

    Driven runs are observed in the lab frame, so the classical prediction is
    (1 - M0_cl) T0_cl; the rotating-frame period Tlam_cl goes to diagnostics.
    """
    diagnostics: Dict[str, Any] = {
        "classical_status": classical.status.value,
        "revival_status": revival.status.value,
    }
    diagnostics.update({f"classical.{k}": v for k, v in classical.diagnostics.items()})
    diagnostics.update({f"revival.{k}": v for k, v in revival.diagnostics.items()})

    if drive.lam == 0:
        predicted_cl, predicted_q = undriven_times(spectrum)
    else:
        times = driven_times(spectrum, drive)
        predicted_cl = (1.0 - times.M0_cl) * times.T0_cl
        predicted_q = times.Tlam_Q
        diagnostics.update(
            {
                "T_cl_rotating": times.Tlam_cl,
                "shift_sign_cl": int(np.sign(abs(times.Tlam_cl) - abs(times.T0_cl * times.Delta))),
                "shift_sign_Q": int(np.sign(times.Tlam_Q - times.T0_Q)),
                "frame": "lab-frame autocorrelation; rotating-frame period reported separately",
            }
        )

    report = RecurrenceReport(
        T_cl_detected=classical.time,
        T_cl_uncertainty=classical.uncertainty,
        T_Q_detected=revival.time,
        T_Q_uncertainty=revival.uncertainty,
        T_cl_predicted=predicted_cl,
        T_Q_predicted=predicted_q,
        relative_errors={
            "T_cl": _relative_error(classical, predicted_cl),
            "T_Q": _relative_error(revival, predicted_q),
        },
        status={
            "T_cl": _comparison_status(classical, predicted_cl),
            "T_Q": _comparison_status(revival, predicted_q),
        },
        detection_diagnostics=diagnostics,
    )
    _LOGGER.info(
        "T_cl detected %s predicted %s; T_Q detected %s predicted %s",
        report.T_cl_detected,
        report.T_cl_predicted,
        report.T_Q_detected,
        report.T_Q_predicted,
    )
    return report


def write_autocorrelation_csv(
    ac: Autocorrelation, target: Union[str, Path, TextIO], include_norm: bool = False
) -> None:
    """Write columns t, ReA, ImA, abs2A (and norm) with round-trip floats."""
    header = list(AUTOCORRELATION_COLUMNS) + (["norm"] if include_norm else [])
    rows = zip(ac.times, ac.values.real, ac.values.imag, ac.intensity, ac.norms)

    def _write(stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for t, real, imag, intensity, norm in rows:
            cells = [t, real, imag, intensity] + ([norm] if include_norm else [])
            writer.writerow([csv_cell(cell) for cell in cells])

    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as stream:
            _write(stream)
    else:
        _write(target)
