"""Test recurrence detection and the comparison report."""

import io
import json
import math

import numpy as np
import pytest

from powerlaw_revivals.analysis import (
    Autocorrelation,
    Detection,
    DetectionStatus,
    autocorrelate,
    compare,
    detect_classical_period,
    detect_revival,
    write_autocorrelation_csv,
)
from powerlaw_revivals.exceptions import DomainError
from powerlaw_revivals.quantum import (
    auto_grid,
    build_wavepacket,
    evolve_in_basis,
    propagate,
    solve_eigen,
)
from powerlaw_revivals.recurrence import undriven_times
from powerlaw_revivals.resonance import DriveSpec
from powerlaw_revivals.spectrum import build_spectrum_model

TIMES = np.arange(0.0, 60.0, 0.01)


def _packet_signal(*revivals, times=TIMES):
    """Classical peaks at integer times under Gaussian envelopes (centre, height)."""
    envelope = np.exp(-((times / 4.0) ** 2))
    for centre, height in revivals:
        envelope += height * np.exp(-(((times - centre) / 4.0) ** 2))
    return Autocorrelation.from_intensity(times, np.cos(math.pi * times) ** 2 * envelope)


def test_classical_period_of_periodic_signal():
    """Test the first prominent maximum."""
    times = np.arange(0.0, 50.0, 0.01)
    ac = Autocorrelation.from_intensity(times, 0.5 * (1 + np.cos(2 * math.pi * times / 5)))
    detection = detect_classical_period(ac)
    assert detection.status is DetectionStatus.FOUND
    assert detection.time == pytest.approx(5.0, abs=0.01)
    assert detection.uncertainty == pytest.approx(0.01)


def test_no_classical_recurrence():
    """Test a decaying signal reports no recurrence."""
    times = np.arange(0.0, 10.0, 0.01)
    detection = detect_classical_period(Autocorrelation.from_intensity(times, np.exp(-times)))
    assert detection.status is DetectionStatus.NO_RECURRENCE
    assert not detection.usable
    assert math.isnan(detection.time)


def test_short_run_is_flagged():
    """Test runs shorter than five periods carry a diagnostic."""
    times = np.arange(0.0, 12.0, 0.01)
    ac = Autocorrelation.from_intensity(times, 0.5 * (1 + np.cos(2 * math.pi * times / 5)))
    assert detect_classical_period(ac).diagnostics["short_run"] is True


def test_revival_of_synthetic_packet():
    """Test the revival is found after the initial collapse."""
    detection = detect_revival(_packet_signal((40.0, 1.0)), T_cl_hint=1.0)
    assert detection.status is DetectionStatus.FOUND
    assert detection.time == pytest.approx(40.0, abs=0.01)
    assert detection.uncertainty == pytest.approx(1.5)
    assert "half_revival" not in detection.diagnostics


def test_half_revival_is_skipped():
    """Test a partial reconstruction at T/2 gives way to the one at T."""
    detection = detect_revival(_packet_signal((20.0, 0.8), (40.0, 0.7)), T_cl_hint=1.0)
    assert detection.time == pytest.approx(40.0, abs=0.01)
    assert detection.diagnostics["half_revival"] == pytest.approx(20.0, abs=0.01)
    assert detection.diagnostics["revival_height"] == pytest.approx(0.7, abs=1e-3)


def test_weak_revival():
    """Test low revival peaks are reported as weak."""
    detection = detect_revival(_packet_signal((40.0, 0.3)), T_cl_hint=1.0)
    assert detection.status is DetectionStatus.WEAK
    assert detection.usable
    assert detection.time == pytest.approx(40.0, abs=0.01)


def test_degenerate_spectrum():
    """Test a signal that never collapses is flagged as degenerate."""
    times = np.arange(0.0, 30.0, 0.01)
    ac = Autocorrelation.from_intensity(times, np.cos(math.pi * times) ** 2)
    detection = detect_revival(ac, T_cl_hint=1.0)
    assert detection.status is DetectionStatus.DEGENERATE
    assert detection.time == pytest.approx(1.0, abs=0.01)


def test_revival_needs_a_run():
    """Test runs ending before the search window report no recurrence."""
    times = np.arange(0.0, 2.0, 0.01)
    ac = Autocorrelation.from_intensity(times, np.cos(math.pi * times) ** 2)
    assert detect_revival(ac, T_cl_hint=1.0).status is DetectionStatus.NO_RECURRENCE
    with pytest.raises(DomainError):
        detect_revival(ac, T_cl_hint=0.0)


def test_autocorrelation_of_exact_evolution(harmonic):
    """Test A(0) = 1 and |A(2 pi)| = 1 for the oscillator."""
    basis = solve_eigen(harmonic, 1.0, auto_grid(harmonic, 1.0, 20), 20)
    packet = build_wavepacket(basis, 8, 1.5)
    coefficients = basis.project(packet)
    times = np.linspace(0.0, 4 * math.pi, 401)
    ac = autocorrelate(evolve_in_basis(basis, coefficients, times), metadata={"source": "exact"})
    assert ac.values[0] == pytest.approx(1.0, abs=1e-10)
    assert ac.intensity[200] == pytest.approx(1.0, abs=1e-4)
    assert ac.metadata == {"source": "exact"}
    assert detect_classical_period(ac).time == pytest.approx(2 * math.pi, rel=5e-3)
    with pytest.raises(DomainError):
        autocorrelate([])


def _detection(time, status=DetectionStatus.FOUND):
    return Detection(time=time, uncertainty=0.1, status=status)


def test_compare_undriven(bouncer_spectrum):
    """Test relative errors against the undriven predictions."""
    period, revival = undriven_times(bouncer_spectrum)
    report = compare(
        _detection(1.02 * period), _detection(0.95 * revival), bouncer_spectrum, DriveSpec()
    )
    assert report.T_cl_predicted == period
    assert report.relative_errors["T_cl"] == pytest.approx(0.02)
    assert report.relative_errors["T_Q"] == pytest.approx(0.05)
    assert report.status == {"T_cl": "found", "T_Q": "found"}


def test_compare_harmonic_skips_revival(harmonic):
    """Test an infinite prediction is reported, not compared."""
    spectrum = build_spectrum_model(harmonic, 1.0, 5)
    report = compare(
        _detection(2 * math.pi),
        _detection(2 * math.pi, DetectionStatus.DEGENERATE),
        spectrum,
        DriveSpec(),
    )
    assert report.relative_errors["T_Q"] is None
    assert report.status["T_Q"] == "skipped: infinite prediction"
    flat = report.to_flat_dict()
    assert flat["T_Q_predicted"] == "inf"
    assert flat["relative_error.T_Q"] is None
    json.dumps(flat)


def test_compare_driven_uses_lab_frame(bouncer_spectrum):
    """Test the driven report keeps the rotating-frame period apart."""
    drive = DriveSpec(lam=5e-3, N=2)
    report = compare(_detection(11.6), _detection(1400.0), bouncer_spectrum, drive)
    diagnostics = report.detection_diagnostics
    assert diagnostics["T_cl_rotating"] != report.T_cl_predicted
    assert diagnostics["shift_sign_cl"] == 1
    assert diagnostics["shift_sign_Q"] == -1
    assert "frame" in diagnostics


def test_autocorrelation_csv():
    """Test the CSV columns and infinity-free floats."""
    ac = Autocorrelation(
        times=np.array([0.0, 0.5]),
        values=np.array([1.0 + 0j, 0.5 - 0.25j]),
        norms=np.array([1.0, 1.0]),
    )
    buffer = io.StringIO()
    write_autocorrelation_csv(ac, buffer, include_norm=True)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == "t,ReA,ImA,abs2A,norm"
    t, real, imag, intensity, norm = (float(cell) for cell in lines[2].split(","))
    assert (t, real, imag, norm) == (0.5, 0.5, -0.25, 1.0)
    assert intensity == pytest.approx(0.3125)


@pytest.mark.slow
def test_undriven_bouncer_recurrences(bouncer, bouncer_spectrum):
    """Test detected bouncer times within 5% and 10% of the closed forms."""
    basis = solve_eigen(bouncer, 1.0, auto_grid(bouncer, 1.0, 34), 34)
    state = build_wavepacket(basis, 20, 2)
    _, revival = undriven_times(bouncer_spectrum)
    dt = 2 * math.pi / 200
    steps = math.ceil(1.3 * revival / dt)
    ac = autocorrelate(propagate(state, bouncer, DriveSpec(), 1.0, dt, steps, stride=2))

    classical = detect_classical_period(ac)
    report = compare(classical, detect_revival(ac, classical.time), bouncer_spectrum, DriveSpec())
    assert report.relative_errors["T_cl"] <= 0.05
    assert report.relative_errors["T_Q"] <= 0.10


def test_classical_period_calibration():
    """Test cos^2(pi t / T) gives back T within one sample for random periods."""
    rng = np.random.default_rng(2024)
    for period in rng.uniform(0.8, 8.0, 20):
        times = np.arange(0.0, 6.0 * period, 0.01)
        ac = Autocorrelation.from_intensity(times, np.cos(math.pi * times / period) ** 2)
        detection = detect_classical_period(ac)
        assert detection.status is DetectionStatus.FOUND
        assert abs(detection.time - period) <= detection.uncertainty


def test_revival_envelope_calibration():
    """Test a comb of classical peaks under a revival envelope gives back T_Q."""
    rng = np.random.default_rng(7)
    for _ in range(10):
        period = rng.uniform(0.5, 2.0)
        revival = period * rng.uniform(20.0, 60.0)
        width = 0.1 * revival
        times = np.arange(0.0, 1.5 * revival, period / 100)
        phase = times / period - np.round(times / period)
        comb = np.exp(-((phase / 0.08) ** 2))
        envelope = np.maximum(
            np.exp(-((times / width) ** 2)), np.exp(-(((times - revival) / width) ** 2))
        )
        detection = detect_revival(
            Autocorrelation.from_intensity(times, comb * envelope), T_cl_hint=period
        )
        assert detection.status is DetectionStatus.FOUND
        assert detection.uncertainty == pytest.approx(1.5 * period, rel=1e-2)
        assert abs(detection.time - revival) <= detection.uncertainty


def test_two_level_beat(harmonic):
    """Test the autocorrelation of two levels follows the closed-form beat."""
    basis = solve_eigen(harmonic, 1.0, auto_grid(harmonic, 1.0, 20), 20)
    weights = np.zeros(20)
    weights[3], weights[5] = 0.3, 0.7
    times = np.arange(0.0, 40.0, 0.01)
    ac = autocorrelate(evolve_in_basis(basis, np.sqrt(weights), times))

    splitting = basis.energies[5] - basis.energies[3]
    expected = 0.3**2 + 0.7**2 + 2 * 0.3 * 0.7 * np.cos(splitting * times)
    np.testing.assert_allclose(ac.intensity, expected, atol=1e-8)

    beat = 2 * math.pi / splitting
    assert beat == pytest.approx(math.pi, rel=1e-6)
    classical = detect_classical_period(ac)
    assert abs(classical.time - beat) <= classical.uncertainty
    revival = detect_revival(ac, T_cl_hint=beat)
    assert revival.status is DetectionStatus.DEGENERATE
    assert abs(revival.time - beat) <= revival.uncertainty
