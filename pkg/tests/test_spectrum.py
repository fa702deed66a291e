"""Test the WKB spectrum and its local expansion."""

import math

import numpy as np
from pydantic import ValidationError
import pytest
from scipy.special import ai_zeros

from powerlaw_revivals.exceptions import DomainError, RangeError
from powerlaw_revivals.spectrum import (
    BindingKind,
    DomainKind,
    PotentialSpec,
    binding_kind,
    build_spectrum_model,
    energy_levels,
    frequency_omega,
    frequency_omega_rho,
    level_spacings,
    nonlinearity_zeta,
    nonlinearity_zeta_rho,
    spacing_exponent,
    wkb_energy,
)


def test_default_maslov_index():
    """Test gamma defaults to 2 for symmetric and 3 for truncated potentials."""
    assert PotentialSpec(V0=1, k=4).maslov_gamma == 2
    assert PotentialSpec(V0=1, k=1, domain="truncated").maslov_gamma == 3
    assert PotentialSpec(V0=1, k=1, domain="truncated", gamma=4).maslov_gamma == 4


def test_potential_validation():
    """Test invalid potentials are rejected."""
    with pytest.raises(ValidationError):
        PotentialSpec(V0=1, k=1, domain="truncated", gamma=2)
    with pytest.raises(ValidationError):
        PotentialSpec(V0=0, k=2)
    with pytest.raises(ValidationError):
        PotentialSpec(V0=1, k=2, depth=3)
    with pytest.raises(RangeError):
        PotentialSpec(V0=1, k=1e7)


def test_harmonic_levels_are_exact(harmonic):
    """Test the oscillator WKB levels equal n + 1/2."""
    levels = energy_levels(harmonic, 1.0, 50)
    np.testing.assert_allclose(levels, np.arange(50) + 0.5, rtol=0, atol=1e-10)
    assert wkb_energy(harmonic, 1.0, 0) == pytest.approx(0.5, abs=1e-12)


def test_scalar_in_scalar_out(harmonic):
    """Test scalar levels give plain floats."""
    assert isinstance(wkb_energy(harmonic, 1.0, 3), float)
    assert wkb_energy(harmonic, 1.0, np.array([1.0, 2.0])).shape == (2,)


def test_harmonic_frequency_and_curvature(harmonic):
    """Test omega = 1 and zeta = 0 for the oscillator."""
    assert frequency_omega(harmonic, 1.0, 10) == pytest.approx(1.0, rel=1e-12)
    assert nonlinearity_zeta(harmonic, 1.0, 10) == 0.0


def test_bouncer_ground_state(bouncer):
    """Test the truncated linear potential against the first Airy zero."""
    airy = -ai_zeros(1)[0][0] / 2 ** (1 / 3)
    assert wkb_energy(bouncer, 1.0, 0) == pytest.approx(airy, rel=1e-2)


def test_symmetric_linear_ground_state():
    """Test |x| with gamma = 3 reproduces the closed-form value 1.1601."""
    potential = PotentialSpec(V0=1, k=1, gamma=3)
    assert potential.domain_kind is DomainKind.SYMMETRIC
    assert wkb_energy(potential, 1.0, 0) == pytest.approx(1.1601, rel=1e-3)


def test_bouncer_matches_airy_zeros(bouncer):
    """Test WKB levels of the bouncer are within 2% of the exact ones from n = 5."""
    zeros = ai_zeros(11)[0]
    exact = -zeros / 2 ** (1 / 3)
    levels = energy_levels(bouncer, 1.0, 11)
    np.testing.assert_allclose(levels[5:], exact[5:], rtol=2e-2)


def test_box_limit():
    """Test a very steep well approaches the infinite square well."""
    potential = PotentialSpec(V0=1, k=1000, gamma=4)
    assert wkb_energy(potential, 1.0, 0) == pytest.approx(math.pi**2 / 8, rel=1e-2)


def test_invalid_levels(harmonic):
    """Test kbar and level index domains."""
    with pytest.raises(DomainError):
        wkb_energy(harmonic, 0.0, 1)
    with pytest.raises(DomainError):
        wkb_energy(harmonic, 1.0, -1)


def test_energy_overflow():
    """Test unrepresentable energies raise RangeError."""
    potential = PotentialSpec(V0=1, k=1e6)
    with pytest.raises(RangeError):
        wkb_energy(potential, 1e200, 1e300)


@pytest.mark.parametrize("k", [1.0, 1.5, 3.0, 4.0, 6.0])
def test_rho_forms_agree(k):
    """Test the rho-parametrised formulas equal the k forms."""
    potential = PotentialSpec(V0=1.3, k=k)
    kbar, n_bar = 0.7, 12.0
    energy = wkb_energy(potential, kbar, n_bar)
    gamma = potential.maslov_gamma
    assert frequency_omega_rho(potential.rho, kbar, n_bar, gamma, energy) == pytest.approx(
        frequency_omega(potential, kbar, n_bar), rel=1e-12
    )
    assert nonlinearity_zeta_rho(
        potential.rho, kbar, n_bar, gamma, energy
    ) == pytest.approx(nonlinearity_zeta(potential, kbar, n_bar), rel=1e-12)


def test_level_spacing_trends(harmonic, quartic):
    """Test spacings grow for k > 2, shrink for k < 2 and stay put at k = 2."""
    assert np.all(np.diff(level_spacings(quartic, 1.0, 20)) > 0)
    linear = PotentialSpec(V0=1, k=1)
    assert np.all(np.diff(level_spacings(linear, 1.0, 20)) < 0)
    np.testing.assert_allclose(level_spacings(harmonic, 1.0, 20), 1.0, atol=1e-10)


def test_spacing_exponent_and_binding():
    """Test the spacing power and the binding classification."""
    assert spacing_exponent(1) == pytest.approx(-1 / 3)
    assert spacing_exponent(4) == pytest.approx(1 / 3)
    assert spacing_exponent(2) == 0
    assert binding_kind(4) is BindingKind.TIGHT
    assert binding_kind(2) is BindingKind.HARMONIC
    assert binding_kind(1) is BindingKind.LOOSE


def test_spectrum_model(bouncer_spectrum):
    """Test the local spectrum of the bouncer at n_bar = 20."""
    assert bouncer_spectrum.shifted_n == 20.75
    assert bouncer_spectrum.omega == pytest.approx(0.5412, rel=1e-3)
    assert bouncer_spectrum.zeta < 0
    assert bouncer_spectrum.zeta_sign == -1
    assert bouncer_spectrum.binding is BindingKind.LOOSE
    assert bouncer_spectrum.rho == -1


def test_spectrum_model_is_consistent(quartic):
    """Test the model fields come from the spectrum functions."""
    model = build_spectrum_model(quartic, 0.5, 8.0)
    assert model.E_nbar == wkb_energy(quartic, 0.5, 8.0)
    assert model.omega == frequency_omega(quartic, 0.5, 8.0)
    assert model.zeta > 0


@pytest.mark.parametrize(
    ("potential", "n_bar"),
    [
        (PotentialSpec(V0=1, k=1, domain="truncated"), 20),
        (PotentialSpec(V0=1, k=1.5), 10),
        (PotentialSpec(V0=1, k=4), 30),
        (PotentialSpec(V0=2, k=6), 15),
    ],
)
def test_frequency_matches_finite_difference(potential, n_bar):
    """Test omega against (E_(n+1) - E_(n-1)) / 2 within 1/n_bar."""
    below, above = wkb_energy(potential, 1.0, np.array([n_bar - 1.0, n_bar + 1.0]))
    difference = (above - below) / 2
    assert frequency_omega(potential, 1.0, n_bar) == pytest.approx(difference, rel=1 / n_bar)


@pytest.mark.parametrize(("k", "n_bar"), [(4.0, 30), (1.5, 30), (6.0, 20)])
def test_curvature_matches_second_difference(k, n_bar):
    """Test zeta against E_(n+1) - 2 E_n + E_(n-1) within 2/n_bar."""
    potential = PotentialSpec(V0=1, k=k)
    below, centre, above = wkb_energy(potential, 1.0, n_bar + np.array([-1.0, 0.0, 1.0]))
    difference = above - 2 * centre + below
    assert nonlinearity_zeta(potential, 1.0, n_bar) == pytest.approx(difference, rel=2 / n_bar)


@pytest.mark.parametrize("k", [1.0, 1.5, 3.0, 4.0, 6.0])
def test_frequency_kbar_power_law(k):
    """Test omega scales as kbar^((k - 2)/(k + 2)) at fixed n_bar."""
    potential = PotentialSpec(V0=1, k=k)
    kbars = np.geomspace(0.05, 5.0, 12)
    omegas = [frequency_omega(potential, kbar, 15) for kbar in kbars]
    slope = np.polyfit(np.log(kbars), np.log(omegas), 1)[0]
    assert slope == pytest.approx((k - 2) / (k + 2), abs=1e-9)


@pytest.mark.parametrize("k", [1.0, 1.5, 3.0, 4.0, 6.0])
def test_level_spacing_law(k):
    """Test spacings over n in [5, 100] grow for k > 2 and shrink for k < 2."""
    spacings = level_spacings(PotentialSpec(V0=1, k=k), 1.0, 101)[4:]
    assert len(spacings) == 96
    if k > 2:
        assert np.all(np.diff(spacings) > 0)
    else:
        assert np.all(np.diff(spacings) < 0)
