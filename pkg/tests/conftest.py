"""Fixtures for testing."""

import json

import pytest

from powerlaw_revivals.spectrum import PotentialSpec, build_spectrum_model


@pytest.fixture
def harmonic():
    """Oscillator with unit frequency, V = x^2 / 2."""
    return PotentialSpec(V0=0.5, k=2)


@pytest.fixture
def bouncer():
    """Linear potential above a hard floor at x = 0."""
    return PotentialSpec(V0=1.0, k=1, domain="truncated")


@pytest.fixture
def quartic():
    return PotentialSpec(V0=1.0, k=4)


@pytest.fixture
def bouncer_spectrum(bouncer):
    return build_spectrum_model(bouncer, 1.0, 20)


@pytest.fixture
def bouncer_document():
    return {
        "potential": {"V0": 1.0, "k": 1, "domain": "truncated"},
        "kbar": 1.0,
        "n_bar": 20,
        "sigma_n": 2,
    }


@pytest.fixture
def harmonic_document():
    return {
        "potential": {"V0": 0.5, "k": 2},
        "kbar": 1.0,
        "n_bar": 5,
        "sigma_n": 1,
    }


@pytest.fixture
def write_config(tmp_path):
    """Write a document to a JSON file and return its path."""

    def _write(document, name="experiment.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return _write
