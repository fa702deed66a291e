"""Test loading and validating experiment documents."""

import math

import pytest

from powerlaw_revivals.cli import run_plan, spectrum_for
from powerlaw_revivals.config import (
    ExperimentConfig,
    apply_override,
    document_digest,
    load_config,
    load_document,
    parse_value,
    sweep_documents,
    validate_document,
)
from powerlaw_revivals.exceptions import ConfigError
from powerlaw_revivals.quantum import DriveShape
from powerlaw_revivals.recurrence import undriven_times
from powerlaw_revivals.spectrum import DomainKind


def test_load_valid_document(write_config, bouncer_document):
    """Test defaults are filled in around the given keys."""
    config = load_config(write_config(bouncer_document))
    assert isinstance(config, ExperimentConfig)
    assert config.potential.domain_kind is DomainKind.TRUNCATED
    assert config.potential.maslov_gamma == 3
    assert config.drive.lam == 0
    assert config.drive.shape is DriveShape.POTENTIAL
    assert config.run.time_step() == pytest.approx(0.0314159, rel=1e-5)
    assert config.grid is None


def test_misspelled_key_is_echoed(bouncer_document):
    """Test unknown keys are rejected with their path."""
    bouncer_document["drive"] = {"lamda": 0.01}
    with pytest.raises(ConfigError) as err:
        validate_document(bouncer_document)
    assert "drive.lamda" in str(err.value)


def test_overrides(write_config, bouncer_document):
    """Test dotted overrides parse JSON and fall back to strings."""
    path = write_config(bouncer_document)
    document = load_document(path, ["drive.lambda=0.02", "drive.N=2", "potential.domain=truncated"])
    assert document["drive"] == {"lambda": 0.02, "N": 2}
    assert document["potential"]["domain"] == "truncated"
    config = validate_document(document)
    assert config.drive.order == 2
    assert config.drive.spec().strength == pytest.approx(0.02)
    assert config.drive.spec(coupling=0.5).strength == pytest.approx(0.01)


def test_parse_value():
    assert parse_value("1e-3") == 1e-3
    assert parse_value("true") is True
    assert parse_value("[1, 2]") == [1, 2]
    assert parse_value("gaussian") == "gaussian"


def test_malformed_overrides(write_config, bouncer_document):
    """Test overrides without '=' or with empty path parts."""
    path = write_config(bouncer_document)
    with pytest.raises(ConfigError):
        load_document(path, ["drive.lambda"])
    with pytest.raises(ConfigError):
        apply_override({}, "drive..lambda", 1)
    with pytest.raises(ConfigError):
        apply_override({"kbar": 1.0}, "kbar.value", 1)


def test_unreadable_documents(tmp_path, write_config):
    with pytest.raises(ConfigError):
        load_document(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_document(broken)
    with pytest.raises(ConfigError):
        load_document(write_config([1, 2, 3]))


def test_physical_block(bouncer_document):
    """Test kbar and V0 are derived from physical constants."""
    del bouncer_document["kbar"]
    bouncer_document["physical"] = {"a": 2.0, "m": 1.0, "hbar": 1.0, "omega": 1.0, "V0": 3.0}
    config = validate_document(bouncer_document)
    assert config.kbar == pytest.approx(0.5)
    assert config.potential.v0 == pytest.approx(3.0)


def test_inconsistent_kbar(bouncer_document):
    bouncer_document["physical"] = {"a": 2.0, "m": 1.0, "hbar": 1.0, "omega": 1.0}
    with pytest.raises(ConfigError) as err:
        validate_document(bouncer_document)
    assert "disagrees" in str(err.value)


@pytest.mark.parametrize(
    "key, value",
    [
        ("potential.k", 1e7),
        ("kbar", 0),
        ("run.steps_per_period", 100),
        ("packet.kind", "gaussian"),
        ("drive.N", 0),
        ("grid", {"x_min": 0, "x_max": 10, "n_points": 300}),
    ],
)
def test_invalid_values(bouncer_document, key, value):
    """Test out-of-range values become configuration errors."""
    with pytest.raises(ConfigError):
        validate_document(apply_override(bouncer_document, key, value))


def test_run_length_is_exclusive(bouncer_document):
    bouncer_document["run"] = {"total_time": 100.0, "periods": 10}
    with pytest.raises(ConfigError):
        validate_document(bouncer_document)


def test_run_length():
    config = ExperimentConfig.model_validate(
        {"potential": {"V0": 1, "k": 4}, "kbar": 1, "run": {"periods": 3}}
    )
    assert config.run.requested_time() == pytest.approx(6 * 3.141592653589793)


def test_sweep_documents(bouncer_document):
    """Test sweep points keep input order and drop the sweep section."""
    bouncer_document["sweep"] = {"parameter": "drive.lambda", "values": [0.03, 0.01, 0.02]}
    points = sweep_documents(bouncer_document)
    assert [value for value, _ in points] == [0.03, 0.01, 0.02]
    for value, document in points:
        assert "sweep" not in document
        assert document["drive"]["lambda"] == value
    assert "drive" not in bouncer_document


def test_missing_sweep(bouncer_document):
    with pytest.raises(ConfigError):
        sweep_documents(bouncer_document)


def test_digest_ignores_key_order():
    first = {"kbar": 1.0, "potential": {"V0": 1, "k": 2}}
    second = {"potential": {"k": 2, "V0": 1}, "kbar": 1.0}
    assert document_digest(first) == document_digest(second)
    assert document_digest(first) != document_digest({**first, "kbar": 0.5})


def test_time_step_resolves_both_periods(write_config, bouncer_document):
    """Test the step keeps 200 steps per drive period and 100 per orbit."""
    config = load_config(write_config(bouncer_document))
    assert config.run.time_step(math.inf) == pytest.approx(2 * math.pi / 200)
    assert config.run.time_step(20.0) == pytest.approx(2 * math.pi / 200)
    assert config.run.time_step(1.0) == pytest.approx(2 * math.pi / 629)
    assert config.run.time_step(1.0) <= 0.01

    spectrum = spectrum_for(config)
    dt, n_steps = run_plan(config, spectrum)
    assert dt == config.run.time_step(undriven_times(spectrum)[0])
    assert n_steps * dt >= 1.3 * undriven_times(spectrum)[1]
