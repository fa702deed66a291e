"""Experiment configuration: schema, JSON loading and dotted overrides."""

import copy
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .const import DRIVE_PERIOD, MIN_STEPS_PER_DRIVE_PERIOD, PERIOD_RESOLUTION
from .exceptions import ConfigError, RevivalsError
from .quantum import DriveShape, Grid
from .resonance import DriveSpec
from .spectrum import PotentialSpec
from .units import derive_kbar, scale_energy

_LOGGER = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)


class DriveConfig(DriveSpec):
    """Drive parameters plus how V(x) is realised on the grid."""

    shape: DriveShape = DriveShape.POTENTIAL
    estimate_coupling: bool = False

    def spec(self, coupling: Optional[float] = None) -> DriveSpec:
        return DriveSpec(
            lam=self.lam,
            coupling=self.coupling if coupling is None else coupling,
            order=self.order,
        )


class RunConfig(_Section):
    """Time stepping of a propagation run."""

    steps_per_period: int = Field(MIN_STEPS_PER_DRIVE_PERIOD, ge=MIN_STEPS_PER_DRIVE_PERIOD)
    total_time: Optional[float] = Field(None, gt=0)
    periods: Optional[float] = Field(None, gt=0)
    sample_stride: int = Field(2, ge=1)

    @model_validator(mode="after")
    def _check_length(self) -> "RunConfig":
        if self.total_time is not None and self.periods is not None:
            raise ValueError("give either total_time or periods, not both")
        return self

    def time_step(self, classical_period: float = math.inf) -> float:
        """Step of 2 pi / M with M >= steps_per_period and dt <= 0.01 T_cl."""
        steps = self.steps_per_period
        if math.isfinite(classical_period) and classical_period > 0:
            resolved = math.ceil(DRIVE_PERIOD / (PERIOD_RESOLUTION * classical_period))
            steps = max(steps, resolved)
        return DRIVE_PERIOD / steps

    def requested_time(self) -> Optional[float]:
        if self.periods is not None:
            return self.periods * DRIVE_PERIOD
        return self.total_time


class PacketConfig(_Section):
    """Initial state: Gaussian populations over levels or a Gaussian in x."""

    kind: Literal["levels", "gaussian"] = "levels"
    x0: float = 0.0
    p0: float = 0.0
    width: float = Field(1.0, gt=0)


class OutputConfig(_Section):
    numeric_spectrum: bool = False
    trajectory: bool = True
    snapshots: bool = False
    snapshot_stride: int = Field(1000, ge=1)


class SweepConfig(_Section):
    """One sweep axis given as a dotted parameter path and its values."""

    parameter: str
    values: List[Union[int, float, str, bool]] = Field(..., min_length=1)
    target: Literal["times", "evolve"] = "times"


class PhysicalConfig(_Section):
    """Physical constants from which kbar (and optionally V0) are derived."""

    a: float = Field(..., gt=0)
    m: float = Field(..., gt=0)
    hbar: float = Field(..., gt=0)
    omega: float = Field(..., gt=0)
    V0: Optional[float] = Field(None, gt=0)


class ExperimentConfig(_Section):
    """Model for a complete experiment document."""

    potential: PotentialSpec
    kbar: float = Field(..., gt=0)
    physical: Optional[PhysicalConfig] = None
    n_bar: float = Field(20.0, ge=0)
    sigma_n: float = Field(2.0, gt=0)
    n_levels: Optional[int] = Field(None, ge=1)
    drive: DriveConfig = DriveConfig()
    grid: Optional[Grid] = None
    run: RunConfig = RunConfig()
    packet: PacketConfig = PacketConfig()
    outputs: OutputConfig = OutputConfig()
    sweep: Optional[SweepConfig] = None

    @model_validator(mode="before")
    @classmethod
    def _derive_scaled_values(cls, data: Any) -> Any:
        if not isinstance(data, dict) or not isinstance(data.get("physical"), dict):
            return data
        physical = data["physical"]
        try:
            kbar = derive_kbar(
                physical.get("a"), physical.get("m"), physical.get("hbar"), physical.get("omega")
            )
        except TypeError as err:
            raise ValueError("physical block needs a, m, hbar and omega") from err
        data = dict(data)
        if data.get("kbar") is not None and abs(data["kbar"] - kbar) > 1e-12 * kbar:
            raise ValueError(f"kbar={data['kbar']} disagrees with physical constants ({kbar})")
        data["kbar"] = kbar
        if physical.get("V0") is not None and isinstance(data.get("potential"), dict):
            potential = dict(data["potential"])
            potential["V0"] = scale_energy(physical["V0"], physical["hbar"], physical["omega"])
            data["potential"] = potential
        return data

    @model_validator(mode="after")
    def _check_packet(self) -> "ExperimentConfig":
        if self.packet.kind == "gaussian" and self.grid is None:
            raise ValueError("a Gaussian packet needs an explicit grid")
        return self


def parse_value(raw: str) -> Any:
    """Interpret an override value as JSON, falling back to a plain string."""
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_override(document: Dict[str, Any], dotted_key: str, value: Any) -> Dict[str, Any]:
    """Set a value at a dotted path, creating intermediate sections."""
    parts = dotted_key.split(".")
    if not all(parts):
        raise ConfigError("malformed override key", key=dotted_key)
    node = document
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError("override descends into a value", key=dotted_key)
        node = child
    node[parts[-1]] = value
    return document


def load_document(path: Union[str, Path], overrides: Sequence[str] = ()) -> Dict[str, Any]:
    """Read a JSON document and apply key=value overrides.

    Raises:
        ConfigError: If the file cannot be read or an override is malformed
    """
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read configuration: {err}", path=str(path)) from err
    if not isinstance(document, dict):
        raise ConfigError("configuration must be a JSON object", path=str(path))
    for item in overrides:
        key, separator, raw = item.partition("=")
        if not separator:
            raise ConfigError("override must look like key=value", override=item)
        apply_override(document, key.strip(), parse_value(raw))
        _LOGGER.debug("Override %s=%s", key, raw)
    return document


def _describe(err: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in error['loc']) or '<root>'}: {error['msg']}"
        for error in err.errors()
    )


def validate_document(document: Dict[str, Any]) -> ExperimentConfig:
    """Validate a raw document, echoing offending key paths in the error."""
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as err:
        raise ConfigError(f"invalid configuration: {_describe(err)}") from err
    except RevivalsError as err:
        raise ConfigError(f"invalid configuration: {err}") from err


def load_config(path: Union[str, Path], overrides: Sequence[str] = ()) -> ExperimentConfig:
    return validate_document(load_document(path, overrides))


def sweep_documents(document: Dict[str, Any]) -> List[Tuple[Any, Dict[str, Any]]]:
    """Expand the sweep axis into one document per value, in input order."""
    sweep = document.get("sweep")
    if not isinstance(sweep, dict):
        raise ConfigError("configuration has no sweep section")
    base = {key: value for key, value in document.items() if key != "sweep"}
    points = []
    for value in sweep.get("values", []):
        point = apply_override(copy.deepcopy(base), sweep["parameter"], value)
        points.append((value, point))
    return points


def document_digest(document: Dict[str, Any]) -> str:
    """Stable hash of a configuration document for provenance records."""
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
