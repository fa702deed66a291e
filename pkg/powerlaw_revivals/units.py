"""Dimensionless scaling and the effective Planck constant."""

import logging
import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .const import PHYSICAL_KBAR_RTOL
from .exceptions import DomainError

_LOGGER = logging.getLogger(__name__)


def derive_kbar(a: float, m: float, hbar: float, omega: float) -> float:
    """Return the effective Planck constant (1/a) sqrt(hbar/(m omega)).

    Args:
        a: Length scale of the potential
        m: Particle mass
        hbar: Planck constant in the same unit system
        omega: Drive angular frequency

    Returns:
        The dimensionless kbar

    Raises:
        DomainError: If any input is not strictly positive
    """
    for name, value in (("a", a), ("m", m), ("hbar", hbar), ("omega", omega)):
        if not value > 0:
            raise DomainError(f"{name} must be strictly positive", **{name: value})
    return math.sqrt(hbar / (m * omega)) / a


def scale_energy(energy: float, hbar: float, omega: float) -> float:
    """Express a physical energy in units of hbar*omega."""
    if not hbar > 0 or not omega > 0:
        raise DomainError(
            "hbar and omega must be strictly positive", hbar=hbar, omega=omega
        )
    return energy / (hbar * omega)


class ScaledUnits(BaseModel):
    """Effective Planck constant with optional physical provenance."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kbar: float = Field(..., gt=0)
    omega_drive: Optional[float] = Field(None, gt=0)
    length_scale: Optional[float] = Field(None, gt=0)
    mass: Optional[float] = Field(None, gt=0)
    hbar: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _check_provenance(self) -> "ScaledUnits":
        physical = (self.length_scale, self.mass, self.hbar, self.omega_drive)
        if all(value is not None for value in physical):
            expected = derive_kbar(*physical)
            if abs(self.kbar - expected) > PHYSICAL_KBAR_RTOL * expected:
                raise ValueError(
                    f"kbar={self.kbar} inconsistent with physical constants "
                    f"(expected {expected})"
                )
        return self

    @classmethod
    def from_physical(
        cls, a: float, m: float, hbar: float, omega: float
    ) -> "ScaledUnits":
        """Build scaled units from physical constants."""
        kbar = derive_kbar(a, m, hbar, omega)
        _LOGGER.debug("Derived kbar=%s from a=%s m=%s hbar=%s", kbar, a, m, hbar)
        return cls(
            kbar=kbar, omega_drive=omega, length_scale=a, mass=m, hbar=hbar
        )
