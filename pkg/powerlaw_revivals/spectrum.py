"""WKB spectrum of the unmodulated power-law potential V0 |x|^k."""

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        """Backport of enum.StrEnum."""

        def __str__(self) -> str:
            return str(self.value)

from dataclasses import dataclass
import logging
import math
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.special import gammaln

from .const import (
    BOX_GAMMA,
    DEFAULT_GAMMA_SYMMETRIC,
    DEFAULT_GAMMA_TRUNCATED,
    MAX_EXPONENT,
    MIN_EXPONENT,
)
from .exceptions import DomainError, RangeError

_LOGGER = logging.getLogger(__name__)

_LOG_MAX_FLOAT = math.log(np.finfo(float).max)
_LOG_MIN_FLOAT = math.log(np.finfo(float).tiny)

Levels = Union[float, NDArray[np.float64]]


class DomainKind(StrEnum):
    """Where the power law lives."""

    SYMMETRIC = "symmetric"
    TRUNCATED = "truncated"


class BindingKind(StrEnum):
    """Curvature class of the spectrum."""

    TIGHT = "tight"
    HARMONIC = "harmonic"
    LOOSE = "loose"


class PotentialSpec(BaseModel):
    """Model for the power-law potential V0 |x|^k."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    v0: float = Field(..., alias="V0", gt=0)
    exponent_k: float = Field(..., alias="k", gt=0)
    maslov_gamma: int = Field(..., alias="gamma", ge=1, le=4)
    domain_kind: DomainKind = Field(DomainKind.SYMMETRIC, alias="domain")

    @model_validator(mode="before")
    @classmethod
    def _default_gamma(cls, data):
        if not isinstance(data, dict):
            return data
        if data.get("gamma", data.get("maslov_gamma")) is not None:
            return data
        domain = DomainKind(
            data.get("domain", data.get("domain_kind", DomainKind.SYMMETRIC))
        )
        data = {key: value for key, value in data.items() if key != "maslov_gamma"}
        data["gamma"] = (
            DEFAULT_GAMMA_TRUNCATED
            if domain is DomainKind.TRUNCATED
            else DEFAULT_GAMMA_SYMMETRIC
        )
        return data

    @field_validator("exponent_k")
    @classmethod
    def _check_exponent_range(cls, value: float) -> float:
        if not MIN_EXPONENT <= value <= MAX_EXPONENT:
            raise RangeError(
                "exponent outside the representable range",
                k=value,
                allowed=(MIN_EXPONENT, MAX_EXPONENT),
            )
        return value

    @model_validator(mode="after")
    def _check_hard_wall(self) -> "PotentialSpec":
        # One hard wall contributes 2 to the Maslov index.
        if self.domain_kind is DomainKind.TRUNCATED and self.maslov_gamma not in (
            DEFAULT_GAMMA_TRUNCATED,
            BOX_GAMMA,
        ):
            raise ValueError(
                f"truncated potentials need gamma in (3, 4), got {self.maslov_gamma}"
            )
        return self

    @property
    def rho(self) -> float:
        """Nonlinearity measure k - 2."""
        return self.exponent_k - 2.0

    def evaluate(self, x: ArrayLike) -> NDArray[np.float64]:
        """Potential values on the given positions."""
        return self.v0 * np.abs(np.asarray(x, dtype=float)) ** self.exponent_k


def _energy_exponent(k: float) -> float:
    return 2.0 * k / (k + 2.0)


def _log_bracket_scale(potential: PotentialSpec, kbar: float) -> float:
    inv_k = 1.0 / potential.exponent_k
    log_scale = (
        math.log(kbar * math.pi / (2.0 * math.sqrt(2.0)))
        + inv_k * math.log(potential.v0)
        + gammaln(inv_k + 1.5)
        - gammaln(inv_k + 1.0)
        - gammaln(1.5)
    )
    if potential.domain_kind is DomainKind.TRUNCATED:
        # the wall reflects the orbit, so only half of the loop action is quantised
        log_scale += math.log(2.0)
    return float(log_scale)


def _shifted_level(potential: PotentialSpec, n: ArrayLike) -> NDArray[np.float64]:
    shifted = np.asarray(n, dtype=float) + potential.maslov_gamma / 4.0
    if np.any(shifted <= 0):
        raise DomainError(
            "level index must satisfy n + gamma/4 > 0",
            n=n,
            gamma=potential.maslov_gamma,
        )
    return shifted


def _check_kbar(kbar: float) -> None:
    if not kbar > 0:
        raise DomainError("kbar must be strictly positive", kbar=kbar)


def _as_levels(values: NDArray[np.float64], like: ArrayLike) -> Levels:
    if np.ndim(like) == 0:
        return float(values)
    return values


def wkb_energy(potential: PotentialSpec, kbar: float, n: ArrayLike) -> Levels:
    """Return the WKB energy of level n (scalar or array of levels).

    Args:
        potential: The power-law potential
        kbar: Effective Planck constant
        n: Level index, real valued, n + gamma/4 > 0

    Returns:
        The scaled energy E_n

    Raises:
        DomainError: If kbar or the level index is out of domain
        RangeError: If the energy overflows 64-bit floats
    """
    _check_kbar(kbar)
    shifted = _shifted_level(potential, n)
    log_energy = _energy_exponent(potential.exponent_k) * (
        np.log(shifted) + _log_bracket_scale(potential, kbar)
    )
    if np.any(log_energy >= _LOG_MAX_FLOAT) or np.any(log_energy <= _LOG_MIN_FLOAT):
        raise RangeError(
            "WKB energy not representable",
            k=potential.exponent_k,
            n=n,
            log_energy=float(np.max(np.abs(log_energy))),
        )
    return _as_levels(np.exp(log_energy), n)


def frequency_omega(potential: PotentialSpec, kbar: float, n_bar: ArrayLike) -> Levels:
    """Level-spacing frequency (1/kbar) dE/dn at n_bar."""
    energy = wkb_energy(potential, kbar, n_bar)
    shifted = _shifted_level(potential, n_bar)
    k = potential.exponent_k
    return _as_levels(2.0 * k / (k + 2.0) * energy / (kbar * shifted), n_bar)


def nonlinearity_zeta(
    potential: PotentialSpec, kbar: float, n_bar: ArrayLike
) -> Levels:
    """Spectral curvature (1/kbar^2) d^2E/dn^2 at n_bar."""
    energy = wkb_energy(potential, kbar, n_bar)
    shifted = _shifted_level(potential, n_bar)
    k = potential.exponent_k
    coefficient = 2.0 * k * (k - 2.0) / (k + 2.0) ** 2
    return _as_levels(coefficient * energy / (kbar**2 * shifted**2), n_bar)


def frequency_omega_rho(
    rho: float, kbar: float, n_bar: float, gamma: int, energy: float
) -> float:
    """Level-spacing frequency written in terms of rho = k - 2."""
    return 2.0 * (2.0 + rho) / (4.0 + rho) * energy / (kbar * (n_bar + gamma / 4.0))


def nonlinearity_zeta_rho(
    rho: float, kbar: float, n_bar: float, gamma: int, energy: float
) -> float:
    """Spectral curvature written in terms of rho = k - 2."""
    shifted = n_bar + gamma / 4.0
    return 2.0 * rho * (2.0 + rho) / (4.0 + rho) ** 2 * energy / (kbar * shifted) ** 2


def energy_levels(
    potential: PotentialSpec, kbar: float, n_levels: int
) -> NDArray[np.float64]:
    """WKB energies of levels 0 .. n_levels - 1."""
    return np.asarray(wkb_energy(potential, kbar, np.arange(n_levels, dtype=float)))


def level_spacings(
    potential: PotentialSpec, kbar: float, n_levels: int
) -> NDArray[np.float64]:
    """Spacings E_n - E_(n-1) for n = 1 .. n_levels - 1."""
    return np.diff(energy_levels(potential, kbar, n_levels))


def spacing_exponent(k: float) -> float:
    """Power of (n + gamma/4) that governs the level spacing."""
    return (k - 2.0) / (k + 2.0)


def binding_kind(k: float) -> BindingKind:
    if k > 2.0:
        return BindingKind.TIGHT
    if k < 2.0:
        return BindingKind.LOOSE
    return BindingKind.HARMONIC


@dataclass(frozen=True)
class SpectrumModel:
    """Class for holding the local spectrum around a mean level."""

    potential: PotentialSpec
    kbar: float
    n_bar: float
    E_nbar: float
    omega: float
    zeta: float

    @property
    def rho(self) -> float:
        return self.potential.rho

    @property
    def shifted_n(self) -> float:
        """Mean level plus the Maslov correction, n_bar + gamma/4."""
        return self.n_bar + self.potential.maslov_gamma / 4.0

    @property
    def zeta_sign(self) -> int:
        return int(np.sign(self.zeta))

    @property
    def binding(self) -> BindingKind:
        return binding_kind(self.potential.exponent_k)

    @classmethod
    def from_potential(
        cls, potential: PotentialSpec, kbar: float, n_bar: float
    ) -> "SpectrumModel":
        """Create a SpectrumModel from the potential and the mean level.

        Args:
            potential: The power-law potential
            kbar: Effective Planck constant
            n_bar: Mean quantum number (real valued)

        Returns:
            The populated spectrum model
        """
        energy = wkb_energy(potential, kbar, n_bar)
        model = cls(
            potential=potential,
            kbar=float(kbar),
            n_bar=float(n_bar),
            E_nbar=energy,
            omega=frequency_omega(potential, kbar, n_bar),
            zeta=nonlinearity_zeta(potential, kbar, n_bar),
        )
        _LOGGER.debug(
            "Spectrum at n_bar=%s: E=%s omega=%s zeta=%s",
            n_bar,
            model.E_nbar,
            model.omega,
            model.zeta,
        )
        return model


def build_spectrum_model(
    potential: PotentialSpec, kbar: float, n_bar: float
) -> SpectrumModel:
    return SpectrumModel.from_potential(potential, kbar, n_bar)
