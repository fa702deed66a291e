"""Closed-form recurrence time scales, undriven and driven."""

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        """Backport of enum.StrEnum."""

        def __str__(self) -> str:
            return str(self.value)

from dataclasses import asdict, dataclass
import logging
import math
from typing import Any, Callable, Dict, Tuple

from .const import QUASIENERGY_STENCIL_STEP, SINGULARITY_TOL
from .exceptions import (
    DegenerateSpectrumError,
    DetuningSingularityError,
    RegimeError,
    ResonanceSingularityError,
)
from .resonance import DriveSpec, quasienergy
from .spectrum import SpectrumModel, frequency_omega_rho

_LOGGER = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class Regime(StrEnum):
    """Binding regime selected by rho = k - 2."""

    TIGHT = "tight"
    HARMONIC = "harmonic"
    LOOSE = "loose"
    FREE = "free"


def classify_regime(rho: float) -> Regime:
    if rho < -2.0:
        raise RegimeError("no bound states for rho < -2", rho=rho)
    if rho == -2.0:
        return Regime.FREE
    if rho < 0:
        return Regime.LOOSE
    if rho == 0:
        return Regime.HARMONIC
    return Regime.TIGHT


@dataclass(frozen=True)
class RecurrenceTimes:
    """Class for holding the recurrence time scales of one parameter point."""

    T0_cl: float
    T0_Q: float
    Tlam_cl: float
    Tlam_Q: float
    Delta: float
    mu: float
    M0_cl: float
    M0_Q: float
    regime: Regime
    zeta_sign: int

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SumRuleResiduals:
    """Left minus right hand sides of the tight and loose binding relations."""

    tight: float
    loose: float
    ratio_cl: float
    ratio_Q: float


@dataclass(frozen=True)
class ScalingExponents:
    """Log-log slopes of the undriven times."""

    level_cl: float
    level_Q: float
    kbar_cl: float
    kbar_Q: float


def undriven_times(spectrum: SpectrumModel) -> Tuple[float, float]:
    """Return (T0_cl, T0_Q); the revival time is infinite for a linear spectrum."""
    classify_regime(spectrum.rho)
    period = TWO_PI / spectrum.omega
    if spectrum.zeta == 0:
        return period, math.inf
    return period, TWO_PI / (0.5 * spectrum.kbar * abs(spectrum.zeta))


def undriven_times_rho(
    rho: float, kbar: float, n_bar: float, gamma: int, energy: float
) -> Tuple[float, float]:
    """Undriven times in terms of rho; both diverge for the free particle."""
    regime = classify_regime(rho)
    if regime is Regime.FREE:
        return math.inf, math.inf
    shifted = n_bar + gamma / 4.0
    period = math.pi * kbar * (4.0 + rho) / (2.0 + rho) * shifted / energy
    if regime is Regime.HARMONIC:
        return period, math.inf
    revival = (
        TWO_PI * kbar * (4.0 + rho) ** 2 / (abs(rho) * (2.0 + rho)) * shifted**2 / energy
    )
    return period, revival


def _modification_factors(
    coupling_ratio: float, mu: float
) -> Tuple[float, float]:
    # coupling_ratio is lambda V zeta Delta^2 / omega^2 (= q mu^2)
    squared = coupling_ratio**2
    denominator = 1.0 - mu * mu
    m0_cl = -0.5 * squared / denominator**2
    m0_q = 0.5 * squared * (3.0 + mu * mu) / denominator**3
    return m0_cl, m0_q


def _detuning_factor(omega: float, order: int) -> float:
    ratio = 1.0 / (order * omega)
    if abs(1.0 - ratio) < SINGULARITY_TOL:
        raise DetuningSingularityError(
            "orbital frequency sits on the resonance", omega=omega, N=order
        )
    return 1.0 / (1.0 - ratio)


def _check_mu(mu: float, **details: Any) -> None:
    if abs(1.0 - mu * mu) < SINGULARITY_TOL:
        raise ResonanceSingularityError("mu^2 = 1 makes the shifts diverge", mu=mu, **details)


def driven_times(spectrum: SpectrumModel, drive: DriveSpec) -> RecurrenceTimes:
    """Return all recurrence times of the driven system.

    Args:
        spectrum: Local spectrum around the mean level
        drive: Modulation strength, coupling and resonance order

    Returns:
        Undriven and driven times with the detuning and modification factors

    Raises:
        DetuningSingularityError: If omega equals 1/N
        ResonanceSingularityError: If mu^2 equals 1
    """
    period, revival = undriven_times(spectrum)
    order = drive.order
    delta = _detuning_factor(spectrum.omega, order)
    mu = order * spectrum.kbar * spectrum.zeta * delta / (2.0 * spectrum.omega)
    _check_mu(mu, Delta=delta, N=order, n_bar=spectrum.n_bar)

    coupling_ratio = drive.strength * spectrum.zeta * delta**2 / spectrum.omega**2
    m0_cl, m0_q = _modification_factors(coupling_ratio, mu)
    times = RecurrenceTimes(
        T0_cl=period,
        T0_Q=revival,
        Tlam_cl=(1.0 - m0_cl) * period * delta,
        Tlam_Q=(1.0 - m0_q) * revival,
        Delta=delta,
        mu=mu,
        M0_cl=m0_cl,
        M0_Q=m0_q,
        regime=classify_regime(spectrum.rho),
        zeta_sign=spectrum.zeta_sign,
    )
    _LOGGER.debug("Driven times at lambda=%s: %s", drive.lam, times)
    return times


def undriven_record(spectrum: SpectrumModel) -> RecurrenceTimes:
    """RecurrenceTimes of an unmodulated system without a resonance reference.

    Detuning and mu are undefined (nan); the driven times equal the undriven ones.
    """
    period, revival = undriven_times(spectrum)
    return RecurrenceTimes(
        T0_cl=period,
        T0_Q=revival,
        Tlam_cl=period,
        Tlam_Q=revival,
        Delta=math.nan,
        mu=math.nan,
        M0_cl=0.0,
        M0_Q=0.0,
        regime=classify_regime(spectrum.rho),
        zeta_sign=spectrum.zeta_sign,
    )


def driven_times_rho(
    rho: float,
    kbar: float,
    n_bar: float,
    gamma: int,
    energy: float,
    lam_v: float,
    order: int,
) -> RecurrenceTimes:
    """Driven recurrence times written in terms of rho = k - 2.

    Args:
        rho: Binding parameter k - 2
        kbar: Effective Planck constant
        n_bar: Mean quantum number
        gamma: Maslov index
        energy: Scaled energy of the mean level
        lam_v: Drive strength times the coupling matrix element
        order: Resonance order N

    Raises:
        RegimeError: If rho <= -2 (no bound motion to drive)
        DetuningSingularityError: If omega equals 1/N
        ResonanceSingularityError: If mu^2 equals 1
    """
    regime = classify_regime(rho)
    if regime is Regime.FREE:
        raise RegimeError("the free particle has no resonance", rho=rho)
    period, revival = undriven_times_rho(rho, kbar, n_bar, gamma, energy)
    shifted = n_bar + gamma / 4.0
    delta = _detuning_factor(
        frequency_omega_rho(rho, kbar, n_bar, gamma, energy), order
    )
    mu = order * rho * delta / (2.0 * (4.0 + rho) * shifted)
    _check_mu(mu, Delta=delta, N=order, n_bar=n_bar)

    coupling = lam_v * rho * delta**2 / (2.0 * (2.0 + rho) * energy)
    denominator = 1.0 - mu * mu
    classical = 0.5 * coupling**2 / denominator**2
    quantum = 0.5 * coupling**2 * (3.0 + mu * mu) / denominator**3
    return RecurrenceTimes(
        T0_cl=period,
        T0_Q=revival,
        Tlam_cl=(1.0 + classical) * period * delta,
        Tlam_Q=(1.0 - quantum) * revival,
        Delta=delta,
        mu=mu,
        M0_cl=-classical,
        M0_Q=quantum,
        regime=regime,
        zeta_sign=(rho > 0) - (rho < 0),
    )


def linear_potential_times(
    energy: float,
    kbar: float,
    n_bar: float,
    gamma: int,
    lam_v: float,
    order: int,
) -> RecurrenceTimes:
    """Recurrence times of the linear (k = 1) potential in its own closed form."""
    shifted = n_bar + gamma / 4.0
    omega = 2.0 * energy / (3.0 * kbar * shifted)
    period = 3.0 * math.pi * kbar * shifted / energy
    revival = 18.0 * math.pi * kbar * shifted**2 / energy
    delta = _detuning_factor(omega, order)
    mu = -order * delta / (6.0 * shifted)
    _check_mu(mu, Delta=delta, N=order, n_bar=n_bar)
    coupling = lam_v * delta**2 / (2.0 * energy)
    denominator = 1.0 - mu * mu
    classical = coupling**2 / (2.0 * denominator**2)
    quantum = coupling**2 * (3.0 + mu * mu) / (2.0 * denominator**3)
    return RecurrenceTimes(
        T0_cl=period,
        T0_Q=revival,
        Tlam_cl=(1.0 + classical) * period * delta,
        Tlam_Q=(1.0 - quantum) * revival,
        Delta=delta,
        mu=mu,
        M0_cl=-classical,
        M0_Q=quantum,
        regime=Regime.LOOSE,
        zeta_sign=-1,
    )


def times_from_quasienergy(
    epsilon: Callable[[float], float],
    kbar: float,
    step: float = QUASIENERGY_STENCIL_STEP,
) -> Tuple[float, float]:
    """Return (T1, T2) from finite differences of the quasienergy in n.

    Args:
        epsilon: Quasienergy as a function of the real level offset
        kbar: Effective Planck constant
        step: Stencil spacing in level offset

    Returns:
        T1 = 2 pi / omega1 and T2 = 2 pi / |omega2| with
        omega_j = (j! kbar)^-1 d^j epsilon / dn^j

    Raises:
        DegenerateSpectrumError: If the quasienergy has no curvature
    """
    values = [epsilon(step * offset) for offset in (-2, -1, 0, 1, 2)]
    first = (values[0] - 8.0 * values[1] + 8.0 * values[3] - values[4]) / (12.0 * step)
    second = (
        -values[0] + 16.0 * values[1] - 30.0 * values[2] + 16.0 * values[3] - values[4]
    ) / (12.0 * step**2)
    scale = max(abs(value) for value in values)
    if abs(second) * step**2 <= 1e-13 * max(scale, abs(first) * step):
        raise DegenerateSpectrumError(
            "quasienergy is linear in the level index", curvature=second
        )
    omega1 = first / kbar
    omega2 = second / (2.0 * kbar)
    return TWO_PI / omega1, TWO_PI / abs(omega2)


def derivative_times(
    spectrum: SpectrumModel,
    drive: DriveSpec,
    step: float = QUASIENERGY_STENCIL_STEP,
) -> Tuple[float, float]:
    """Driven times from the Mathieu quasienergies rather than the closed forms."""
    return times_from_quasienergy(
        lambda offset: quasienergy(spectrum, drive, offset).epsilon,
        spectrum.kbar,
        step,
    )


def sum_rule_check(spectrum: SpectrumModel, drive: DriveSpec) -> SumRuleResiduals:
    """Evaluate the tight and loose binding relations between the time ratios.

    The ratios are formed from the modification factors so that an infinite
    revival time cancels.
    """
    times = driven_times(spectrum, drive)
    ratio_cl = (1.0 - times.M0_cl) * times.Delta
    ratio_q = 1.0 - times.M0_Q
    return SumRuleResiduals(
        tight=0.75 * ratio_cl + 0.25 * ratio_q - 1.0,
        loose=ratio_cl - 0.25 * ratio_q,
        ratio_cl=ratio_cl,
        ratio_Q=ratio_q,
    )


def scaling_exponents(rho: float) -> ScalingExponents:
    """Predicted slopes against log(n_bar + gamma/4) and log(kbar)."""
    regime = classify_regime(rho)
    if regime is Regime.FREE:
        raise RegimeError("free particle has no finite time scales", rho=rho)
    kbar_slope = -rho / (4.0 + rho)
    return ScalingExponents(
        level_cl=-rho / (4.0 + rho),
        level_Q=4.0 / (4.0 + rho),
        kbar_cl=kbar_slope,
        kbar_Q=kbar_slope,
    )
