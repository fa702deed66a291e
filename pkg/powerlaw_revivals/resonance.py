"""Secular reduction of the driven spectrum to a pendulum.

Quasienergies of the N-th nonlinear resonance follow from Mathieu
characteristic values a_nu(q), computed from the tridiagonal recursion over
Floquet modes exp(i(nu + 2m)z). The brute-force pendulum matrix in the level
basis provides an independent check of the same quasienergies.
"""

from dataclasses import dataclass
import logging
import math
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import eigh, eigh_tridiagonal

from .const import (
    INTEGER_INDEX_TOL,
    MATHIEU_BASIS_MARGIN,
    MATHIEU_CONVERGENCE_STEP,
    MATHIEU_CONVERGENCE_TOL,
    MATHIEU_EDGE_TOL,
    MATHIEU_MAX_INDEX,
    SPAN_BOUNDARY_WEIGHT,
    SPAN_MARGIN,
    SPAN_MIN_PER_ORDER,
    SPAN_Q_FACTOR,
)
from .exceptions import (
    AmbiguityError,
    ConvergenceError,
    DegenerateSpectrumError,
    DomainError,
    RangeError,
    SpanError,
)
from .spectrum import PotentialSpec, SpectrumModel, frequency_omega, spacing_exponent

_LOGGER = logging.getLogger(__name__)


class DriveSpec(BaseModel):
    """Model for the periodic modulation lambda V(x) sin t."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    lam: float = Field(0.0, alias="lambda", ge=0)
    coupling: float = Field(1.0, alias="V_coupling")
    order: int = Field(1, alias="N", ge=1)

    @property
    def strength(self) -> float:
        """Product lambda * V entering the resonance couplings."""
        return self.lam * self.coupling

    @property
    def resonant_frequency(self) -> float:
        return 1.0 / self.order


@dataclass(frozen=True)
class MathieuResult:
    """Characteristic value a_nu(q) with the truncation that produced it."""

    q: float
    nu: float
    a_nu: float
    basis_size: int


@dataclass(frozen=True)
class QuasiEnergy:
    """Quasienergy of the resonance at one Floquet index."""

    epsilon: float
    nu: float
    q: float
    a_nu: float
    spectrum: SpectrumModel
    drive: DriveSpec


def default_basis_size(nu: float, q: float) -> int:
    return (
        2 * math.ceil(abs(nu))
        + MATHIEU_BASIS_MARGIN
        + math.ceil(SPAN_Q_FACTOR * math.sqrt(abs(q)))
    )


def _shifted_characteristic_values(
    nu: float, q: float, size: int
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    # diagonal holds (nu + 2m)^2 - nu^2 so that small shifts keep full precision
    modes = np.arange(-size, size + 1, dtype=float)
    diagonal = 4.0 * modes * (nu + modes)
    off_diagonal = np.full(2 * size, float(q))
    return eigh_tridiagonal(diagonal, off_diagonal)


def _even_branch(
    vectors: NDArray[np.float64], candidates: tuple[int, int], nu: int, size: int
) -> int:
    # the cosine-type solution satisfies c_m = c_(-nu-m)
    modes = np.arange(-size, size + 1)
    mirrors = -nu - modes
    inside = np.abs(mirrors) <= size
    scores = [
        float(np.dot(vectors[inside, column], vectors[mirrors[inside] + size, column]))
        for column in candidates
    ]
    return candidates[int(np.argmax(scores))]


def _band_shift(nu: float, q: float, size: int) -> float:
    # nu >= 0; the block's eigenvalues are a_|nu+2m| in ascending order, so
    # a_nu sits at position floor(nu) counted from the bottom
    shifts, vectors = _shifted_characteristic_values(nu, q, size)
    nearest = round(nu)
    offset = abs(nu - nearest)
    if offset < INTEGER_INDEX_TOL:
        if nearest == 0:
            return float(shifts[0])
        # b_r and a_r occupy positions r - 1 and r
        column = _even_branch(vectors, (nearest - 1, nearest), nearest, size)
        return float(shifts[column])

    if offset < MATHIEU_EDGE_TOL and nearest > 0:
        lower, upper = shifts[nearest - 1], shifts[nearest]
        if upper - lower > MATHIEU_CONVERGENCE_TOL * max(1.0, abs(nu * nu + upper)):
            raise AmbiguityError(
                "characteristic index sits on a band edge",
                candidates=(float(lower + nu * nu), float(upper + nu * nu)),
                nu=nu,
                q=q,
            )
    return float(shifts[math.floor(nu)])


def mathieu_char_value(
    nu: float, q: float, basis_size: Optional[int] = None
) -> MathieuResult:
    """Return the Mathieu characteristic value a_nu(q).

    Args:
        nu: Floquet characteristic index (real)
        q: Mathieu parameter
        basis_size: Number of modes kept on each side of m = 0

    Returns:
        The characteristic value of the band holding |nu|; at integer nu the
        cosine-type edge a_r rather than b_r

    Raises:
        DomainError: If the basis is smaller than 2 ceil(|nu|) + 20
        RangeError: If |nu| is too large for the mode expansion
        ConvergenceError: If enlarging the basis moves the value beyond tolerance
        AmbiguityError: If nu is within 1e-9 of an integer without equalling it
    """
    if abs(nu) > MATHIEU_MAX_INDEX or not math.isfinite(nu):
        raise RangeError("characteristic index too large", nu=nu)
    minimum = 2 * math.ceil(abs(nu)) + MATHIEU_BASIS_MARGIN
    if basis_size is None:
        basis_size = default_basis_size(nu, q)
    if basis_size < minimum:
        raise DomainError(
            "basis too small for characteristic index",
            basis_size=basis_size,
            minimum=minimum,
        )

    if q == 0:
        return MathieuResult(q=0.0, nu=nu, a_nu=nu * nu, basis_size=basis_size)

    shift = _band_shift(abs(nu), q, basis_size)
    check = _band_shift(abs(nu), q, basis_size + MATHIEU_CONVERGENCE_STEP)
    if abs(check - shift) > MATHIEU_CONVERGENCE_TOL * max(1.0, abs(nu * nu + shift)):
        raise ConvergenceError(
            "characteristic value not converged",
            nu=nu,
            q=q,
            basis_size=basis_size,
            change=abs(check - shift),
        )
    return MathieuResult(q=q, nu=nu, a_nu=nu * nu + shift, basis_size=basis_size)


def _require_curvature(spectrum: SpectrumModel) -> None:
    if spectrum.zeta == 0:
        raise DegenerateSpectrumError(
            "linear spectrum has no pendulum reduction",
            k=spectrum.potential.exponent_k,
        )


def resonance_index(spectrum: SpectrumModel, order: int, n_offset: float) -> float:
    """Floquet index nu of the level n_bar + n_offset inside resonance N."""
    _require_curvature(spectrum)
    detuning = spectrum.omega - 1.0 / order
    return 2.0 * n_offset / order + 2.0 * detuning / (
        order * spectrum.kbar * spectrum.zeta
    )


def mathieu_q(spectrum: SpectrumModel, drive: DriveSpec) -> float:
    _require_curvature(spectrum)
    return (
        4.0 * drive.strength / (drive.order**2 * spectrum.kbar**2 * spectrum.zeta)
    )


def band_scale(spectrum: SpectrumModel, drive: DriveSpec) -> float:
    """Prefactor N^2 kbar^2 zeta / 8 converting a_nu into quasienergy."""
    return drive.order**2 * spectrum.kbar**2 * spectrum.zeta / 8.0


def quasienergy(
    spectrum: SpectrumModel, drive: DriveSpec, n_offset: float
) -> QuasiEnergy:
    """Return the quasienergy of level n_bar + n_offset.

    Raises:
        DegenerateSpectrumError: If the spectrum is linear (zeta = 0)
    """
    _require_curvature(spectrum)
    nu = resonance_index(spectrum, drive.order, n_offset)
    q = mathieu_q(spectrum, drive)
    result = mathieu_char_value(nu, q)
    detuning = spectrum.omega - drive.resonant_frequency
    epsilon = band_scale(spectrum, drive) * result.a_nu - detuning**2 / (
        2.0 * spectrum.zeta
    )
    return QuasiEnergy(
        epsilon=epsilon,
        nu=nu,
        q=q,
        a_nu=result.a_nu,
        spectrum=spectrum,
        drive=drive,
    )


def default_span(spectrum: SpectrumModel, drive: DriveSpec) -> int:
    order = drive.order
    if spectrum.zeta == 0:
        return SPAN_MIN_PER_ORDER * order
    q = mathieu_q(spectrum, drive)
    return max(
        SPAN_MIN_PER_ORDER * order,
        math.ceil(SPAN_Q_FACTOR * math.sqrt(abs(q)) * order + SPAN_MARGIN),
    )


def pendulum_matrix_eigs(
    spectrum: SpectrumModel, drive: DriveSpec, span: Optional[int] = None
) -> NDArray[np.float64]:
    """Diagonalise the resonance Hamiltonian in the level basis.

    Levels n_bar - span .. n_bar + span carry the diagonal
    kbar m (omega - 1/N) + (kbar^2 zeta / 2) m^2 and are coupled to n +- N with
    the Hermitian pair +-i lambda V / 2.

    Returns:
        Sorted quasienergies

    Raises:
        DomainError: If span < 10 N
        SpanError: If states centred in the inner half reach the matrix edge
    """
    order = drive.order
    if span is None:
        span = default_span(spectrum, drive)
    if span < SPAN_MIN_PER_ORDER * order:
        raise DomainError("span must be at least 10 N", span=span, N=order)

    offsets = np.arange(-span, span + 1, dtype=float)
    detuning = spectrum.omega - drive.resonant_frequency
    diagonal = (
        spectrum.kbar * offsets * detuning
        + 0.5 * spectrum.kbar**2 * spectrum.zeta * offsets**2
    )
    hamiltonian = np.diag(diagonal).astype(complex)
    upper = np.arange(offsets.size - order)
    hamiltonian[upper, upper + order] = 0.5j * drive.strength
    hamiltonian[upper + order, upper] = -0.5j * drive.strength

    energies, vectors = eigh(hamiltonian)
    probabilities = np.abs(vectors) ** 2
    centres = offsets @ probabilities
    edge = np.concatenate([probabilities[:order], probabilities[-order:]]).sum(axis=0)
    contaminated = (np.abs(centres) <= span / 2) & (edge > SPAN_BOUNDARY_WEIGHT)
    if np.any(contaminated):
        raise SpanError(
            "pendulum states reach the edge of the level window",
            span=span,
            edge_weight=float(edge[contaminated].max()),
        )
    return energies


def resonant_level(potential: PotentialSpec, kbar: float, order: int) -> float:
    """Real level index where omega(n) equals 1/N.

    Raises:
        DegenerateSpectrumError: If the frequency does not depend on n
    """
    exponent = spacing_exponent(potential.exponent_k)
    if exponent == 0:
        raise DegenerateSpectrumError(
            "harmonic frequency does not select a level", k=potential.exponent_k
        )
    reference_shift = potential.maslov_gamma / 4.0
    reference_omega = frequency_omega(potential, kbar, 0.0)
    shifted = reference_shift * (1.0 / (order * reference_omega)) ** (1.0 / exponent)
    return shifted - reference_shift
