"""Grid eigensolver and split-operator propagator for the scaled Schrodinger equation.

Both solvers share one discretisation: the potential acts pointwise and the
kinetic energy -(kbar^2/2) d^2/dx^2 acts diagonally in the spectral basis of
the grid (Fourier modes on periodic grids, sine modes between hard walls).
The eigenstates are therefore exact stationary states of the propagator up to
the splitting error.
"""

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        """Backport of enum.StrEnum."""

        def __str__(self) -> str:
            return str(self.value)

from dataclasses import dataclass, field
import logging
import math
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import fft
from scipy.linalg import circulant, eigh

from .const import (
    BOUNDARY_FRACTION,
    BOUNDARY_PROBABILITY_TOL,
    DRIVE_PERIOD,
    GRID_EXTENT_FACTOR,
    MAX_AUTO_GRID_POINTS,
    MIN_GRID_POINTS,
    MIN_STEPS_PER_DRIVE_PERIOD,
    MOMENTUM_RESOLUTION_FACTOR,
    NORM_DRIFT_TOL,
    POTENTIAL_CEILING,
    TRUNCATION_TOL,
    TURNING_POINT_FRACTION,
)
from .exceptions import (
    BoundaryReflectionError,
    DomainError,
    DomainSizeError,
    GridMismatchError,
    StabilityError,
    TruncationError,
)
from .resonance import DriveSpec
from .spectrum import DomainKind, PotentialSpec, wkb_energy

_LOGGER = logging.getLogger(__name__)

_SNAPSHOT_HEADER = np.dtype([("n_points", "<i8"), ("x_min", "<f8"), ("x_max", "<f8"), ("t", "<f8")])


class Boundary(StrEnum):
    """Boundary condition of the spatial grid."""

    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"


class DriveShape(StrEnum):
    """Spatial profile V(x) of the modulation."""

    POTENTIAL = "potential"
    LINEAR = "linear"


class Grid(BaseModel):
    """Model for a uniform spatial grid.

    Periodic grids hold x_min + j dx for j < n_points. Dirichlet grids place
    hard walls at x_min and x_max and hold the n_points interior nodes.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    x_min: float
    x_max: float
    n_points: int = Field(..., ge=MIN_GRID_POINTS)
    boundary: Boundary = Boundary.PERIODIC

    @field_validator("n_points")
    @classmethod
    def _check_power_of_two(cls, value: int) -> int:
        if value & (value - 1):
            raise ValueError(f"n_points must be a power of two, got {value}")
        return value

    @model_validator(mode="after")
    def _check_bounds(self) -> "Grid":
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min={self.x_min} must be below x_max={self.x_max}")
        return self

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        if self.boundary is Boundary.DIRICHLET:
            return self.length / (self.n_points + 1)
        return self.length / self.n_points

    @property
    def x(self) -> NDArray[np.float64]:
        if self.boundary is Boundary.DIRICHLET:
            return self.x_min + self.dx * np.arange(1, self.n_points + 1)
        return self.x_min + self.dx * np.arange(self.n_points)

    def wave_numbers(self) -> NDArray[np.float64]:
        """Wave numbers of the spectral basis, in the order used by the transforms."""
        if self.boundary is Boundary.DIRICHLET:
            return math.pi * np.arange(1, self.n_points + 1) / self.length
        return 2.0 * math.pi * fft.fftfreq(self.n_points, d=self.dx)

    def kinetic_energies(self, kbar: float) -> NDArray[np.float64]:
        return 0.5 * (kbar * self.wave_numbers()) ** 2

    def to_spectral(self, psi: NDArray[np.complex128]) -> NDArray[np.complex128]:
        if self.boundary is Boundary.DIRICHLET:
            return _sine_transform(psi)
        return fft.fft(psi)

    def from_spectral(self, phi: NDArray[np.complex128]) -> NDArray[np.complex128]:
        if self.boundary is Boundary.DIRICHLET:
            return _sine_transform(phi)
        return fft.ifft(phi)

    def kinetic_matrix(self, kbar: float) -> NDArray[np.float64]:
        """Dense kinetic operator consistent with the spectral transforms."""
        energies = self.kinetic_energies(kbar)
        if self.boundary is Boundary.DIRICHLET:
            sines = fft.dst(np.eye(self.n_points), type=1, norm="ortho", axis=0)
            return sines @ (energies[:, None] * sines)
        return circulant(fft.ifft(energies).real)

    def inner(self, bra: NDArray, ket: NDArray) -> complex:
        return complex(np.vdot(bra, ket) * self.dx)

    def edge_mask(self, wall_at_origin: bool) -> NDArray[np.bool_]:
        """Outer fraction of the grid watched for boundary reflection."""
        width = max(1, int(BOUNDARY_FRACTION * self.n_points))
        mask = np.zeros(self.n_points, dtype=bool)
        mask[-width:] = True
        if not wall_at_origin:
            mask[:width] = True
        return mask


def _sine_transform(values: NDArray) -> NDArray[np.complex128]:
    # orthonormal DST-I is its own inverse
    return fft.dst(values.real, type=1, norm="ortho") + 1j * fft.dst(
        values.imag, type=1, norm="ortho"
    )


@dataclass
class WaveState:
    """Class for holding a wave function sampled on a grid."""

    psi: NDArray[np.complex128]
    t: float
    norm: float
    grid: Grid

    @classmethod
    def on_grid(cls, grid: Grid, psi: ArrayLike, t: float = 0.0) -> "WaveState":
        amplitudes = np.asarray(psi, dtype=complex)
        if amplitudes.shape != (grid.n_points,):
            raise GridMismatchError(
                "amplitudes do not match the grid",
                shape=amplitudes.shape,
                n_points=grid.n_points,
            )
        norm = float(np.sum(np.abs(amplitudes) ** 2) * grid.dx)
        return cls(psi=amplitudes, t=float(t), norm=norm, grid=grid)

    def normalized(self) -> "WaveState":
        return WaveState.on_grid(self.grid, self.psi / math.sqrt(self.norm), self.t)


@dataclass
class EigenBasis:
    """Class for holding the lowest eigenstates of the unmodulated Hamiltonian."""

    energies: NDArray[np.float64]
    states: NDArray[np.float64]
    potential: PotentialSpec
    kbar: float
    grid: Grid = field(repr=False)

    @property
    def n_levels(self) -> int:
        return len(self.energies)

    def project(self, state: WaveState) -> NDArray[np.complex128]:
        """Amplitudes <n|psi> of a state on the basis grid."""
        if state.grid != self.grid:
            raise GridMismatchError("state and basis live on different grids")
        return self.states @ state.psi * self.grid.dx

    def expectation_energy(self, state: WaveState) -> float:
        populations = np.abs(self.project(state)) ** 2
        return float(populations @ self.energies / populations.sum())


def grid_potential(potential: PotentialSpec, x: ArrayLike) -> NDArray[np.float64]:
    """Pointwise potential, clipped so steep walls stay finite."""
    with np.errstate(over="ignore"):
        values = potential.evaluate(x)
    return np.minimum(values, POTENTIAL_CEILING)


def drive_profile(
    shape: DriveShape, potential: PotentialSpec, x: ArrayLike
) -> NDArray[np.float64]:
    if shape is DriveShape.LINEAR:
        return np.asarray(x, dtype=float)
    return grid_potential(potential, x)


def turning_point(potential: PotentialSpec, energy: float) -> float:
    return (energy / potential.v0) ** (1.0 / potential.exponent_k)


def _check_domain(potential: PotentialSpec, grid: Grid) -> None:
    if potential.domain_kind is DomainKind.TRUNCATED and (
        grid.x_min != 0 or grid.boundary is not Boundary.DIRICHLET
    ):
        raise DomainError(
            "truncated potentials need a hard-wall grid starting at x=0",
            x_min=grid.x_min,
            boundary=grid.boundary.value,
        )


def auto_grid(
    potential: PotentialSpec,
    kbar: float,
    n_levels: int,
    n_points: Optional[int] = None,
) -> Grid:
    """Grid holding the lowest n_levels states with turning points well inside.

    The extent is 1.6 times the outermost turning point and the point count is
    the power of two resolving six times the largest classical wave number.
    Both ends are hard walls: x = 0 and x_max for truncated potentials, and
    -x_max and x_max for symmetric ones.
    """
    top_energy = wkb_energy(potential, kbar, n_levels - 1)
    extent = GRID_EXTENT_FACTOR * turning_point(potential, top_energy)
    truncated = potential.domain_kind is DomainKind.TRUNCATED
    span = extent if truncated else 2.0 * extent
    if n_points is None:
        wave_number = MOMENTUM_RESOLUTION_FACTOR * math.sqrt(2.0 * top_energy) / kbar
        needed = max(span * wave_number / math.pi, MIN_GRID_POINTS)
        n_points = min(2 ** math.ceil(math.log2(needed)), MAX_AUTO_GRID_POINTS)
    grid = Grid(
        x_min=0.0 if truncated else -extent,
        x_max=extent,
        n_points=n_points,
        boundary=Boundary.DIRICHLET,
    )
    _LOGGER.debug("Auto grid for %d levels: %s", n_levels, grid)
    return grid


def _oriented(states: NDArray[np.float64]) -> NDArray[np.float64]:
    # outermost lobe positive, so equal-phase superpositions gather at the
    # outer turning point
    for row in states:
        magnitude = np.abs(row)
        outer = np.nonzero(magnitude >= 0.5 * magnitude.max())[0][-1]
        if row[outer] < 0:
            row *= -1.0
    return states


def solve_eigen(
    potential: PotentialSpec, kbar: float, grid: Grid, n_levels: int
) -> EigenBasis:
    """Diagonalise H0 = -(kbar^2/2) d^2/dx^2 + V0 |x|^k on the grid.

    Args:
        potential: The power-law potential
        kbar: Effective Planck constant
        grid: Spatial grid; hard-wall grids are required for truncated potentials
        n_levels: Number of lowest states to keep

    Returns:
        Energies in ascending order and states normalised to sum |psi|^2 dx = 1

    Raises:
        DomainSizeError: If the highest turning point exceeds 0.7 of the half width
    """
    _check_domain(potential, grid)
    if not 0 < n_levels <= grid.n_points:
        raise DomainError("n_levels must fit on the grid", n_levels=n_levels)

    top_turning_point = turning_point(potential, wkb_energy(potential, kbar, n_levels - 1))
    if potential.domain_kind is DomainKind.TRUNCATED:
        half_width = grid.x_max
    else:
        half_width = min(-grid.x_min, grid.x_max)
    if top_turning_point > TURNING_POINT_FRACTION * half_width:
        raise DomainSizeError(
            "grid too small for the requested levels",
            suggested_x_max=GRID_EXTENT_FACTOR * top_turning_point,
            turning_point=top_turning_point,
            half_width=half_width,
        )

    hamiltonian = grid.kinetic_matrix(kbar) + np.diag(grid_potential(potential, grid.x))
    energies, vectors = eigh(hamiltonian, subset_by_index=[0, n_levels - 1])
    states = _oriented(vectors.T / math.sqrt(grid.dx))
    _LOGGER.debug(
        "Solved %d levels on %d points: E_0=%s E_top=%s",
        n_levels,
        grid.n_points,
        energies[0],
        energies[-1],
    )
    return EigenBasis(
        energies=energies, states=states, potential=potential, kbar=kbar, grid=grid
    )


def _packet_weights(n_bar: float, sigma_n: float, n_max: int) -> NDArray[np.float64]:
    levels = np.arange(n_max, dtype=float)
    return np.exp(-((levels - n_bar) ** 2) / (2.0 * sigma_n**2))


def build_wavepacket(basis: EigenBasis, n_bar: float, sigma_n: float) -> WaveState:
    """Superpose eigenstates with populations exp(-(n - n_bar)^2 / (2 sigma_n^2)).

    Raises:
        DomainError: If n_bar + 4 sigma_n does not fit in the basis
        TruncationError: If the basis captures less than 1 - 1e-8 of the weight
    """
    if not sigma_n > 0:
        raise DomainError("sigma_n must be positive", sigma_n=sigma_n)
    if n_bar + 4.0 * sigma_n >= basis.n_levels:
        raise DomainError(
            "packet extends beyond the basis",
            n_bar=n_bar,
            sigma_n=sigma_n,
            n_levels=basis.n_levels,
        )
    reference = _packet_weights(
        n_bar, sigma_n, max(basis.n_levels, math.ceil(n_bar + 40.0 * sigma_n) + 2)
    )
    captured = reference[: basis.n_levels].sum() / reference.sum()
    if captured < 1.0 - TRUNCATION_TOL:
        raise TruncationError(
            "basis truncates the packet",
            captured=float(captured),
            n_levels=basis.n_levels,
        )
    amplitudes = np.sqrt(reference[: basis.n_levels])
    psi = amplitudes @ basis.states
    return WaveState.on_grid(basis.grid, psi).normalized()


def gaussian_packet(
    grid: Grid, x0: float, p0: float, width: float, kbar: float
) -> WaveState:
    """Minimum-uncertainty packet centred at (x0, p0) with position width."""
    if not width > 0:
        raise DomainError("width must be positive", width=width)
    x = grid.x
    psi = np.exp(-((x - x0) ** 2) / (4.0 * width**2) + 1j * p0 * (x - x0) / kbar)
    return WaveState.on_grid(grid, psi).normalized()


def evolve_in_basis(
    basis: EigenBasis, coefficients: ArrayLike, times: Iterable[float]
) -> Iterator[WaveState]:
    """Exact evolution under H0 of a superposition of basis states."""
    amplitudes = np.asarray(coefficients, dtype=complex)
    for t in times:
        phases = np.exp(-1j * basis.energies * t / basis.kbar)
        yield WaveState.on_grid(basis.grid, (amplitudes * phases) @ basis.states, t)


def propagate(
    state: WaveState,
    potential: PotentialSpec,
    drive: DriveSpec,
    kbar: float,
    dt: float,
    n_steps: int,
    drive_shape: DriveShape = DriveShape.POTENTIAL,
    stride: int = 1,
    check_boundary: bool = True,
) -> Iterator[WaveState]:
    """Evolve a state under H0 + lambda V(x) sin t with Strang splitting.

    The initial state is yielded first, then every stride-th step. Half
    potential kicks use the drive evaluated at the midpoint of each step, so a
    run with -dt retraces a run with dt.

    Raises:
        DomainError: If a driven run resolves the drive period with fewer
            than 200 steps
        StabilityError: If the norm drifts by more than 1e-6
        BoundaryReflectionError: If the outer 5% of the grid holds probability
            above 1e-4
    """
    grid = state.grid
    _check_domain(potential, grid)
    if not kbar > 0:
        raise DomainError("kbar must be strictly positive", kbar=kbar)
    if stride < 1:
        raise DomainError("stride must be positive", stride=stride)
    max_step = DRIVE_PERIOD / MIN_STEPS_PER_DRIVE_PERIOD
    if drive.lam and abs(dt) > max_step * (1.0 + 1e-12):
        raise DomainError(
            "time step does not resolve the drive period",
            dt=dt,
            max_dt=max_step,
        )

    x = grid.x
    static = grid_potential(potential, x)
    profile = drive_profile(drive_shape, potential, x)
    kinetic_phase = np.exp(-1j * grid.kinetic_energies(kbar) * dt / kbar)
    half_kick = -0.5j * dt / kbar
    static_kick = np.exp(half_kick * static)
    edges = grid.edge_mask(potential.domain_kind is DomainKind.TRUNCATED)

    _LOGGER.debug(
        "Propagating %d steps of dt=%s with lambda=%s (%s drive)",
        n_steps,
        dt,
        drive.lam,
        drive_shape.value,
    )
    psi = state.psi.copy()
    yield state
    for step in range(1, n_steps + 1):
        if drive.lam:
            midpoint = state.t + (step - 0.5) * dt
            kick = np.exp(half_kick * (static + drive.lam * profile * math.sin(midpoint)))
        else:
            kick = static_kick
        psi *= kick
        psi = grid.from_spectral(kinetic_phase * grid.to_spectral(psi))
        psi *= kick

        if step % stride:
            continue
        current = WaveState.on_grid(grid, psi.copy(), state.t + step * dt)
        if abs(current.norm - state.norm) > NORM_DRIFT_TOL:
            raise StabilityError(
                "norm drifted during propagation", t=current.t, norm=current.norm
            )
        if check_boundary:
            edge_probability = float(np.sum(np.abs(psi[edges]) ** 2) * grid.dx)
            if edge_probability > BOUNDARY_PROBABILITY_TOL:
                raise BoundaryReflectionError(
                    "wave function reached the grid edge",
                    t=current.t,
                    edge_probability=edge_probability,
                )
        yield current


def matrix_element(
    basis: EigenBasis, drive_shape: DriveShape, n: int, m: int
) -> float:
    """Quadrature of <n|V(x)|m> on the basis grid."""
    profile = drive_profile(drive_shape, basis.potential, basis.grid.x)
    return float(basis.states[n] @ (profile * basis.states[m]) * basis.grid.dx)


def coupling_estimate(
    basis: EigenBasis, drive_shape: DriveShape, n_bar: int, order: int
) -> float:
    """Mean of |<n_bar|V|n_bar + N>| and |<n_bar|V|n_bar - N>|."""
    if n_bar - order < 0 or n_bar + order >= basis.n_levels:
        raise DomainError(
            "resonance neighbours outside the basis",
            n_bar=n_bar,
            N=order,
            n_levels=basis.n_levels,
        )
    upper = abs(matrix_element(basis, drive_shape, n_bar, n_bar + order))
    lower = abs(matrix_element(basis, drive_shape, n_bar, n_bar - order))
    _LOGGER.debug("Couplings around n_bar=%s: upper=%s lower=%s", n_bar, upper, lower)
    return 0.5 * (upper + lower)


def write_snapshot(state: WaveState, target: Union[str, Path, BinaryIO]) -> None:
    """Write one binary record: header, then interleaved little-endian re/im."""
    header = np.array(
        [(state.grid.n_points, state.grid.x_min, state.grid.x_max, state.t)],
        dtype=_SNAPSHOT_HEADER,
    )
    payload = header.tobytes() + state.psi.astype("<c16").tobytes()
    if isinstance(target, (str, Path)):
        Path(target).write_bytes(payload)
    else:
        target.write(payload)


def read_snapshot(
    source: Union[str, Path, BinaryIO], boundary: Boundary = Boundary.PERIODIC
) -> WaveState:
    data = Path(source).read_bytes() if isinstance(source, (str, Path)) else source.read()
    header = np.frombuffer(data, dtype=_SNAPSHOT_HEADER, count=1)[0]
    n_points = int(header["n_points"])
    psi = np.frombuffer(
        data, dtype="<c16", count=n_points, offset=_SNAPSHOT_HEADER.itemsize
    )
    grid = Grid(
        x_min=float(header["x_min"]),
        x_max=float(header["x_max"]),
        n_points=n_points,
        boundary=boundary,
    )
    return WaveState.on_grid(grid, psi.astype(complex), float(header["t"]))
