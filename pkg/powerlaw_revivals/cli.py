"""Command line driver.

Data (CSV or JSON) goes to stdout or to files under --out-dir; log records go
to stderr. Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 no recurrence found.
"""

import argparse
import csv
from datetime import datetime, timezone
import io
import json
import logging
import math
from pathlib import Path
import sys
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import colorlog
import numpy as np
from pydantic import ValidationError

from .analysis import (
    Autocorrelation,
    Detection,
    DetectionStatus,
    RecurrenceReport,
    autocorrelate,
    compare,
    detect_classical_period,
    detect_revival,
    write_autocorrelation_csv,
)
from .config import (
    ExperimentConfig,
    document_digest,
    load_document,
    sweep_documents,
    validate_document,
)
from .const import (
    DOMAIN,
    EXIT_CONFIG_ERROR,
    EXIT_NO_RECURRENCE,
    EXIT_NUMERICAL_ERROR,
    EXIT_OK,
    MIN_PERIODS_IN_RUN,
    PACKET_SIGMA_WIDTH,
    REVIVAL_RUN_FACTOR,
    UNDRIVEN_RUN_PERIODS,
    VERSION,
)
from .coordinator import SweepCoordinator, SweepResult
from .exceptions import ConfigError, DomainError, RevivalsError, SingularityError
from .formatting import csv_cell, encode_mapping
from .quantum import (
    EigenBasis,
    WaveState,
    auto_grid,
    build_wavepacket,
    coupling_estimate,
    gaussian_packet,
    propagate,
    solve_eigen,
    write_snapshot,
)
from .recurrence import (
    RecurrenceTimes,
    driven_times,
    scaling_exponents,
    undriven_record,
    undriven_times,
)
from .resonance import DriveSpec, mathieu_char_value
from .spectrum import SpectrumModel, build_spectrum_model, energy_levels

_LOGGER = logging.getLogger(__name__)

LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"

SPECTRUM_COLUMNS = ("n", "E_wkb", "E_numeric", "dE_n")
SWEEP_COLUMNS = ("parameter", "value", "quantity", "result")


def setup_logging(verbosity: int = 0) -> None:
    """Send colored records to stderr; -v for DEBUG, -q for WARNING."""
    level = logging.INFO
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.WARNING
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_powerlaw_revivals", False):
            root.removeHandler(handler)
    handler = colorlog.StreamHandler(sys.stderr)
    handler.setFormatter(colorlog.ColoredFormatter(LOG_FORMAT))
    handler._powerlaw_revivals = True
    root.addHandler(handler)
    root.setLevel(level)


# Rendering


def render_table(header: Sequence[str], rows: Iterable[Sequence[Any]], fmt: str) -> str:
    rows = list(rows)
    if fmt == "json":
        records = [encode_mapping(dict(zip(header, row))) for row in rows]
        return json.dumps(records, indent=2) + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([csv_cell(cell) for cell in row])
    return buffer.getvalue()


def render_mapping(values: Dict[str, Any], fmt: str) -> str:
    if fmt == "csv":
        return render_table(("key", "value"), values.items(), "csv")
    return json.dumps(encode_mapping(values), indent=2) + "\n"


def publish(text: str, out_dir: Optional[Path], filename: str) -> None:
    """Write data to out_dir/filename, or to stdout without an output directory."""
    if out_dir is None:
        sys.stdout.write(text)
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / filename).write_text(text, encoding="utf-8")
    _LOGGER.info("Wrote %s", out_dir / filename)


def write_metadata(
    out_dir: Optional[Path], command: str, document: Optional[Dict[str, Any]], **extra: Any
) -> None:
    """Provenance record kept apart from the data files."""
    if out_dir is None:
        return
    metadata: Dict[str, Any] = {
        "package": DOMAIN,
        "version": VERSION,
        "command": command,
        "created": datetime.now(timezone.utc).isoformat(),
    }
    if document is not None:
        metadata["config_sha256"] = document_digest(document)
        metadata["config"] = document
    metadata.update(encode_mapping(extra))
    publish(json.dumps(metadata, indent=2) + "\n", out_dir, "metadata.json")


# Computations shared by the commands and the sweep jobs


def level_count(config: ExperimentConfig) -> int:
    """Basis size covering the packet out to six widths."""
    if config.n_levels is not None:
        return config.n_levels
    return math.ceil(config.n_bar + PACKET_SIGMA_WIDTH * config.sigma_n) + 2


def spectrum_for(config: ExperimentConfig) -> SpectrumModel:
    return build_spectrum_model(config.potential, config.kbar, config.n_bar)


def basis_for(config: ExperimentConfig, n_levels: Optional[int] = None) -> EigenBasis:
    n_levels = level_count(config) if n_levels is None else n_levels
    grid = config.grid or auto_grid(config.potential, config.kbar, n_levels)
    return solve_eigen(config.potential, config.kbar, grid, n_levels)


def drive_for(config: ExperimentConfig, basis: Optional[EigenBasis] = None) -> DriveSpec:
    """Drive parameters, with V estimated from the eigenbasis when requested."""
    if not config.drive.estimate_coupling:
        return config.drive.spec()
    if basis is None:
        basis = basis_for(config)
    coupling = coupling_estimate(
        basis, config.drive.shape, int(round(config.n_bar)), config.drive.order
    )
    _LOGGER.info("Estimated coupling V=%s", coupling)
    return config.drive.spec(coupling)


def compute_spectrum(config: ExperimentConfig) -> List[Tuple[Any, ...]]:
    n_levels = level_count(config)
    wkb = energy_levels(config.potential, config.kbar, n_levels)
    numeric: Optional[np.ndarray] = None
    if config.outputs.numeric_spectrum:
        numeric = basis_for(config, n_levels).energies
    rows = []
    for n, energy in enumerate(wkb):
        spacing = energy - wkb[n - 1] if n else None
        rows.append((n, energy, None if numeric is None else numeric[n], spacing))
    return rows


def compute_times(config: ExperimentConfig) -> RecurrenceTimes:
    """Driven times; an undriven point sitting on a resonance falls back to T0 only."""
    spectrum = spectrum_for(config)
    drive = drive_for(config)
    try:
        return driven_times(spectrum, drive)
    except SingularityError as err:
        if drive.lam:
            raise
        _LOGGER.warning("Undriven point has no resonance reference: %s", err)
        return undriven_record(spectrum)


def run_plan(config: ExperimentConfig, spectrum: SpectrumModel) -> Tuple[float, int]:
    """Return (dt, n_steps) resolving both the drive and the classical period."""
    period, revival = undriven_times(spectrum)
    dt = config.run.time_step(period)

    total = config.run.requested_time()
    if total is None:
        if math.isfinite(revival):
            total = max(REVIVAL_RUN_FACTOR * revival, MIN_PERIODS_IN_RUN * period)
        else:
            total = UNDRIVEN_RUN_PERIODS * period
    if not math.isfinite(total):
        raise DomainError("run length is undefined; set run.total_time", period=period)
    return dt, math.ceil(total / dt)


def _with_snapshots(
    trajectory: Iterable[WaveState], directory: Path, stride: int
) -> Iterator[WaveState]:
    directory.mkdir(parents=True, exist_ok=True)
    for index, state in enumerate(trajectory):
        if index % stride == 0:
            write_snapshot(state, directory / f"psi_{index:07d}.bin")
        yield state


def run_evolution(
    config: ExperimentConfig, snapshot_dir: Optional[Path] = None
) -> Tuple[RecurrenceReport, Autocorrelation]:
    """Propagate the configured packet and compare detected with predicted times."""
    spectrum = spectrum_for(config)
    basis: Optional[EigenBasis] = None
    if config.packet.kind == "gaussian":
        state = gaussian_packet(
            config.grid, config.packet.x0, config.packet.p0, config.packet.width, config.kbar
        )
    else:
        basis = basis_for(config)
        state = build_wavepacket(basis, config.n_bar, config.sigma_n)
    drive = drive_for(config, basis)

    dt, n_steps = run_plan(config, spectrum)
    stride = config.run.sample_stride
    _LOGGER.info("Evolving %d steps of dt=%.6g on %d points", n_steps, dt, state.grid.n_points)
    trajectory: Iterable[WaveState] = propagate(
        state,
        config.potential,
        drive,
        config.kbar,
        dt,
        n_steps,
        drive_shape=config.drive.shape,
        stride=stride,
    )
    if snapshot_dir is not None:
        trajectory = _with_snapshots(trajectory, snapshot_dir, config.outputs.snapshot_stride)
    ac = autocorrelate(
        trajectory,
        metadata={"dt": dt, "n_steps": n_steps, "stride": stride, "n_points": state.grid.n_points},
    )

    classical = detect_classical_period(ac)
    if classical.usable:
        revival = detect_revival(ac, classical.time)
    else:
        revival = Detection(
            time=math.nan,
            uncertainty=math.nan,
            status=DetectionStatus.NO_RECURRENCE,
            diagnostics={"reason": "no classical period"},
        )
    return compare(classical, revival, spectrum, drive), ac


def report_exit_code(report: RecurrenceReport) -> int:
    if DetectionStatus.NO_RECURRENCE.value in report.status.values():
        return EXIT_NO_RECURRENCE
    return EXIT_OK


def fitted_slopes(
    parameter: str,
    configs: Sequence[ExperimentConfig],
    results: Sequence[SweepResult[Dict[str, Any]]],
    quantities: Sequence[str],
) -> Dict[str, Any]:
    """Log-log slopes of the swept quantities against ln(n_bar + gamma/4) or ln(kbar)."""
    if parameter == "n_bar":
        abscissa = [
            math.log(config.n_bar + config.potential.maslov_gamma / 4.0) for config in configs
        ]
    elif parameter == "kbar":
        abscissa = [math.log(config.kbar) for config in configs]
    else:
        return {}

    summary: Dict[str, Any] = {"parameter": parameter}
    for quantity in quantities:
        points = [
            (x, math.log(result.result[quantity]))
            for x, result in zip(abscissa, results)
            if result.ok
            and isinstance(result.result.get(quantity), float)
            and math.isfinite(result.result[quantity])
            and result.result[quantity] > 0
        ]
        if len(points) < 2:
            summary[f"slope.{quantity}"] = None
            continue
        xs, ys = zip(*points)
        summary[f"slope.{quantity}"] = float(np.polyfit(xs, ys, 1)[0])

    try:
        predicted = scaling_exponents(configs[0].potential.rho)
    except RevivalsError:
        return summary
    if parameter == "n_bar":
        summary["predicted.level_cl"] = predicted.level_cl
        summary["predicted.level_Q"] = predicted.level_Q
    else:
        summary["predicted.kbar_cl"] = predicted.kbar_cl
        summary["predicted.kbar_Q"] = predicted.kbar_Q
    return summary


# Commands


def _load(args: argparse.Namespace) -> Tuple[Dict[str, Any], ExperimentConfig]:
    if args.config is None:
        raise ConfigError(f"--config is required for '{args.command}'")
    document = load_document(args.config, args.set)
    return document, validate_document(document)


def _sweep_points(document: Dict[str, Any]) -> List[Tuple[Any, ExperimentConfig]]:
    return [(value, validate_document(point)) for value, point in sweep_documents(document)]


def _run_sweep(
    args: argparse.Namespace,
    points: List[Tuple[Any, ExperimentConfig]],
    job: Callable[[ExperimentConfig], Dict[str, Any]],
) -> List[SweepResult[Dict[str, Any]]]:
    return SweepCoordinator(args.jobs).run(points, job)


def cmd_spectrum(args: argparse.Namespace) -> int:
    document, config = _load(args)
    rows = compute_spectrum(config)
    if not config.outputs.numeric_spectrum:
        header = [column for column in SPECTRUM_COLUMNS if column != "E_numeric"]
        rows = [(n, wkb, spacing) for n, wkb, _, spacing in rows]
    else:
        header = list(SPECTRUM_COLUMNS)
    fmt = args.format or "csv"
    publish(render_table(header, rows, fmt), args.out_dir, f"spectrum.{fmt}")
    write_metadata(args.out_dir, "spectrum", document)
    return EXIT_OK


def _times_job(config: ExperimentConfig) -> Dict[str, Any]:
    return compute_times(config).as_dict()


def cmd_times(args: argparse.Namespace) -> int:
    document, config = _load(args)
    if config.sweep is None:
        times = compute_times(config)
        fmt = args.format or "json"
        publish(render_mapping(times.as_dict(), fmt), args.out_dir, f"times.{fmt}")
        write_metadata(args.out_dir, "times", document)
        return EXIT_OK

    parameter = config.sweep.parameter
    points = _sweep_points(document)
    results = _run_sweep(args, points, _times_job)
    fields = list(RecurrenceTimes.__dataclass_fields__)
    rows = [
        [result.value] + [result.result[name] for name in fields]
        for result in results
        if result.ok
    ]
    fmt = args.format or "csv"
    publish(render_table([parameter] + fields, rows, fmt), args.out_dir, f"times.{fmt}")
    write_metadata(args.out_dir, "times", document, points=len(points))
    if not all(result.ok for result in results):
        return EXIT_NUMERICAL_ERROR
    return EXIT_OK


def cmd_mathieu(args: argparse.Namespace) -> int:
    result = mathieu_char_value(args.nu, args.q, args.basis_size)
    values = {"nu": result.nu, "q": result.q, "a_nu": result.a_nu, "basis_size": result.basis_size}
    fmt = args.format or "json"
    publish(render_mapping(values, fmt), args.out_dir, f"mathieu.{fmt}")
    write_metadata(args.out_dir, "mathieu", None, nu=args.nu, q=args.q)
    return EXIT_OK


def cmd_evolve(args: argparse.Namespace) -> int:
    document, config = _load(args)
    if config.sweep is not None:
        _LOGGER.warning("Ignoring the sweep section; use the sweep command to run it")
    snapshot_dir = None
    if args.out_dir is not None and config.outputs.snapshots:
        snapshot_dir = args.out_dir / "snapshots"
    report, ac = run_evolution(config, snapshot_dir)

    if args.out_dir is not None and config.outputs.trajectory:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        write_autocorrelation_csv(ac, args.out_dir / "autocorrelation.csv", include_norm=True)
    fmt = args.format or "json"
    publish(render_mapping(report.to_flat_dict(), fmt), args.out_dir, f"report.{fmt}")
    write_metadata(args.out_dir, "evolve", document, **ac.metadata)
    return report_exit_code(report)


def _evolve_job(config: ExperimentConfig) -> Dict[str, Any]:
    report, _ = run_evolution(config)
    return report.to_flat_dict()


def cmd_sweep(args: argparse.Namespace) -> int:
    document, config = _load(args)
    if config.sweep is None:
        raise ConfigError("the sweep command needs a sweep section")
    parameter = config.sweep.parameter
    points = _sweep_points(document)
    if config.sweep.target == "evolve":
        job, quantities = _evolve_job, ("T_cl_detected", "T_Q_detected")
    else:
        job, quantities = _times_job, ("T0_cl", "T0_Q", "Tlam_cl", "Tlam_Q")
    results = _run_sweep(args, points, job)

    rows: List[Tuple[Any, ...]] = []
    for result in results:
        if not result.ok:
            rows.append((parameter, result.value, "error", str(result.error)))
            continue
        rows.extend(
            (parameter, result.value, quantity, value)
            for quantity, value in result.result.items()
        )
    fmt = args.format or "csv"
    publish(render_table(SWEEP_COLUMNS, rows, fmt), args.out_dir, f"sweep.{fmt}")

    summary = fitted_slopes(parameter, [point for _, point in points], results, quantities)
    if summary:
        _LOGGER.info("Fitted slopes: %s", summary)
        if args.out_dir is not None:
            publish(render_mapping(summary, "json"), args.out_dir, "summary.json")
    write_metadata(args.out_dir, "sweep", document, points=len(points))

    if not all(result.ok for result in results):
        return EXIT_NUMERICAL_ERROR
    if config.sweep.target == "evolve" and any(
        result.result.get("status.T_cl") == DetectionStatus.NO_RECURRENCE.value
        or result.result.get("status.T_Q") == DetectionStatus.NO_RECURRENCE.value
        for result in results
    ):
        return EXIT_NO_RECURRENCE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment JSON document")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a dotted key; the value is parsed as JSON when possible",
    )
    common.add_argument("--out-dir", type=Path, help="write files here instead of stdout")
    common.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")
    common.add_argument("--format", choices=("csv", "json"), help="data format")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog=DOMAIN,
        description="Recurrence times of periodically driven power-law potentials.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    spectrum = commands.add_parser("spectrum", parents=[common], help="WKB level table")
    spectrum.set_defaults(handler=cmd_spectrum)

    times = commands.add_parser("times", parents=[common], help="closed-form recurrence times")
    times.set_defaults(handler=cmd_times)

    mathieu = commands.add_parser(
        "mathieu", parents=[common], help="Mathieu characteristic value a_nu(q)"
    )
    mathieu.add_argument("--nu", type=float, required=True)
    mathieu.add_argument("--q", type=float, required=True)
    mathieu.add_argument("--basis-size", type=int, default=None)
    mathieu.set_defaults(handler=cmd_mathieu)

    evolve = commands.add_parser(
        "evolve", parents=[common], help="propagate a packet and detect recurrences"
    )
    evolve.set_defaults(handler=cmd_evolve)

    sweep = commands.add_parser("sweep", parents=[common], help="run the sweep axis")
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose - args.quiet)
    if args.jobs < 1:
        _LOGGER.error("--jobs must be at least 1")
        return EXIT_CONFIG_ERROR
    try:
        return args.handler(args)
    except (ConfigError, ValidationError) as err:
        _LOGGER.error("Configuration error: %s", err)
        return EXIT_CONFIG_ERROR
    except RevivalsError as err:
        _LOGGER.error("%s failed: %s", args.command, err)
        return EXIT_NUMERICAL_ERROR
    except (np.linalg.LinAlgError, ArithmeticError) as err:
        _LOGGER.error("%s failed in a numerical routine: %s", args.command, err)
        return EXIT_NUMERICAL_ERROR
