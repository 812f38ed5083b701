"""Command-line front end.

Exit codes: 0 success, 2 validation failure, 3 I/O failure, 4 numerical
degeneracy, 5 provenance (digest) mismatch.
"""

import functools
import os
import sys

import click
import numpy as np

from . import __version__
from .channel import build_ideal_tensor, impairment_gain_matrix
from .config import RadioConfig
from .errors import (DegenerateInputError, DigestMismatchError, FormatError,
                     ValidationError)
from .io import (CalibrationRecord, DatasetBundle, file_digest,
                 import_positions, read_bundle, read_calibration, write_bundle,
                 write_calibration)
from .metrics import cosine_similarity_db, snr_sweep, starting_phase_agreement
from .offsets import apply_calibration, extract_offsets
from .scenarios import DEFAULT_CONFIG, SCENARIOS, make_bundle
from .solvers import SolverConfig, estimate_gain_phase

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_DEGENERATE = 4
EXIT_PROVENANCE = 5


def _exit_codes(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DigestMismatchError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_PROVENANCE)
        except DegenerateInputError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_DEGENERATE)
        except (FormatError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
    return wrapper


def _radio_config(carrier_freq, center_freq, spacing, num_subcarriers):
    if center_freq is not None:
        return RadioConfig.from_center_frequency(center_freq, spacing, num_subcarriers)
    return RadioConfig(carrier_freq, spacing, num_subcarriers)


@click.group()
@click.version_option(version=__version__)
def main():
    """Geometry-based phase/time calibration for multi-antenna OFDM measurements."""


@main.command()
@click.option("--scenario", type=click.Choice(SCENARIOS), default=None,
              help="Built-in array topology.")
@click.option("--geometry", "geometry_path", type=str, default=None,
              help="Antenna positions file (index, x, y, z per line).")
@click.option("--track", "track_path", type=str, default=None,
              help="Transmitter positions file (index, x, y, z per line).")
@click.option("--num-positions", default=256, show_default=True)
@click.option("--num-subcarriers", default=DEFAULT_CONFIG.num_subcarriers, show_default=True)
@click.option("--subcarrier-spacing", default=DEFAULT_CONFIG.subcarrier_spacing_hz,
              show_default=True, help="Subcarrier spacing in Hz.")
@click.option("--carrier-freq", default=DEFAULT_CONFIG.carrier_freq_hz, show_default=True,
              help="Frequency of the lowermost subcarrier in Hz.")
@click.option("--center-freq", default=None, type=float,
              help="Band-center frequency in Hz (overrides --carrier-freq).")
@click.option("--snr", "snr_db", default=None, type=float,
              help="Per-element SNR in dB; omit for noiseless synthesis.")
@click.option("--seed", default=0, show_default=True)
@click.option("-o", "--output", required=True, type=str)
@_exit_codes
def generate(scenario, geometry_path, track_path, num_positions, num_subcarriers,
             subcarrier_spacing, carrier_freq, center_freq, snr_db, seed, output):
    """Synthesize a measurement bundle with embedded ground truth."""
    config = _radio_config(carrier_freq, center_freq, subcarrier_spacing, num_subcarriers)
    if scenario is None and geometry_path is None:
        raise ValidationError("either --scenario or --geometry is required")

    if scenario is not None:
        bundle = make_bundle(scenario, num_positions, config=config,
                             snr_db=snr_db, seed=seed)
    else:
        from .config import ArrayGeometry, TransmitterTrack
        from .channel import synthesize_measurements
        from .scenarios import random_profile, random_track, random_transmit_phases
        geometry = ArrayGeometry(import_positions(geometry_path))
        if track_path is not None:
            track = TransmitterTrack(import_positions(track_path))
        else:
            track = random_track(num_positions, seed)
        profile = random_profile(geometry.num_antennas, config, seed)
        phases = random_transmit_phases(track.num_positions, seed)
        ideal = build_ideal_tensor(geometry, track, config)
        measurements = synthesize_measurements(ideal, profile, phases, config,
                                               snr_db=snr_db, seed=seed)
        bundle = DatasetBundle(config=config, geometry=geometry, track=track,
                               measurements=measurements, ideal=ideal,
                               profile=profile, transmit_phases=phases)

    write_bundle(bundle, output)
    n_sub, L, D = bundle.shape
    snr_text = "noiseless" if snr_db is None else f"{snr_db} dB"
    click.echo(f"wrote {output}: L={L} D={D} N_sub={n_sub} SNR={snr_text}")


def _estimate_all(bundle, algorithm, solver_config):
    A = bundle.ideal if bundle.ideal is not None \
        else build_ideal_tensor(bundle.geometry, bundle.track, bundle.config)
    estimates = [estimate_gain_phase(bundle.measurements[n], A[n], algorithm, solver_config)
                 for n in range(bundle.config.num_subcarriers)]
    return A, estimates


@main.command()
@click.argument("bundle_path", type=str)
@click.option("--algorithm", type=click.Choice(["iterative", "eigenvector"]),
              default="iterative", show_default=True)
@click.option("--iterations", "-M", default=40, show_default=True)
@click.option("--tolerance", default=1e-10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--store-g/--no-store-g", default=True, show_default=True,
              help="Embed the per-subcarrier gain matrix in the record.")
@click.option("--check-truth", is_flag=True,
              help="Compare against the bundle's embedded ground truth.")
@click.option("-o", "--output", required=True, type=str)
@_exit_codes
def calibrate(bundle_path, algorithm, iterations, tolerance, seed, store_g,
              check_truth, output):
    """Estimate per-antenna phase and time offsets from a bundle."""
    bundle = read_bundle(bundle_path)
    solver_config = SolverConfig(max_iterations=iterations,
                                 relative_residual_tolerance=tolerance, seed=seed)
    _, estimates = _estimate_all(bundle, algorithm, solver_config)
    gains = np.stack([e.g_hat for e in estimates])
    offsets = extract_offsets(gains, bundle.config)

    record = CalibrationRecord(
        phase_offsets=offsets.phase_offset_rad,
        time_offsets=offsets.time_offset_s,
        fit_residuals=offsets.fit_residual_rad,
        algorithm=algorithm, max_iterations=iterations, seed=seed,
        input_digest=file_digest(bundle_path),
        gains=gains if store_g else None)
    write_calibration(record, output)

    click.echo("antenna,phase_offset_rad,time_offset_ns,fit_residual_rad")
    for ell in range(offsets.num_antennas):
        click.echo(f"{ell},{offsets.phase_offset_rad[ell]:.9f},"
                   f"{offsets.time_offset_s[ell] * 1e9:.6f},"
                   f"{offsets.fit_residual_rad[ell]:.3e}")

    if check_truth:
        if bundle.profile is None:
            raise ValidationError("bundle carries no ground truth to check against")
        _check_truth(bundle, offsets)


def _check_truth(bundle, offsets, phase_tol=1e-9, time_tol=1e-12):
    # ground truth expressed in the antenna-1 gauge
    truth_phase = np.mod(bundle.profile.phase_offsets - bundle.profile.phase_offsets[0],
                         2.0 * np.pi)
    truth_time = bundle.profile.time_offsets - bundle.profile.time_offsets[0]
    phase_err = np.abs(np.mod(offsets.phase_offset_rad - truth_phase + np.pi,
                              2.0 * np.pi) - np.pi)
    time_err = np.abs(offsets.time_offset_s - truth_time)
    ok = np.all(phase_err < phase_tol) and np.all(time_err < time_tol)
    click.echo(f"truth check: max |dphi|={phase_err.max():.3e} rad, "
               f"max |dt|={time_err.max():.3e} s -> {'PASS' if ok else 'FAIL'}")
    if not ok:
        raise DegenerateInputError("recovered offsets disagree with embedded ground truth")


@main.command("apply")
@click.argument("bundle_path", type=str)
@click.argument("calibration_path", type=str)
@click.option("--mode", type=click.Choice(["per-subcarrier", "parametric"]),
              default="per-subcarrier", show_default=True)
@click.option("--force", is_flag=True, help="Skip the provenance digest check.")
@click.option("-o", "--output", required=True, type=str)
@_exit_codes
def apply_cmd(bundle_path, calibration_path, mode, force, output):
    """Write a calibrated copy of a bundle."""
    bundle = read_bundle(bundle_path)
    record = read_calibration(calibration_path)
    if not force and record.input_digest != file_digest(bundle_path):
        raise DigestMismatchError(
            "calibration record was computed from a different bundle "
            "(pass --force to override)")
    if record.num_antennas != bundle.geometry.num_antennas:
        raise ValidationError("calibration antenna count does not match bundle")

    if mode == "per-subcarrier":
        if record.gains is None:
            raise ValidationError("record has no per-subcarrier gains; use --mode parametric")
        corrected = apply_calibration(bundle.measurements, gains=record.gains,
                                      mode="per_subcarrier")
    else:
        from .offsets import AntennaOffsetEstimate
        offsets = AntennaOffsetEstimate(record.phase_offsets, record.time_offsets,
                                        record.fit_residuals)
        corrected = apply_calibration(bundle.measurements, offsets=offsets,
                                      config=bundle.config, mode="parametric")

    out = DatasetBundle(config=bundle.config, geometry=bundle.geometry,
                        track=bundle.track, measurements=corrected,
                        ideal=bundle.ideal, profile=bundle.profile,
                        transmit_phases=bundle.transmit_phases)
    write_bundle(out, output)
    click.echo(f"wrote calibrated bundle to {output} ({mode} mode)")


@main.command()
@click.argument("bundle_path", type=str)
@click.option("--calibration", "calibration_path", type=str, default=None,
              help="Calibration record with gains to evaluate; defaults to truth gains.")
@click.option("--subarrays", default=None,
              help="Two comma-separated subarray labels for the agreement series.")
@click.option("--subcarrier", default=0, show_default=True)
@_exit_codes
def evaluate(bundle_path, calibration_path, subarrays, subcarrier):
    """Report accuracy (squared cosine similarity) and subarray agreement."""
    bundle = read_bundle(bundle_path)
    A = bundle.ideal if bundle.ideal is not None \
        else build_ideal_tensor(bundle.geometry, bundle.track, bundle.config)
    if bundle.profile is None:
        raise ValidationError("bundle carries no ground truth; cannot evaluate")
    g_true = impairment_gain_matrix(bundle.profile, bundle.config)

    if calibration_path is not None:
        record = read_calibration(calibration_path)
        if record.gains is None:
            raise ValidationError("calibration record carries no gain matrix")
        gains = record.gains
    else:
        gains = g_true

    click.echo("subcarrier,p_db")
    for n in range(bundle.config.num_subcarriers):
        p = cosine_similarity_db(gains[n], g_true[n])
        click.echo(f"{n},{'-inf' if np.isneginf(p) else format(p, '.6f')}")

    if subarrays is not None:
        labels = [s.strip() for s in subarrays.split(",")]
        if len(labels) != 2:
            raise ValidationError("--subarrays expects exactly two labels, e.g. B,C")
        groups = bundle.geometry.subarray_labels or {}
        for lab in labels:
            if lab not in groups:
                raise ValidationError(f"unknown subarray label {lab!r}; "
                                      f"available: {sorted(groups)}")
        series = starting_phase_agreement(
            bundle.measurements[subcarrier], A[subcarrier], gains[subcarrier],
            groups[labels[0]], groups[labels[1]], labels=tuple(labels))
        click.echo(f"d,agreement_{labels[0]}_{labels[1]}")
        for d, v in enumerate(series.values):
            click.echo(f"{d},{'undefined' if series.undefined[d] else format(v, '.9f')}")


def _parse_snr_grid(text):
    try:
        parts = [float(p) for p in text.split(":")]
    except ValueError as exc:
        raise ValidationError(f"bad SNR grid {text!r}: {exc}") from exc
    if len(parts) == 1:
        return [parts[0]]
    if len(parts) != 3:
        raise ValidationError("SNR grid must be 'start:step:stop' or a single value")
    start, step, stop = parts
    if step <= 0 or stop < start:
        raise ValidationError("SNR grid requires step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    return [start + k * step for k in range(count)]


@main.command()
@click.argument("bundle_path", type=str)
@click.option("--snr", "snr_text", default="-12:1:5", show_default=True,
              help="SNR grid in dB as start:step:stop.")
@click.option("--realizations", default=200, show_default=True)
@click.option("--subcarrier", default=0, show_default=True)
@click.option("--iterations", "-M", default=40, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--parallel", default=None, type=int,
              help="Worker count for the Monte-Carlo trials; defaults to the "
                   "ARRAYCAL_PARALLEL environment variable or 1. Results are "
                   "identical for any worker count.")
@click.option("-o", "--output", required=True, type=str)
@_exit_codes
def sweep(bundle_path, snr_text, realizations, subcarrier, iterations, seed, parallel,
          output):
    """Paired Monte-Carlo SNR sweep comparing both estimators on one subcarrier."""
    if parallel is None:
        parallel = int(os.environ.get("ARRAYCAL_PARALLEL", "1"))
    if parallel < 1:
        raise ValidationError("--parallel must be a positive integer")
    bundle = read_bundle(bundle_path)
    A = bundle.ideal if bundle.ideal is not None \
        else build_ideal_tensor(bundle.geometry, bundle.track, bundle.config)
    if subcarrier < 0 or subcarrier >= bundle.config.num_subcarriers:
        raise ValidationError("subcarrier index out of range")

    solver_config = SolverConfig(max_iterations=iterations, seed=seed)
    R = bundle.measurements[subcarrier]
    An = A[subcarrier]
    if bundle.profile is not None:
        g_true = impairment_gain_matrix(bundle.profile, bundle.config)[subcarrier]
    else:
        # noise-free reference estimate when no ground truth is embedded
        g_true = estimate_gain_phase(R, An, "iterative", solver_config).g_hat

    result = snr_sweep(R, An, g_true, _parse_snr_grid(snr_text), realizations,
                       solver_config, n_jobs=parallel)
    with open(output, "w", encoding="utf-8") as fh:
        fh.write(result.to_table())
    click.echo(f"wrote {len(result.rows)} rows to {output}")


if __name__ == "__main__":
    main()
