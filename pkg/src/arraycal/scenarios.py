"""Built-in synthetic scenarios for tests and the CLI.

Two array topologies are provided: a single 4x8 panel and four
distributed 2x4 panels labeled A-D facing a common measurement area.
"""

import numpy as np

from .channel import build_ideal_tensor, synthesize_measurements
from .config import (STREAM_SCENARIO, ArrayGeometry, ImpairmentProfile,
                     RadioConfig, TransmitPhases, TransmitterTrack, rng_stream)
from .errors import ValidationError
from .io import DatasetBundle

DEFAULT_CONFIG = RadioConfig(carrier_freq_hz=1.272e9,
                             subcarrier_spacing_hz=100e3,
                             num_subcarriers=64)

SCENARIOS = ("grid-4x8", "distributed-4x-2x4")


def _panel(rows, cols, spacing, center, normal_axis):
    """Antenna positions of a rows x cols panel in the plane normal to
    `normal_axis`, centered at `center`."""
    axes = [a for a in range(3) if a != normal_axis]
    pts = np.zeros((rows * cols, 3))
    for r in range(rows):
        for c in range(cols):
            p = np.array(center, dtype=float)
            p[axes[0]] += (c - (cols - 1) / 2.0) * spacing
            p[axes[1]] += (r - (rows - 1) / 2.0) * spacing
            pts[r * cols + c] = p
    return pts


def grid_array(spacing=0.118):
    """Single 4x8 panel (32 antennas) in the x=0 plane, roughly half-wavelength spaced."""
    return ArrayGeometry(_panel(4, 8, spacing, center=(0.0, 0.0, 1.5), normal_axis=0))


def distributed_arrays(spacing=0.118, half_width=5.0):
    """Four 2x4 panels (32 antennas total) on the sides of a square area,
    labeled A-D."""
    centers = [
        ((-half_width, 0.0, 1.5), 0),  # A: west wall, normal along x
        ((half_width, 0.0, 1.5), 0),   # B: east wall
        ((0.0, -half_width, 1.5), 1),  # C: south wall, normal along y
        ((0.0, half_width, 1.5), 1),   # D: north wall
    ]
    positions = np.vstack([_panel(2, 4, spacing, c, axis) for c, axis in centers])
    labels = {name: list(range(8 * i, 8 * (i + 1)))
              for i, name in enumerate("ABCD")}
    return ArrayGeometry(positions, labels)


def scenario_geometry(name):
    if name == "grid-4x8":
        return grid_array()
    if name == "distributed-4x-2x4":
        return distributed_arrays()
    raise ValidationError(f"unknown scenario {name!r}; choose from {SCENARIOS}")


def random_track(num_positions, seed, bounds=((-3.0, 3.0), (-3.0, 3.0), (0.5, 2.5)),
                 offset=(0.0, 0.0, 0.0)):
    """Uniformly random transmitter positions inside a box."""
    rng = rng_stream(seed, STREAM_SCENARIO, 0)
    lo = np.array([b[0] for b in bounds]) + np.asarray(offset, dtype=float)
    hi = np.array([b[1] for b in bounds]) + np.asarray(offset, dtype=float)
    return TransmitterTrack(rng.uniform(lo, hi, size=(num_positions, 3)))


def random_profile(num_antennas, config, seed, amplitude_range=(0.5, 2.0),
                   time_offset_fraction=0.4):
    """Random impairment profile well inside the unambiguous time-offset range."""
    rng = rng_stream(seed, STREAM_SCENARIO, 1)
    limit = time_offset_fraction * config.max_unambiguous_time_offset
    return ImpairmentProfile(
        phase_offsets=rng.uniform(0.0, 2.0 * np.pi, size=num_antennas),
        time_offsets=rng.uniform(-limit, limit, size=num_antennas),
        amplitudes=rng.uniform(*amplitude_range, size=num_antennas))


def random_transmit_phases(num_positions, seed):
    rng = rng_stream(seed, STREAM_SCENARIO, 2)
    return TransmitPhases.from_angles(rng.uniform(0.0, 2.0 * np.pi, size=num_positions))


def make_bundle(scenario, num_positions, config=None, snr_db=None, seed=0,
                include_ideal=True):
    """Full synthetic dataset bundle with embedded ground truth."""
    config = config or DEFAULT_CONFIG
    geometry = scenario_geometry(scenario)
    if scenario == "grid-4x8":
        # measurement volume in front of the panel
        track = random_track(num_positions, seed, bounds=((1.0, 6.0), (-3.0, 3.0), (0.5, 2.5)))
    else:
        track = random_track(num_positions, seed)
    profile = random_profile(geometry.num_antennas, config, seed)
    phases = random_transmit_phases(num_positions, seed)
    ideal = build_ideal_tensor(geometry, track, config)
    measurements = synthesize_measurements(ideal, profile, phases, config,
                                           snr_db=snr_db, seed=seed)
    return DatasetBundle(config=config, geometry=geometry, track=track,
                         measurements=measurements,
                         ideal=ideal if include_ideal else None,
                         profile=profile, transmit_phases=phases)
