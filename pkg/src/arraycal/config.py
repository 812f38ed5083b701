"""Domain types: radio configuration, geometry, impairments, transmit phases."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

SPEED_OF_LIGHT = 299792458.0

#: Default minimum transmitter-antenna separation in meters (1/distance singularity guard).
DEFAULT_MIN_DISTANCE = 1e-3

#: Fixed stream identifiers for per-purpose RNG substreams.
STREAM_NOISE = 1
STREAM_SOLVER_INIT = 2
STREAM_SWEEP_NOISE = 3
STREAM_RESTART = 4
STREAM_SCENARIO = 5


def rng_stream(seed, *keys):
    """Deterministic, schedule-independent RNG substream keyed by integers."""
    return np.random.default_rng([int(seed)] + [int(k) for k in keys])


def _as_position_array(positions, name):
    arr = np.asarray(positions, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValidationError(f"{name} must have shape (N, 3), got {arr.shape}")
    if arr.shape[0] < 1:
        raise ValidationError(f"{name} must contain at least one position")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite coordinates")
    return arr


@dataclass(frozen=True)
class RadioConfig:
    """OFDM radio parameters.  `carrier_freq_hz` is the frequency of the
    lowermost subcarrier (index 0); subcarrier n sits at
    carrier_freq_hz + n * subcarrier_spacing_hz."""

    carrier_freq_hz: float
    subcarrier_spacing_hz: float
    num_subcarriers: int
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if self.carrier_freq_hz <= 0:
            raise ValidationError("carrier_freq_hz must be positive")
        if self.subcarrier_spacing_hz <= 0:
            raise ValidationError("subcarrier_spacing_hz must be positive")
        if self.num_subcarriers < 1:
            raise ValidationError("num_subcarriers must be >= 1")
        if self.carrier_freq_hz <= self.num_subcarriers * self.subcarrier_spacing_hz:
            raise ValidationError(
                "carrier_freq_hz must exceed the occupied bandwidth "
                "(narrowband sanity check)"
            )

    @classmethod
    def from_center_frequency(cls, center_freq_hz, subcarrier_spacing_hz,
                              num_subcarriers, speed_of_light=SPEED_OF_LIGHT):
        """Build a config from a band-center frequency instead of the
        lowermost-subcarrier frequency."""
        lowermost = center_freq_hz - (num_subcarriers - 1) / 2.0 * subcarrier_spacing_hz
        return cls(lowermost, subcarrier_spacing_hz, num_subcarriers, speed_of_light)

    @property
    def max_unambiguous_time_offset(self):
        """Largest |t_off| whose per-subcarrier phase increment stays in (-pi, pi)."""
        return 1.0 / (2.0 * self.subcarrier_spacing_hz)


@dataclass(frozen=True)
class ArrayGeometry:
    """Receive antenna positions, optionally partitioned into named subarrays."""

    antenna_positions: np.ndarray
    subarray_labels: dict = None

    def __post_init__(self):
        object.__setattr__(
            self, "antenna_positions",
            _as_position_array(self.antenna_positions, "antenna_positions"))
        if self.subarray_labels is not None:
            seen = set()
            for name, idx in self.subarray_labels.items():
                idx = [int(i) for i in idx]
                if any(i < 0 or i >= self.num_antennas for i in idx):
                    raise ValidationError(f"subarray {name!r} has out-of-range indices")
                if seen.intersection(idx):
                    raise ValidationError(f"subarray {name!r} overlaps another subarray")
                seen.update(idx)

    @property
    def num_antennas(self):
        return self.antenna_positions.shape[0]


@dataclass(frozen=True)
class TransmitterTrack:
    """Transmitter positions for the D time instances."""

    positions: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "positions", _as_position_array(self.positions, "positions"))

    @property
    def num_positions(self):
        return self.positions.shape[0]

    def check_min_distance(self, geometry, min_distance=DEFAULT_MIN_DISTANCE):
        """Raise if any transmitter position is closer than `min_distance`
        to any antenna."""
        from .errors import DegenerateGeometryError
        diff = self.positions[None, :, :] - geometry.antenna_positions[:, None, :]
        dist = np.linalg.norm(diff, axis=2)
        bad = np.argwhere(dist < min_distance)
        if bad.size:
            pairs = [(int(l), int(d)) for l, d in bad]
            raise DegenerateGeometryError(
                f"{len(pairs)} antenna/transmitter pairs closer than "
                f"{min_distance} m, first offenders {pairs[:5]}", pairs=pairs)


@dataclass(frozen=True)
class ImpairmentProfile:
    """Per-antenna carrier-phase offsets (rad), sampling-time offsets (s)
    and receive amplitudes."""

    phase_offsets: np.ndarray
    time_offsets: np.ndarray
    amplitudes: np.ndarray = None

    def __post_init__(self):
        phase = np.asarray(self.phase_offsets, dtype=float)
        time = np.asarray(self.time_offsets, dtype=float)
        if phase.ndim != 1 or time.shape != phase.shape:
            raise ValidationError("phase_offsets and time_offsets must be equal-length 1-D")
        if self.amplitudes is None:
            amp = np.ones_like(phase)
        else:
            amp = np.asarray(self.amplitudes, dtype=float)
            if amp.shape != phase.shape:
                raise ValidationError("amplitudes must match phase_offsets length")
        if np.any(amp <= 0):
            raise ValidationError("amplitudes must be strictly positive")
        if not (np.all(np.isfinite(phase)) and np.all(np.isfinite(time))):
            raise ValidationError("offsets must be finite")
        object.__setattr__(self, "phase_offsets", np.mod(phase, 2 * np.pi))
        object.__setattr__(self, "time_offsets", time)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def num_antennas(self):
        return self.phase_offsets.shape[0]

    def validate_unambiguous(self, config):
        """Check |t_off| < 1/(2 * subcarrier spacing), the identifiable region."""
        limit = config.max_unambiguous_time_offset
        if np.any(np.abs(self.time_offsets) >= limit):
            raise ValidationError(
                f"time offsets must satisfy |t_off| < {limit:.3e} s "
                "for unambiguous per-subcarrier phase increments")


@dataclass(frozen=True)
class TransmitPhases:
    """Unit-modulus transmitter starting phases, one per time instance."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1 or vals.shape[0] < 1:
            raise ValidationError("transmit phases must be a non-empty 1-D vector")
        if np.any(np.abs(np.abs(vals) - 1.0) > 1e-12):
            raise ValidationError("transmit phases must be unit modulus (tol 1e-12)")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_angles(cls, angles):
        return cls(np.exp(1j * np.asarray(angles, dtype=float)))

    @property
    def num_positions(self):
        return self.values.shape[0]
