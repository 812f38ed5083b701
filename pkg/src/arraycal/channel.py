"""Ideal line-of-sight channel model and impaired-measurement synthesis.

Tensors use the layout (num_subcarriers, L, D): one complex L x D matrix
per subcarrier, antennas along rows, time instances along columns.
"""

import numpy as np

from .config import DEFAULT_MIN_DISTANCE, STREAM_NOISE, rng_stream
from .errors import DegenerateGeometryError, ValidationError


def subcarrier_wavelength(config, n):
    """Wavelength of subcarrier n in meters."""
    if n < 0 or n >= config.num_subcarriers:
        raise IndexError(f"subcarrier index {n} out of range [0, {config.num_subcarriers})")
    return config.speed_of_light / (config.carrier_freq_hz + n * config.subcarrier_spacing_hz)


def ideal_coefficient(y, x, wavelength, min_distance=DEFAULT_MIN_DISTANCE):
    """Free-space channel coefficient between antenna position y and
    transmitter position x: amplitude 1/distance, phase -2*pi*distance/wavelength."""
    if wavelength <= 0:
        raise ValidationError("wavelength must be positive")
    dist = float(np.linalg.norm(np.asarray(y, dtype=float) - np.asarray(x, dtype=float)))
    if dist < min_distance:
        raise DegenerateGeometryError(
            f"antenna/transmitter distance {dist:.3e} m below minimum {min_distance} m")
    return np.exp(-2j * np.pi * dist / wavelength) / dist


def build_ideal_tensor(geometry, track, config, min_distance=DEFAULT_MIN_DISTANCE):
    """Expected LoS channel matrices A[n] for every subcarrier.

    Returns an array of shape (num_subcarriers, L, D).
    """
    track.check_min_distance(geometry, min_distance)
    diff = geometry.antenna_positions[:, None, :] - track.positions[None, :, :]
    dist = np.linalg.norm(diff, axis=2)  # (L, D)
    freqs = config.carrier_freq_hz + np.arange(config.num_subcarriers) * config.subcarrier_spacing_hz
    # phase = -2*pi*dist/lambda[n] = -2*pi*dist*f[n]/c
    phase = -2.0 * np.pi * dist[None, :, :] * (freqs / config.speed_of_light)[:, None, None]
    return np.exp(1j * phase) / dist[None, :, :]


def impairment_gain(profile, ell, n, config):
    """Complex gain of antenna `ell` at subcarrier `n`: amplitude times
    exp(j*(phase_offset + 2*pi*n*time_offset*subcarrier_spacing))."""
    if ell < 0 or ell >= profile.num_antennas:
        raise IndexError(f"antenna index {ell} out of range")
    if n < 0 or n >= config.num_subcarriers:
        raise IndexError(f"subcarrier index {n} out of range")
    phase = profile.phase_offsets[ell] + 2.0 * np.pi * n * profile.time_offsets[ell] \
        * config.subcarrier_spacing_hz
    return profile.amplitudes[ell] * np.exp(1j * phase)


def impairment_gain_matrix(profile, config):
    """All impairment gains as an array of shape (num_subcarriers, L)."""
    n = np.arange(config.num_subcarriers)
    phase = profile.phase_offsets[None, :] + 2.0 * np.pi * config.subcarrier_spacing_hz \
        * n[:, None] * profile.time_offsets[None, :]
    return profile.amplitudes[None, :] * np.exp(1j * phase)


def synthesize_measurements(ideal, profile, phases, config, snr_db=None, seed=0):
    """Impaired, optionally noisy measurement tensor.

    R[n] = diag(g[n]) A[n] diag(s) + Z[n].  The noise is i.i.d. circular
    complex Gaussian with per-element SNR (mean noiseless power per entry
    over noise variance per entry) equal to `snr_db`; `snr_db=None` or
    +inf gives Z = 0.  Deterministic per (seed, subcarrier).
    """
    ideal = np.asarray(ideal, dtype=complex)
    if ideal.ndim != 3:
        raise ValidationError(f"ideal tensor must be 3-D (N_sub, L, D), got {ideal.shape}")
    n_sub, L, D = ideal.shape
    if n_sub != config.num_subcarriers:
        raise ValidationError("ideal tensor subcarrier count does not match config")
    if profile.num_antennas != L:
        raise ValidationError("impairment profile length does not match antenna count")
    if phases.num_positions != D:
        raise ValidationError("transmit phase count does not match track length")
    profile.validate_unambiguous(config)

    gains = impairment_gain_matrix(profile, config)  # (N_sub, L)
    signal = gains[:, :, None] * ideal * phases.values[None, None, :]
    if snr_db is None or np.isinf(snr_db):
        return signal

    snr_lin = 10.0 ** (float(snr_db) / 10.0)
    out = np.empty_like(signal)
    for n in range(n_sub):
        sigma2 = np.mean(np.abs(signal[n]) ** 2) / snr_lin
        rng = rng_stream(seed, STREAM_NOISE, n)
        noise = rng.normal(scale=np.sqrt(sigma2 / 2.0), size=(L, D, 2))
        out[n] = signal[n] + noise[..., 0] + 1j * noise[..., 1]
    return out
