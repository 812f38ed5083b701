"""Per-antenna phase/time offset extraction across subcarriers and
calibration application.

The per-subcarrier estimates carry an arbitrary global phase per
subcarrier.  The gauge is fixed by referencing antenna 1 (index 0), so
all extracted offsets are relative to antenna 1.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ValidationError


def kay_weights(n):
    """Smoothed phase-difference weights for a length-n sequence; they are
    nonnegative and sum to 1."""
    if n < 2:
        raise ValidationError("need at least two samples")
    k = np.arange(n - 1)
    return 1.5 * n / (n * n - 1.0) * (1.0 - ((k - (n / 2.0 - 1.0)) / (n / 2.0)) ** 2)


def kay_frequency(sequence):
    """Single-frequency estimate (radians per sample) from weighted
    consecutive phase differences.

    The difference form never unwraps absolute phases, which makes it
    robust to 2*pi phase jumps; each per-step increment must lie in
    (-pi, pi) for unambiguous results.
    """
    seq = np.asarray(sequence, dtype=complex)
    if seq.ndim != 1 or seq.shape[0] < 2:
        raise ValidationError("sequence must be 1-D with at least two samples")
    if np.any(seq == 0):
        raise DegenerateInputError("sequence contains zero entries; phase undefined")
    incr = np.angle(seq[1:] * np.conj(seq[:-1]))
    return float(np.sum(kay_weights(seq.shape[0]) * incr))


def estimate_time_offset(g_over_n, config):
    """Sampling-time offset (seconds) from the per-subcarrier phase slope."""
    return kay_frequency(g_over_n) / (2.0 * np.pi * config.subcarrier_spacing_hz)


def estimate_phase_offset(g_over_n, t_hat, config):
    """Phase offset at subcarrier 0 (radians, wrapped to [0, 2*pi)) after
    removing the time-offset slope."""
    g = np.asarray(g_over_n, dtype=complex)
    n = np.arange(g.shape[0])
    derotated = g * np.exp(-2j * np.pi * n * t_hat * config.subcarrier_spacing_hz)
    mean = np.mean(derotated)
    if mean == 0:
        raise DegenerateInputError("mean de-rotated coefficient is zero; phase undefined")
    return float(np.mod(np.angle(mean), 2.0 * np.pi))


@dataclass(frozen=True)
class AntennaOffsetEstimate:
    """Per-antenna offsets relative to the antenna-1 phase gauge.

    `fit_residual_rad` is the RMS wrapped deviation of each antenna's
    phase from the fitted affine-in-subcarrier model; large values signal
    non-affine phases (e.g. no line of sight)."""

    phase_offset_rad: np.ndarray
    time_offset_s: np.ndarray
    fit_residual_rad: np.ndarray

    @property
    def num_antennas(self):
        return self.phase_offset_rad.shape[0]


def _wrap_pm_pi(x):
    return np.mod(x + np.pi, 2.0 * np.pi) - np.pi


def gains_matrix(estimates, config):
    """Stack per-subcarrier estimates into a (num_subcarriers, L) array,
    validating completeness and consistent antenna counts."""
    estimates = list(estimates)
    missing = [n for n, e in enumerate(estimates) if e is None]
    if missing:
        raise ValidationError(f"missing per-subcarrier estimates at indices {missing}")
    if len(estimates) != config.num_subcarriers:
        raise ValidationError(
            f"expected {config.num_subcarriers} per-subcarrier estimates, got {len(estimates)}")
    lengths = {e.g_hat.shape[0] for e in estimates}
    if len(lengths) != 1:
        raise ValidationError(f"inconsistent antenna counts across subcarriers: {sorted(lengths)}")
    return np.stack([e.g_hat for e in estimates])


def extract_offsets(estimates, config):
    """Fit the affine phase model across subcarriers for every antenna.

    `estimates` is either a sequence of per-subcarrier GainPhaseEstimate
    objects or a ready (num_subcarriers, L) complex array.
    """
    if isinstance(estimates, np.ndarray):
        G = np.asarray(estimates, dtype=complex)
        if G.ndim != 2 or G.shape[0] != config.num_subcarriers:
            raise ValidationError(
                f"gain matrix must have shape (num_subcarriers, L), got {G.shape}")
    else:
        G = gains_matrix(estimates, config)

    n_sub, L = G.shape
    n = np.arange(n_sub)
    phase = np.empty(L)
    time = np.empty(L)
    fit = np.empty(L)
    for ell in range(L):
        t_hat = estimate_time_offset(G[:, ell], config)
        p_hat = estimate_phase_offset(G[:, ell], t_hat, config)
        model = p_hat + 2.0 * np.pi * n * t_hat * config.subcarrier_spacing_hz
        dev = _wrap_pm_pi(np.angle(G[:, ell]) - model)
        phase[ell] = p_hat
        time[ell] = t_hat
        fit[ell] = float(np.sqrt(np.mean(dev ** 2)))
    return AntennaOffsetEstimate(phase_offset_rad=phase, time_offset_s=time,
                                 fit_residual_rad=fit)


def apply_calibration(measurements, gains=None, offsets=None, config=None,
                      mode="per_subcarrier"):
    """Remove estimated impairments from a measurement tensor.

    per_subcarrier mode divides each R[n] row by the estimated complex
    gain; parametric mode removes only the affine phase model (amplitudes
    untouched).
    """
    R = np.asarray(measurements, dtype=complex)
    if R.ndim != 3:
        raise ValidationError(f"measurement tensor must be 3-D, got shape {R.shape}")
    n_sub, L, _ = R.shape

    if mode == "per_subcarrier":
        if gains is None:
            raise ValidationError("per_subcarrier mode requires a gains matrix")
        G = np.asarray(gains, dtype=complex)
        if G.shape != (n_sub, L):
            raise ValidationError(f"gains must have shape {(n_sub, L)}, got {G.shape}")
        if np.any(G == 0):
            raise DegenerateInputError("cannot calibrate with zero gain entries")
        return R / G[:, :, None]

    if mode == "parametric":
        if offsets is None or config is None:
            raise ValidationError("parametric mode requires offsets and a radio config")
        if offsets.num_antennas != L:
            raise ValidationError("offset estimate antenna count does not match tensor")
        if config.num_subcarriers != n_sub:
            raise ValidationError("radio config subcarrier count does not match tensor")
        n = np.arange(n_sub)
        model = offsets.phase_offset_rad[None, :] + 2.0 * np.pi \
            * config.subcarrier_spacing_hz * n[:, None] * offsets.time_offset_s[None, :]
        return R * np.exp(-1j * model)[:, :, None]

    raise ValidationError(f"unknown calibration mode {mode!r}")
