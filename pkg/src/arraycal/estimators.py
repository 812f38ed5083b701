"""Scikit-learn style front end for the calibration pipeline."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ValidationError
from .offsets import apply_calibration, extract_offsets
from .solvers import SolverConfig, estimate_gain_phase


def _as_tensor(X, name="X"):
    X = np.asarray(X, dtype=complex)
    if X.ndim == 2:
        X = X[None, :, :]
    if X.ndim != 3:
        raise ValidationError(f"{name} must be a (num_subcarriers, L, D) tensor "
                              f"or a single L x D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError(f"{name} contains non-finite entries")
    return X


class GainPhaseCalibrator(BaseEstimator, TransformerMixin):
    """Estimates per-antenna complex gain/phase errors from measured and
    ideal channel tensors and removes them from measurements.

    Parameters
    ----------
    algorithm : {"iterative", "eigenvector"}
        Coordinate-descent least squares or the autocorrelation /
        principal-eigenvector method.
    max_iterations : int
        Iteration budget of the iterative solver.
    tol : float
        Early-stop threshold on the relative residual change.
    seed : int
        Seed for the random solver initialization.
    radio_config : RadioConfig, optional
        When given, `fit` also extracts per-antenna phase and
        sampling-time offsets (relative to antenna 1).
    """

    def __init__(self, algorithm="iterative", max_iterations=40, tol=1e-10,
                 seed=0, radio_config=None):
        self.algorithm = algorithm
        self.max_iterations = max_iterations
        self.tol = tol
        self.seed = seed
        self.radio_config = radio_config

    def fit(self, X, y=None):
        """Fit gains per subcarrier.  X is the measurement tensor
        (num_subcarriers, L, D); y is the ideal tensor of the same shape."""
        if y is None:
            raise ValidationError("the ideal channel tensor must be passed as y")
        R = _as_tensor(X, "X")
        A = _as_tensor(y, "y")
        if A.shape != R.shape:
            raise ValidationError(f"shape mismatch: X {R.shape} vs y {A.shape}")

        config = SolverConfig(max_iterations=self.max_iterations,
                              relative_residual_tolerance=self.tol,
                              seed=self.seed)
        self.estimates_ = [estimate_gain_phase(R[n], A[n], self.algorithm, config)
                           for n in range(R.shape[0])]
        self.gains_ = np.stack([e.g_hat for e in self.estimates_])
        self.transmit_phases_ = np.stack([e.s_hat for e in self.estimates_])
        self.residuals_ = np.asarray([e.residual_frobenius for e in self.estimates_])
        if self.radio_config is not None:
            if self.radio_config.num_subcarriers != R.shape[0]:
                raise ValidationError("radio_config subcarrier count does not match X")
            offsets = extract_offsets(self.gains_, self.radio_config)
            self.offsets_ = offsets
            self.phase_offsets_ = offsets.phase_offset_rad
            self.time_offsets_ = offsets.time_offset_s
        return self

    def transform(self, X):
        """Divide measurements by the fitted per-subcarrier gains."""
        if not hasattr(self, "gains_"):
            raise ValidationError("calibrator is not fitted")
        R = _as_tensor(X, "X")
        if R.shape[:2] != self.gains_.shape:
            raise ValidationError(
                f"X has shape {R.shape} but the calibrator was fitted for "
                f"(num_subcarriers, L) = {self.gains_.shape}")
        return apply_calibration(R, gains=self.gains_, mode="per_subcarrier")
