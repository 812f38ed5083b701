"""Per-subcarrier gain/phase vector estimation.

Two least-squares estimators for the model R = diag(g) A diag(s) + Z with
unit-modulus nuisance phases s: block coordinate descent with closed-form
s- and g-updates, and the autocorrelation/principal-eigenvector method.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import STREAM_SOLVER_INIT, rng_stream
from .errors import DegenerateInputError, ValidationError

#: Matrices up to this size use a dense Hermitian eigendecomposition;
#: larger ones fall back to power iteration.
DENSE_EIG_LIMIT = 512


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the coordinate-descent solver."""

    max_iterations: int = 40
    relative_residual_tolerance: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if self.relative_residual_tolerance < 0:
            raise ValidationError("relative_residual_tolerance must be >= 0")


@dataclass
class GainPhaseEstimate:
    """Result of one per-subcarrier estimation run."""

    g_hat: np.ndarray
    s_hat: np.ndarray
    residual_frobenius: float
    iterations_used: int
    algorithm: str
    residual_history: list = field(default_factory=list)
    uninformative_columns: int = 0


def _check_shapes(R, A):
    R = np.asarray(R, dtype=complex)
    A = np.asarray(A, dtype=complex)
    if R.ndim != 2 or A.shape != R.shape:
        raise ValidationError(f"R and A must be equal-shape 2-D matrices, got {R.shape} vs {A.shape}")
    return R, A


def residual_norm(R, A, g, s):
    """Frobenius norm of diag(g) A diag(s) - R."""
    R, A = _check_shapes(R, A)
    g = np.asarray(g, dtype=complex)
    s = np.asarray(s, dtype=complex)
    if g.shape != (R.shape[0],) or s.shape != (R.shape[1],):
        raise ValidationError("g and s lengths must match the matrix dimensions")
    return float(np.linalg.norm(g[:, None] * A * s[None, :] - R))


def update_s_block(R, A, g):
    """Closed-form unit-modulus transmit-phase update with g fixed.

    Columns whose projection is exactly zero carry no phase information;
    they are set to 1 and a warning is emitted.
    """
    s, n_flagged = _s_block(R, A, g)
    if n_flagged:
        warnings.warn(f"{n_flagged} column(s) had zero projection; set to 1", stacklevel=2)
    return s


def _s_block(R, A, g):
    R, A = _check_shapes(R, A)
    g = np.asarray(g, dtype=complex)
    # p_i = R_{:i}^H (g . A_{:i})
    p = np.sum(np.conj(R) * (g[:, None] * A), axis=0)
    zero = p == 0
    s = np.where(zero, 1.0 + 0.0j, np.exp(-1j * np.angle(np.where(zero, 1.0, p))))
    return s, int(np.count_nonzero(zero))


def update_g_block(R, A, s):
    """Closed-form per-row least-squares gain update with s fixed."""
    R, A = _check_shapes(R, A)
    s = np.asarray(s, dtype=complex)
    B = A * s[None, :]
    norms = np.sum(np.abs(B) ** 2, axis=1)
    if np.any(norms == 0):
        raise DegenerateInputError("zero row norm in A . s; cannot update gains")
    return np.sum(np.conj(B) * R, axis=1) / norms


def normalize_global_phase(g):
    """Rotate g so its first nonzero entry becomes real-positive.

    Resolves the inherent global-phase ambiguity of (g, s); magnitudes
    are unchanged.
    """
    g = np.asarray(g, dtype=complex)
    nonzero = np.flatnonzero(g)
    if nonzero.size == 0:
        raise DegenerateInputError("cannot normalize the all-zero vector")
    return g * np.exp(-1j * np.angle(g[nonzero[0]]))


def _gauge_fix(estimate):
    """Apply the antenna-1 phase gauge to an estimate in place, rotating
    s oppositely so the residual is unchanged."""
    g = estimate.g_hat
    nonzero = np.flatnonzero(g)
    if nonzero.size == 0:
        raise DegenerateInputError("estimated gain vector is all zero")
    theta = np.angle(g[nonzero[0]])
    estimate.g_hat = g * np.exp(-1j * theta)
    estimate.s_hat = estimate.s_hat * np.exp(1j * theta)
    return estimate


def coordinate_descent(R, A, config=None):
    """Alternating exact block minimization of ||diag(g) A diag(s) - R||_F.

    Starts from a random complex-normal g, then repeats s-update followed
    by g-update for at most `max_iterations` rounds, stopping early when
    the relative residual change drops below the configured tolerance.
    """
    config = config or SolverConfig()
    R, A = _check_shapes(R, A)
    L, D = R.shape
    rng = rng_stream(config.seed, STREAM_SOLVER_INIT)
    g = (rng.normal(size=L) + 1j * rng.normal(size=L)) / np.sqrt(2.0)

    history = []
    n_flagged = 0
    prev = None
    s = np.ones(D, dtype=complex)
    iterations = 0
    for _ in range(config.max_iterations):
        s, flagged = _s_block(R, A, g)
        n_flagged += flagged
        g = update_g_block(R, A, s)
        iterations += 1
        res = residual_norm(R, A, g, s)
        history.append(res)
        if prev is not None:
            if prev == 0 or abs(prev - res) / prev < config.relative_residual_tolerance:
                break
        prev = res

    estimate = GainPhaseEstimate(
        g_hat=g, s_hat=s, residual_frobenius=history[-1],
        iterations_used=iterations, algorithm="coordinate_descent",
        residual_history=history, uninformative_columns=n_flagged)
    return _gauge_fix(estimate)


def sample_autocorrelation(R, A):
    """Sample mean of the rank-one outer products (R_{:d} / A_{:d})(.)^H.

    The result is explicitly symmetrized, so it is Hermitian and (up to
    rounding) positive semidefinite.
    """
    R, A = _check_shapes(R, A)
    if np.any(A == 0):
        raise DegenerateInputError("ideal tensor has zero entries; elementwise inverse undefined")
    V = R / A
    C = (V @ V.conj().T) / R.shape[1]
    return (C + C.conj().T) / 2.0


def principal_eigpair(C, hermitian_tol=1e-10, dense_limit=DENSE_EIG_LIMIT):
    """Largest eigenvalue and a unit-norm eigenvector of a Hermitian matrix.

    Dense decomposition up to `dense_limit`; power iteration above.  Ties
    are broken by the first maximal eigenvalue in the solver's ordering.
    """
    C = np.asarray(C, dtype=complex)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValidationError("C must be square")
    scale = np.linalg.norm(C)
    if np.linalg.norm(C - C.conj().T) > hermitian_tol * max(scale, 1e-300):
        raise ValidationError("matrix is not Hermitian within tolerance")
    if scale == 0:
        v = np.zeros(C.shape[0], dtype=complex)
        v[0] = 1.0
        return 0.0, v
    if C.shape[0] <= dense_limit:
        w, V = np.linalg.eigh(C)
        idx = int(np.argmax(w))
        return float(w[idx]), V[:, idx]
    return _power_iteration(C)


def _power_iteration(C, tol=1e-12, max_iterations=100_000):
    L = C.shape[0]
    v = np.ones(L, dtype=complex) / np.sqrt(L)
    lam = None
    for _ in range(max_iterations):
        w = C @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            raise DegenerateInputError("power iteration hit the null space")
        v = w / norm
        lam_new = float(np.real(np.vdot(v, C @ v)))
        if lam is not None and abs(lam_new - lam) <= tol * max(abs(lam_new), 1.0):
            return lam_new, v
        lam = lam_new
    return lam, v


def eigenvector_estimate(R, A):
    """Autocorrelation-based estimator: g is the principal eigenvector of
    the sample autocorrelation, scaled by the square root of its eigenvalue.

    A single s-update pass is appended so the result carries comparable
    transmit-phase estimates and a residual.
    """
    R, A = _check_shapes(R, A)
    C = sample_autocorrelation(R, A)
    lam, v = principal_eigpair(C)
    g = np.sqrt(max(lam, 0.0)) * v
    g = normalize_global_phase(g)
    s, n_flagged = _s_block(R, A, g)
    res = residual_norm(R, A, g, s)
    return GainPhaseEstimate(
        g_hat=g, s_hat=s, residual_frobenius=res, iterations_used=0,
        algorithm="eigenvector", residual_history=[res],
        uninformative_columns=n_flagged)


def estimate_gain_phase(R, A, algorithm="iterative", config=None):
    """Dispatch to one of the two estimators by name."""
    if algorithm in ("iterative", "coordinate_descent"):
        return coordinate_descent(R, A, config)
    if algorithm == "eigenvector":
        return eigenvector_estimate(R, A)
    raise ValidationError(f"unknown algorithm {algorithm!r}")
