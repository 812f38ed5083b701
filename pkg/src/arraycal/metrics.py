"""Evaluation metrics and the Monte-Carlo SNR comparison harness."""

from dataclasses import dataclass, field

import numpy as np

from .config import STREAM_RESTART, STREAM_SWEEP_NOISE, rng_stream
from .errors import ValidationError
from .solvers import SolverConfig, coordinate_descent, eigenvector_estimate


def cosine_similarity_db(g_hat, g_true):
    """Squared cosine similarity between two complex vectors in dB.

    0 dB iff the vectors are proportional (up to a complex scalar);
    always <= 0.  Orthogonal vectors yield -inf.
    """
    a = np.asarray(g_hat, dtype=complex)
    b = np.asarray(g_true, dtype=complex)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError("vectors must be 1-D and of equal length")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValidationError("cosine similarity undefined for zero vectors")
    c = np.abs(np.vdot(a, b)) ** 2 / (na ** 2 * nb ** 2)
    if c == 0:
        return float("-inf")
    return float(10.0 * np.log10(min(c, 1.0)))


@dataclass(frozen=True)
class AgreementSeries:
    """Per-time-instance agreement |s_subset1,d - s_subset2,d| in [0, 2].

    Entries where either subset sum vanished are NaN with the
    corresponding `undefined` flag set.
    """

    values: np.ndarray
    undefined: np.ndarray
    labels: tuple = ("B", "C")


def starting_phase_agreement(R, A, g, subset_b, subset_c, labels=("B", "C")):
    """Disagreement between transmit starting phases estimated from two
    disjoint antenna subsets; small values indicate that both subsets see
    a consistent (LoS) channel under the calibration g."""
    R = np.asarray(R, dtype=complex)
    A = np.asarray(A, dtype=complex)
    g = np.asarray(g, dtype=complex)
    subset_b = np.asarray(subset_b, dtype=int)
    subset_c = np.asarray(subset_c, dtype=int)
    if subset_b.size == 0 or subset_c.size == 0:
        raise ValidationError("subsets must be nonempty")
    if np.intersect1d(subset_b, subset_c).size:
        raise ValidationError("subsets must be disjoint")
    L = R.shape[0]
    for idx in (subset_b, subset_c):
        if np.any(idx < 0) or np.any(idx >= L):
            raise ValidationError("subset index out of range")

    def subset_phase(idx):
        # sum_l conj(r_ld) g_l a_ld per time instance
        z = np.sum(np.conj(R[idx]) * (g[idx, None] * A[idx]), axis=0)
        undef = z == 0
        s = np.exp(1j * np.angle(np.where(undef, 1.0, z)))
        return s, undef

    s_b, undef_b = subset_phase(subset_b)
    s_c, undef_c = subset_phase(subset_c)
    undefined = undef_b | undef_c
    values = np.abs(s_c - s_b)
    values = np.where(undefined, np.nan, values)
    return AgreementSeries(values=values, undefined=undefined, labels=tuple(labels))


def add_noise(matrix, snr_db, seed=0):
    """Additive i.i.d. circular complex Gaussian noise at a per-element SNR.

    Works on a single L x D matrix or a full (N_sub, L, D) tensor (one
    substream per subcarrier).  `snr_db=None` or +inf returns a copy.
    """
    X = np.asarray(matrix, dtype=complex)
    if not np.all(np.isfinite(X)):
        raise ValidationError("input contains non-finite entries")
    if snr_db is None or np.isinf(snr_db):
        return X.copy()
    snr_lin = 10.0 ** (float(snr_db) / 10.0)
    if X.ndim == 2:
        return X + _noise_like(X, snr_lin, rng_stream(seed, STREAM_SWEEP_NOISE, 0))
    if X.ndim == 3:
        out = np.empty_like(X)
        for n in range(X.shape[0]):
            out[n] = X[n] + _noise_like(X[n], snr_lin, rng_stream(seed, STREAM_SWEEP_NOISE, n))
        return out
    raise ValidationError(f"expected a 2-D or 3-D array, got shape {X.shape}")


def _noise_like(X, snr_lin, rng):
    sigma2 = np.mean(np.abs(X) ** 2) / snr_lin
    noise = rng.normal(scale=np.sqrt(sigma2 / 2.0), size=X.shape + (2,))
    return noise[..., 0] + 1j * noise[..., 1]


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    algorithm: str
    mean_p_db: float
    q1_p_db: float
    q3_p_db: float
    n_realizations: int


@dataclass(frozen=True)
class SweepResult:
    """Aggregated estimator accuracy across an SNR grid."""

    rows: list
    num_antennas: int
    num_positions: int
    seed: int
    max_iterations: int

    TABLE_COLUMNS = ("snr_db", "algorithm", "mean_p_db", "q1_p_db", "q3_p_db",
                     "n_realizations")

    def to_table(self):
        """Machine-readable CSV text with a commented configuration header."""
        lines = [
            f"# L={self.num_antennas} D={self.num_positions} seed={self.seed} "
            f"M={self.max_iterations}",
            f"# realizations per point: {self.rows[0].n_realizations if self.rows else 0} "
            "(desk-scale default; scale up for publication-grade statistics)",
            ",".join(self.TABLE_COLUMNS),
        ]
        for r in self.rows:
            lines.append(",".join([
                repr(r.snr_db), r.algorithm, _fmt_db(r.mean_p_db),
                _fmt_db(r.q1_p_db), _fmt_db(r.q3_p_db), str(r.n_realizations)]))
        return "\n".join(lines) + "\n"


def _fmt_db(x):
    # -inf kept portable across serializers
    return "-inf" if np.isneginf(x) else repr(float(x))


def _sweep_trial(R_clean, A, g_true, snr_lin, config, snr_index, trial):
    rng = rng_stream(config.seed, STREAM_SWEEP_NOISE, snr_index, trial)
    R = R_clean + _noise_like(R_clean, snr_lin, rng)
    est_cd = coordinate_descent(R, A, _trial_config(config, snr_index, trial))
    est_ev = eigenvector_estimate(R, A)
    return (cosine_similarity_db(est_cd.g_hat, g_true),
            cosine_similarity_db(est_ev.g_hat, g_true))


def snr_sweep(R_clean, A, g_true, snr_grid, realizations, config=None, n_jobs=1):
    """Paired Monte-Carlo comparison of both estimators across an SNR grid.

    For every (SNR, trial) pair a single noise realization is drawn and
    fed to both algorithms, so the comparison is paired.  Trials carry
    their own RNG streams keyed by (SNR index, trial index), so results
    are deterministic and independent of `n_jobs`.
    """
    config = config or SolverConfig()
    snr_grid = [float(s) for s in snr_grid]
    if not snr_grid:
        raise ValidationError("SNR grid must be nonempty")
    if realizations < 1:
        raise ValidationError("need at least one realization")
    R_clean = np.asarray(R_clean, dtype=complex)
    A = np.asarray(A, dtype=complex)
    g_true = np.asarray(g_true, dtype=complex)
    L, D = R_clean.shape

    jobs = [(i, snr, t) for i, snr in enumerate(snr_grid) for t in range(realizations)]
    if n_jobs == 1:
        outcomes = [_sweep_trial(R_clean, A, g_true, 10.0 ** (snr / 10.0), config, i, t)
                    for i, snr, t in jobs]
    else:
        from joblib import Parallel, delayed
        outcomes = Parallel(n_jobs=n_jobs)(
            delayed(_sweep_trial)(R_clean, A, g_true, 10.0 ** (snr / 10.0), config, i, t)
            for i, snr, t in jobs)

    rows = []
    for i, snr in enumerate(snr_grid):
        block = [outcomes[k] for k, (ji, _, _) in enumerate(jobs) if ji == i]
        p_iter = np.asarray([o[0] for o in block])
        p_eig = np.asarray([o[1] for o in block])
        for name, p in (("iterative", p_iter), ("eigenvector", p_eig)):
            rows.append(SweepRow(
                snr_db=snr, algorithm=name, mean_p_db=float(np.mean(p)),
                q1_p_db=float(np.percentile(p, 25)),
                q3_p_db=float(np.percentile(p, 75)),
                n_realizations=realizations))
    return SweepResult(rows=rows, num_antennas=L, num_positions=D,
                       seed=config.seed, max_iterations=config.max_iterations)


def _trial_config(config, snr_index, trial):
    # distinct deterministic initialization per trial
    derived = int(rng_stream(config.seed, STREAM_RESTART, snr_index, trial)
                  .integers(0, 2 ** 63))
    return SolverConfig(max_iterations=config.max_iterations,
                        relative_residual_tolerance=config.relative_residual_tolerance,
                        seed=derived)


@dataclass(frozen=True)
class ResidualTrace:
    """Residual-vs-iteration traces across random restarts plus the
    eigenvector-method and worst-case reference levels."""

    sequences: list
    final_residuals: np.ndarray
    eigenvector_residual: float
    measurement_norm: float


def residual_trace(R, A, config=None, restarts=1):
    """Run coordinate descent from `restarts` independent initializations
    and record the per-iteration residual sequences."""
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    config = config or SolverConfig()
    R = np.asarray(R, dtype=complex)
    A = np.asarray(A, dtype=complex)
    sequences = []
    finals = []
    for r in range(restarts):
        est = coordinate_descent(R, A, _trial_config(config, 0, r))
        sequences.append(list(est.residual_history))
        finals.append(est.residual_frobenius)
    eig = eigenvector_estimate(R, A)
    return ResidualTrace(sequences=sequences, final_residuals=np.asarray(finals),
                         eigenvector_residual=eig.residual_frobenius,
                         measurement_norm=float(np.linalg.norm(R)))
