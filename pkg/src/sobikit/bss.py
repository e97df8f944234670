"""Second-order blind identification with two joint-diagonalization backends.

The classic backend jointly diagonalizes a set of lagged covariance matrices
with Jacobi rotations (Cardoso & Souloumiac, SIAM J. Matrix Anal. Appl. 17,
1996).  The alternative backend collapses the set into one weighted sum and
takes its real Schur decomposition, which diagonalizes every matrix in the
set exactly when the set is exactly jointly diagonalizable, and approximately
otherwise — at the cost of a single eigendecomposition instead of an
iterative multi-matrix sweep.

Both diagonalizers run over plain Python lists rather than numpy arrays.
The inner loops are all O(n) scalar updates on 16-ish-sized matrices, where
per-element array indexing overhead would dominate and, worse, would differ
between the two code paths.  Keeping both kernels in the same scalar style
makes their running cost reflect their arithmetic, so the two methods can
be compared fairly.  Data plumbing (covariances, whitening, source recovery)
uses numpy as usual.
"""

import math
import warnings as _warnings
from dataclasses import dataclass, field
from time import perf_counter

import numpy as np

from . import features as _feat
from .errors import (
    DegenerateCombinationWarning,
    DegenerateDataError,
    InvalidSpecError,
    LagTooLargeError,
    NoConvergenceWarning,
    UnidentifiableWarning,
)
from .linalg import real_schur, sym_eig

__all__ = [
    "Recording",
    "LaggedCovarianceSet",
    "Whitener",
    "DiagonalizationResult",
    "Diagnostics",
    "SeparationResult",
    "ArtifactCriteria",
    "center",
    "lagged_covariance",
    "lagged_covariance_set",
    "whiten",
    "joint_diagonalize_jacobi",
    "diagonalize_schur",
    "sobi",
    "flag_artifact_components",
    "remove_components",
]


@dataclass(frozen=True)
class Recording:
    """Multichannel signal block: ``data`` is channels x samples."""

    data: np.ndarray
    sample_rate: float
    channel_names: tuple = ()

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        object.__setattr__(self, "data", data)
        if data.ndim != 2:
            raise InvalidSpecError("recording data must be 2-d (channels x samples)")
        n, t = data.shape
        if n < 2:
            raise InvalidSpecError(f"need at least 2 channels, got {n}")
        if t <= 4 * n:
            raise InvalidSpecError(
                f"need more than {4 * n} samples for {n} channels, got {t}"
            )
        if not np.isfinite(data).all():
            raise InvalidSpecError("recording data contains non-finite values")
        if self.sample_rate <= 0:
            raise InvalidSpecError("sample_rate must be positive")
        names = tuple(self.channel_names) if self.channel_names else tuple(
            f"ch{i}" for i in range(n)
        )
        if len(names) != n:
            raise InvalidSpecError(
                f"{len(names)} channel names for {n} channels"
            )
        object.__setattr__(self, "channel_names", names)

    @property
    def n_channels(self):
        return self.data.shape[0]

    @property
    def n_samples(self):
        return self.data.shape[1]

    @property
    def duration(self):
        return self.n_samples / self.sample_rate


@dataclass(frozen=True)
class LaggedCovarianceSet:
    """Symmetrized covariance matrices, one per lag."""

    lags: tuple
    matrices: list


@dataclass(frozen=True)
class Whitener:
    """Linear map ``w`` to unit covariance, with its pseudo-inverse."""

    w: np.ndarray
    w_pinv: np.ndarray
    retained_rank: int
    eigenvalues: np.ndarray


@dataclass
class DiagonalizationResult:
    rotation: np.ndarray
    score: float
    iterations: int
    converged: bool
    score_history: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


@dataclass
class Diagnostics:
    score: float
    iterations: int
    converged: bool
    score_history: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


@dataclass
class SeparationResult:
    """Everything ``sobi`` recovered, ordered by descending source variance.

    ``mixing_estimate`` columns have unit Euclidean norm; the data scale of
    component k lives in ``component_scales[k]`` (and therefore in the
    corresponding source row).  The stored maps satisfy
    ``unmixing == diag(component_scales) @ rotation.T @ whitener.w`` and
    ``sources == unmixing @ (data - means)``.
    """

    method: str
    unmixing: np.ndarray
    mixing_estimate: np.ndarray
    sources: np.ndarray
    rotation: np.ndarray
    component_scales: np.ndarray
    whitener: Whitener
    means: np.ndarray
    sample_rate: float
    channel_names: tuple
    elapsed_seconds: float
    diagnostics: Diagnostics

    @property
    def n_components(self):
        return self.sources.shape[0]


def center(rec):
    """Remove per-channel means.  Returns ``(centered_recording, means)``."""
    means = rec.data.mean(axis=1)
    centered = Recording(
        rec.data - means[:, None], rec.sample_rate, rec.channel_names
    )
    return centered, means


def _lagged_cov(data, lag):
    n, t = data.shape
    if lag < 0:
        raise LagTooLargeError(f"lag must be nonnegative, got {lag}")
    if lag >= t / 2:
        raise LagTooLargeError(f"lag {lag} too large for {t} samples (need lag < T/2)")
    c = data[:, : t - lag] @ data[:, lag:].T / (t - lag)
    return 0.5 * (c + c.T)


def lagged_covariance(rec, lag):
    """Symmetrized lag-``lag`` sample covariance of a (centered) recording."""
    return _lagged_cov(rec.data, lag)


def lagged_covariance_set(rec, lags):
    lags = tuple(int(l) for l in lags)
    if not lags:
        raise InvalidSpecError("need at least one lag")
    return LaggedCovarianceSet(
        lags, [_lagged_cov(rec.data, lag) for lag in lags]
    )


def _whitener_from_cov(cov0, rank_tol):
    eig = sym_eig(cov0.tolist())
    values = np.asarray(eig.values)
    vectors = np.asarray(eig.vectors)
    lam_max = values[0]
    if lam_max <= 0.0:
        raise DegenerateDataError("lag-0 covariance has no positive eigenvalue")
    keep = values > rank_tol * lam_max
    rank = int(np.count_nonzero(keep))
    inv_sqrt = 1.0 / np.sqrt(values[keep])
    w = inv_sqrt[:, None] * vectors[:, keep].T
    w_pinv = vectors[:, keep] * np.sqrt(values[keep])[None, :]
    return Whitener(w, w_pinv, rank, values)


def whiten(rec, rank_tol=1e-12):
    """Whitening map from the lag-0 covariance of an already-centered recording.

    Eigenvalues below ``rank_tol`` times the largest are dropped, so the
    whitened signal has full-rank identity covariance even when the input
    channels are linearly dependent.
    """
    return _whitener_from_cov(_lagged_cov(rec.data, 0), rank_tol)


def _off_score(mats):
    total = 0.0
    for m in mats:
        r = len(m)
        for i in range(r):
            row = m[i]
            for j in range(r):
                if i != j:
                    total += row[j] * row[j]
    return total


def _check_matrix_set(matrices):
    if not matrices:
        raise InvalidSpecError("need at least one matrix to diagonalize")
    r = np.asarray(matrices[0]).shape[0]
    for m in matrices:
        a = np.asarray(m, dtype=float)
        if a.shape != (r, r):
            raise InvalidSpecError("matrices must all be square with equal size")
        scale = max(1.0, float(np.abs(a).max()))
        if float(np.abs(a - a.T).max()) > 1e-10 * scale:
            raise InvalidSpecError("matrices must be symmetric")
    return r


def joint_diagonalize_jacobi(matrices, tol=1e-8, max_sweeps=100):
    """Jointly diagonalize symmetric matrices with cyclic Jacobi rotations.

    For each pivot pair the rotation angle maximizes the summed diagonal
    mass of the whole set (Cardoso & Souloumiac 1996); a rotation is applied
    only when ``|sin(theta)| >= tol``, and the sweep loop stops after the
    first sweep that applies none.  Returns the accumulated rotation ``V``
    with ``V.T @ M_k @ V`` approximately diagonal for every k.
    """
    r = _check_matrix_set(matrices)
    mats = [np.asarray(m, dtype=float).tolist() for m in matrices]
    v = [[1.0 if i == j else 0.0 for j in range(r)] for i in range(r)]
    history = [_off_score(mats)]
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        rotated = False
        for p in range(r - 1):
            for q in range(p + 1, r):
                ton = 0.0
                toff = 0.0
                for m in mats:
                    mp = m[p]
                    mq = m[q]
                    am = mp[p] - mq[q]
                    ap = mp[q] + mq[p]
                    ton += am * am - ap * ap
                    toff += 2.0 * am * ap
                theta = 0.5 * math.atan2(
                    toff, ton + math.sqrt(ton * ton + toff * toff)
                )
                s = math.sin(theta)
                if abs(s) < tol:
                    continue
                rotated = True
                c = math.cos(theta)
                for m in mats:
                    for i in range(r):
                        mi = m[i]
                        mip = mi[p]
                        miq = mi[q]
                        mi[p] = c * mip + s * miq
                        mi[q] = c * miq - s * mip
                    mp = m[p]
                    mq = m[q]
                    for j in range(r):
                        t1 = mp[j]
                        t2 = mq[j]
                        mp[j] = c * t1 + s * t2
                        mq[j] = c * t2 - s * t1
                for i in range(r):
                    vi = v[i]
                    vip = vi[p]
                    viq = vi[q]
                    vi[p] = c * vip + s * viq
                    vi[q] = c * viq - s * vip
        history.append(_off_score(mats))
        if not rotated:
            converged = True
            break
    warns = []
    if not converged:
        warns.append("no_convergence")
        _warnings.warn(
            f"joint diagonalization did not settle within {max_sweeps} sweeps",
            NoConvergenceWarning,
        )
    return DiagonalizationResult(
        rotation=np.array(v),
        score=history[-1],
        iterations=sweeps,
        converged=converged,
        score_history=history,
        warnings=warns,
    )


def _schur_score(matrices, rotation):
    total = 0.0
    for m in matrices:
        d = rotation.T @ np.asarray(m, dtype=float) @ rotation
        total += float(np.sum(d * d) - np.sum(np.diag(d) ** 2))
    return total


def diagonalize_schur(matrices, weights=None):
    """Approximately joint-diagonalize via one real Schur decomposition.

    The matrices are collapsed into a single symmetric combination
    ``sum_k weights[k] * M_k`` (uniform weights by default) whose Schur
    vectors serve as the joint rotation.  If the combination has a
    (near-)repeated eigenvalue its eigenvectors are not pinned down, so the
    combination is retried once with fixed pseudo-random weights in
    [0.5, 1.5]; a still-degenerate retry is returned with a warning flag.

    The reported score is the summed squared off-diagonal mass of the
    *original* matrices under the returned rotation, directly comparable
    with the Jacobi backend's score.
    """
    r = _check_matrix_set(matrices)
    k = len(matrices)
    if weights is not None:
        weights = [float(w) for w in weights]
        if len(weights) != k:
            raise InvalidSpecError(f"{len(weights)} weights for {k} matrices")
        if sum(abs(w) for w in weights) <= 0.0:
            raise InvalidSpecError("weights must not all be zero")
    else:
        weights = [1.0 / k] * k

    def _attempt(wts):
        combined = [[0.0] * r for _ in range(r)]
        for w, m in zip(wts, matrices):
            a = np.asarray(m, dtype=float)
            for i in range(r):
                ci = combined[i]
                ai = a[i]
                for j in range(r):
                    ci[j] += w * ai[j]
        for i in range(r):
            for j in range(i + 1, r):
                s = 0.5 * (combined[i][j] + combined[j][i])
                combined[i][j] = s
                combined[j][i] = s
        form = real_schur(combined)
        eigs = sorted(form.t[i][i] for i in range(r))
        lam_max = max(abs(e) for e in eigs) if r else 0.0
        gap_ok = True
        for a, b in zip(eigs, eigs[1:]):
            if abs(b - a) < 1e-8 * max(lam_max, 1e-300):
                gap_ok = False
                break
        return form, gap_ok

    warns = []
    form, gap_ok = _attempt(weights)
    iterations = form.iterations
    if not gap_ok and r > 1:
        warns.append("degenerate_combination")
        _warnings.warn(
            "weighted covariance combination has a near-repeated eigenvalue; "
            "retrying with perturbed weights",
            DegenerateCombinationWarning,
        )
        from .rng import Xorshift64Star

        rng = Xorshift64Star(0x5EEDC0DE)
        retry_weights = [w * rng.uniform_range(0.5, 1.5) for w in weights]
        form, gap_ok = _attempt(retry_weights)
        iterations += form.iterations
        if not gap_ok:
            warns.append("degenerate_after_retry")
    rotation = np.array(form.q)
    return DiagonalizationResult(
        rotation=rotation,
        score=_schur_score(matrices, rotation),
        iterations=iterations,
        converged=True,
        score_history=[],
        warnings=warns,
    )


def sobi(rec, lags=None, method="jacobi", tol=1e-8, rank_tol=1e-12, max_sweeps=100):
    """Separate a recording into sources via second-order statistics.

    Pipeline: center, whiten, form lagged covariances of the whitened data,
    joint-diagonalize them with the selected backend, then reconstruct the
    unmixing/mixing maps.  ``elapsed_seconds`` times the whole pipeline.
    """
    if method not in ("jacobi", "schur"):
        raise InvalidSpecError(f"unknown method {method!r}")
    if lags is None:
        lags = range(1, 11)
    lags = tuple(int(l) for l in lags)
    if not lags:
        raise InvalidSpecError("need at least one lag")

    t0 = perf_counter()
    means = rec.data.mean(axis=1)
    xc = rec.data - means[:, None]
    whitener = _whitener_from_cov(_lagged_cov(xc, 0), rank_tol)
    w = whitener.w
    # R_z(lag) = W R_x(lag) W^T, so the big products happen once per lag on
    # the channel data and the whitening map touches only r x n matrices.
    covs = []
    for lag in lags:
        m = w @ _lagged_cov(xc, lag) @ w.T
        covs.append(0.5 * (m + m.T))

    if method == "jacobi":
        diag = joint_diagonalize_jacobi(covs, tol=tol, max_sweeps=max_sweeps)
    else:
        diag = diagonalize_schur(covs)
    rotation = diag.rotation

    raw_mixing = whitener.w_pinv @ rotation
    scales = np.sqrt(np.sum(raw_mixing * raw_mixing, axis=0))
    scales[scales == 0.0] = 1.0

    order = np.argsort(-scales, kind="stable")
    rotation = rotation[:, order]
    raw_mixing = raw_mixing[:, order]
    scales = scales[order]

    mixing = raw_mixing / scales[None, :]
    signs = np.ones(mixing.shape[1])
    for kcol in range(mixing.shape[1]):
        col = mixing[:, kcol]
        if col[np.argmax(np.abs(col))] < 0.0:
            signs[kcol] = -1.0
    rotation = rotation * signs[None, :]
    mixing = mixing * signs[None, :]

    unmixing = scales[:, None] * (rotation.T @ whitener.w)
    sources = unmixing @ xc
    elapsed = perf_counter() - t0

    warns = list(diag.warnings)
    rotated_diags = np.array(
        [np.diag(rotation.T @ c @ rotation) for c in covs]
    )
    r = rotation.shape[0]
    unidentifiable = []
    for i in range(r - 1):
        for j in range(i + 1, r):
            if np.max(np.abs(rotated_diags[:, i] - rotated_diags[:, j])) < 0.01:
                unidentifiable.append((i, j))
    if unidentifiable:
        warns.append("unidentifiable_sources")
        _warnings.warn(
            f"source pairs {unidentifiable} have nearly identical lagged "
            "autocovariances and cannot be reliably told apart",
            UnidentifiableWarning,
        )

    diagnostics = Diagnostics(
        score=diag.score,
        iterations=diag.iterations,
        converged=diag.converged,
        score_history=list(diag.score_history),
        warnings=warns,
    )
    return SeparationResult(
        method=method,
        unmixing=unmixing,
        mixing_estimate=mixing,
        sources=sources,
        rotation=rotation,
        component_scales=scales,
        whitener=whitener,
        means=means,
        sample_rate=rec.sample_rate,
        channel_names=rec.channel_names,
        elapsed_seconds=elapsed,
        diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class ArtifactCriteria:
    """Thresholds for calling a separated component an artifact.

    A component is flagged when the fraction of its power below
    ``low_freq_cutoff`` exceeds ``low_freq_fraction`` (ocular-type drift /
    blink activity) or the fraction inside ``line_low..line_high`` exceeds
    ``line_fraction`` (mains interference).
    """

    low_freq_fraction: float = 0.6
    line_fraction: float = 0.5
    low_freq_cutoff: float = 4.0
    line_low: float = 49.0
    line_high: float = 51.0


def flag_artifact_components(res, sample_rate=None, criteria=None):
    """Indices of separated components whose spectra look artifactual."""
    fs = res.sample_rate if sample_rate is None else sample_rate
    crit = criteria or ArtifactCriteria()
    low_band = _feat.Band(0.0, crit.low_freq_cutoff, "low")
    line_band = _feat.Band(crit.line_low, crit.line_high, "line")
    flagged = []
    for k in range(res.sources.shape[0]):
        src = res.sources[k]
        total = float(np.mean(src * src))
        if total <= 0.0:
            continue
        low = _feat.band_power(src, low_band, fs)
        line = _feat.band_power(src, line_band, fs)
        if low / total > crit.low_freq_fraction or line / total > crit.line_fraction:
            flagged.append(k)
    return flagged


def remove_components(res, indices):
    """Reconstruct the recording with the given components zeroed out."""
    n_comp = res.sources.shape[0]
    for idx in indices:
        if not 0 <= idx < n_comp:
            raise IndexError(f"component index {idx} out of range 0..{n_comp - 1}")
    kept = res.sources.copy()
    for idx in indices:
        kept[idx, :] = 0.0
    data = res.mixing_estimate @ kept + res.means[:, None]
    return Recording(data, res.sample_rate, res.channel_names)
