"""Tests for centering, whitening, the two joint diagonalizers, and sobi."""

import itertools
import math
import warnings

import numpy as np
import pytest

from sobikit.bss import (
    ArtifactCriteria,
    Recording,
    SeparationResult,
    Diagnostics,
    Whitener,
    center,
    diagonalize_schur,
    flag_artifact_components,
    joint_diagonalize_jacobi,
    lagged_covariance,
    lagged_covariance_set,
    remove_components,
    sobi,
    whiten,
)
from sobikit.errors import (
    DegenerateCombinationWarning,
    InvalidSpecError,
    LagTooLargeError,
    UnidentifiableWarning,
)


def _recording(seed, n=4, t=2000, fs=250.0):
    rng = np.random.default_rng(seed)
    return Recording(rng.standard_normal((n, t)), fs)


def _match_rotation(r1, r2):
    """Max angle between matched columns, allowing signed permutation."""
    n = r1.shape[1]
    cos = np.abs(r1.T @ r2)
    best = None
    for perm in itertools.permutations(range(n)):
        score = sum(cos[i, perm[i]] for i in range(n))
        if best is None or score > best[0]:
            best = (score, perm)
    _, perm = best
    angles = [math.acos(min(1.0, cos[i, perm[i]])) for i in range(n)]
    return max(angles)


def _matched_correlations(recovered, truth):
    """Best |corr| per true source over all permutations (exhaustive)."""
    m = truth.shape[0]
    c = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            c[i, j] = abs(float(np.corrcoef(recovered[i], truth[j])[0, 1]))
    best = None
    for perm in itertools.permutations(range(m)):
        score = sum(c[perm[j], j] for j in range(m))
        if best is None or score > best[0]:
            best = (score, perm)
    _, perm = best
    return np.array([c[perm[j], j] for j in range(m)])


# ---------------------------------------------------------------- recording


def test_recording_validation():
    with pytest.raises(InvalidSpecError):
        Recording(np.zeros((1, 100)), 250.0)
    with pytest.raises(InvalidSpecError):
        Recording(np.zeros((3, 12)), 250.0)  # needs > 4n samples
    with pytest.raises(InvalidSpecError):
        Recording(np.full((2, 100), np.nan), 250.0)
    with pytest.raises(InvalidSpecError):
        Recording(np.zeros((2, 100)), 0.0)
    with pytest.raises(InvalidSpecError):
        Recording(np.zeros((2, 100)), 250.0, channel_names=("a",))


def test_recording_defaults_and_properties():
    rec = _recording(0, n=3, t=100)
    assert rec.n_channels == 3
    assert rec.n_samples == 100
    assert rec.duration == pytest.approx(0.4)
    assert rec.channel_names == ("ch0", "ch1", "ch2")


def test_center_removes_means():
    rec = _recording(1)
    offsets = np.array([5.0, -3.0, 0.25, 100.0])
    shifted = Recording(rec.data + offsets[:, None], rec.sample_rate)
    centered, means = center(shifted)
    assert np.abs(centered.data.mean(axis=1)).max() < 1e-12
    assert np.abs(means - (rec.data.mean(axis=1) + offsets)).max() < 1e-12


# ------------------------------------------------------- lagged covariances


def test_lagged_covariance_against_bruteforce():
    rng = np.random.default_rng(2)
    data = rng.standard_normal((3, 60))
    data -= data.mean(axis=1, keepdims=True)
    rec = Recording(data, 100.0)
    for lag in (0, 1, 5, 17):
        got = lagged_covariance(rec, lag)
        t_eff = 60 - lag
        raw = np.zeros((3, 3))
        for i in range(3):
            for j in range(3):
                acc = 0.0
                for t in range(t_eff):
                    acc += data[i, t] * data[j, t + lag]
                raw[i, j] = acc / t_eff
        expected = 0.5 * (raw + raw.T)
        assert np.abs(got - expected).max() < 1e-12, f"lag {lag}"
        assert np.abs(got - got.T).max() == 0.0


def test_lagged_covariance_lag_bounds():
    rec = _recording(3, n=2, t=100)
    with pytest.raises(LagTooLargeError):
        lagged_covariance(rec, 50)  # >= T/2
    with pytest.raises(LagTooLargeError):
        lagged_covariance(rec, -1)


def test_lagged_covariance_set_shape():
    rec = _recording(4)
    cs = lagged_covariance_set(rec, (1, 2, 3))
    assert cs.lags == (1, 2, 3)
    assert len(cs.matrices) == 3
    for m in cs.matrices:
        assert m.shape == (4, 4)


# ------------------------------------------------------------------ whiten


def test_whiten_gives_identity_covariance():
    for seed in range(10):
        rec, _ = center(_recording(seed, n=5, t=3000))
        wh = whiten(rec)
        z = wh.w @ rec.data
        cov = z[:, :] @ z.T / z.shape[1]
        assert np.abs(cov - np.eye(wh.retained_rank)).max() < 1e-8
        assert wh.retained_rank == 5


def test_whiten_drops_dependent_channel():
    rng = np.random.default_rng(11)
    base = rng.standard_normal((3, 2000))
    data = np.vstack([base, base[0] + base[1]])  # rank 3 in 4 channels
    data -= data.mean(axis=1, keepdims=True)
    rec = Recording(data, 250.0)
    wh = whiten(rec)
    assert wh.retained_rank == 3
    z = wh.w @ rec.data
    cov = z @ z.T / z.shape[1]
    assert np.abs(cov - np.eye(3)).max() < 1e-8


def test_whitener_pinv_is_right_inverse():
    rec, _ = center(_recording(12, n=6, t=4000))
    wh = whiten(rec)
    assert np.abs(wh.w @ wh.w_pinv - np.eye(wh.retained_rank)).max() < 1e-10


# ------------------------------------------------- joint diagonalizers


def _exact_jd_set(seed, n=5, k=6):
    """Matrices sharing one orthogonal eigenbasis, with distinct spectra."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    mats = []
    for _ in range(k):
        d = rng.uniform(0.5, 3.0, size=n)
        mats.append(q @ np.diag(d) @ q.T)
    return q, mats


def test_jacobi_recovers_shared_eigenbasis():
    for seed in range(8):
        q, mats = _exact_jd_set(seed)
        res = joint_diagonalize_jacobi(mats)
        assert res.converged
        assert _match_rotation(np.asarray(res.rotation), q) < 1e-7
        assert res.score < 1e-12 * max(np.abs(m).max() for m in mats)


def test_jacobi_score_history_non_increasing():
    rng = np.random.default_rng(20)
    for seed in range(10):
        _, mats = _exact_jd_set(seed, n=6, k=4)
        # perturb so the set is only approximately diagonalizable
        mats = [m + 0.05 * random_sym(rng, 6) for m in mats]
        res = joint_diagonalize_jacobi(mats)
        hist = res.score_history
        assert len(hist) >= 1
        assert all(b <= a + 1e-15 for a, b in zip(hist, hist[1:])), hist


def random_sym(rng, n):
    a = rng.standard_normal((n, n))
    return 0.5 * (a + a.T)


def test_jacobi_on_diagonal_set_is_immediate():
    mats = [np.diag([3.0, 2.0, 1.0]), np.diag([1.0, 5.0, 2.0])]
    res = joint_diagonalize_jacobi(mats)
    assert res.converged
    assert res.iterations <= 1
    assert _match_rotation(np.asarray(res.rotation), np.eye(3)) < 1e-12


def test_diagonalizers_reject_asymmetric_input():
    bad = [np.array([[1.0, 2.0], [0.0, 1.0]])]
    with pytest.raises(InvalidSpecError):
        joint_diagonalize_jacobi(bad)
    with pytest.raises(InvalidSpecError):
        diagonalize_schur(bad)


def test_schur_agrees_with_jacobi_on_exact_sets():
    for seed in range(8):
        q, mats = _exact_jd_set(seed)
        rj = joint_diagonalize_jacobi(mats)
        rs = diagonalize_schur(mats)
        assert rs.converged
        gap = _match_rotation(np.asarray(rs.rotation), np.asarray(rj.rotation))
        assert gap < 1e-6, f"seed {seed}: rotations {gap:.2e} rad apart"
        # scores are computed the same way, so both should be tiny
        assert rs.score < 1e-10


def test_schur_degenerate_combination_warns_and_recovers():
    # uniform weights average to a multiple of the identity
    mats = [np.diag([1.0, 2.0]), np.diag([2.0, 1.0])]
    with pytest.warns(DegenerateCombinationWarning):
        res = diagonalize_schur(mats)
    # the reweighted retry must still diagonalize this trivially diagonal set
    assert res.score < 1e-12
    assert any("degenerate" in w.lower() for w in res.warnings)


def test_schur_explicit_weights():
    q, mats = _exact_jd_set(42, n=4, k=3)
    res = diagonalize_schur(mats, weights=(1.0, 0.0, 0.0))
    assert _match_rotation(np.asarray(res.rotation), q) < 1e-7
    with pytest.raises(InvalidSpecError):
        diagonalize_schur(mats, weights=(1.0,))


# -------------------------------------------------------------------- sobi


def _sinusoid_recording(seed, n_sources=5, channels=8, t=4000, fs=250.0):
    rng = np.random.default_rng(seed)
    times = np.arange(t) / fs
    freqs = np.array([6.0, 11.0, 19.0, 31.0, 47.0])[:n_sources]
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_sources)
    sources = np.sin(2.0 * np.pi * freqs[:, None] * times[None, :] + phases[:, None])
    mixing = rng.standard_normal((channels, n_sources))
    return Recording(mixing @ sources, fs), sources


@pytest.mark.parametrize("method", ["jacobi", "schur"])
def test_sobi_separates_sinusoids(method):
    for seed in range(5):
        rec, sources = _sinusoid_recording(seed)
        res = sobi(rec, lags=range(1, 11), method=method)
        corr = _matched_correlations(res.sources[:5], sources)
        assert corr.min() > 0.99, f"seed {seed}: {corr}"


def test_sobi_result_invariants():
    rec, _ = _sinusoid_recording(7)
    for method in ("jacobi", "schur"):
        res = sobi(rec, method=method)
        # stored maps are mutually consistent
        rebuilt = res.component_scales[:, None] * (res.rotation.T @ res.whitener.w)
        assert np.abs(res.unmixing - rebuilt).max() < 1e-12
        # mixing columns have unit norm, scales sorted descending
        norms = np.linalg.norm(res.mixing_estimate, axis=0)
        assert np.abs(norms - 1.0).max() < 1e-10
        assert np.all(np.diff(res.component_scales) <= 1e-12)
        assert np.all(res.component_scales > 0.0)
        # sign convention: largest |entry| of each mixing column positive
        for k in range(res.mixing_estimate.shape[1]):
            col = res.mixing_estimate[:, k]
            assert col[np.argmax(np.abs(col))] > 0.0
        # sources row = unmixing applied to centered data
        xc = rec.data - res.means[:, None]
        assert np.abs(res.sources - res.unmixing @ xc).max() < 1e-10
        # full-rank case: mixing @ sources + means reconstructs the input
        recon = res.mixing_estimate @ res.sources + res.means[:, None]
        assert np.abs(recon - rec.data).max() < 1e-8 * np.abs(rec.data).max()
        assert res.elapsed_seconds > 0.0
        assert res.diagnostics.converged


def test_sobi_methods_agree_on_clean_data():
    rec, _ = _sinusoid_recording(13)
    rj = sobi(rec, method="jacobi")
    rs = sobi(rec, method="schur")
    # same subspaces: sources should match nearly perfectly pairwise
    corr = _matched_correlations(rj.sources[:5], rs.sources[:5])
    assert corr.min() > 0.999


def test_sobi_rejects_unknown_method():
    rec, _ = _sinusoid_recording(1)
    with pytest.raises(InvalidSpecError):
        sobi(rec, method="qr")
    with pytest.raises(InvalidSpecError):
        sobi(rec, lags=[])


def test_sobi_unidentifiable_pair_warns():
    # two sources with identical spectra cannot be told apart by any lag
    fs = 250.0
    t = np.arange(3000) / fs
    s = np.vstack(
        [
            np.sin(2.0 * np.pi * 10.0 * t),
            np.cos(2.0 * np.pi * 10.0 * t),
            np.sin(2.0 * np.pi * 25.0 * t + 0.3),
        ]
    )
    rng = np.random.default_rng(3)
    rec = Recording(rng.standard_normal((5, 3)) @ s, fs)
    with pytest.warns(UnidentifiableWarning):
        res = sobi(rec, method="jacobi")
    assert "unidentifiable_sources" in res.diagnostics.warnings


# -------------------------------------------------------- artifact cleanup


def _fake_separation(sources, fs=250.0):
    n = sources.shape[0]
    mixing = np.eye(n)
    return SeparationResult(
        method="jacobi",
        unmixing=np.eye(n),
        mixing_estimate=mixing,
        sources=sources,
        rotation=np.eye(n),
        component_scales=np.ones(n),
        whitener=Whitener(np.eye(n), np.eye(n), n, np.ones(n)),
        means=np.zeros(n),
        sample_rate=fs,
        channel_names=tuple(f"ch{i}" for i in range(n)),
        elapsed_seconds=0.0,
        diagnostics=Diagnostics(0.0, 1, True),
    )


def test_flag_artifact_components_by_spectrum():
    fs = 250.0
    t = np.arange(5000) / fs
    line = np.sin(2.0 * np.pi * 50.0 * t)
    drift = np.sin(2.0 * np.pi * 0.7 * t)
    alpha = np.sin(2.0 * np.pi * 10.0 * t)
    res = _fake_separation(np.vstack([alpha, line, drift]), fs)
    flagged = flag_artifact_components(res)
    assert flagged == [1, 2]


def test_flag_artifact_criteria_are_tunable():
    fs = 250.0
    t = np.arange(5000) / fs
    alpha = np.sin(2.0 * np.pi * 10.0 * t)
    res = _fake_separation(np.vstack([alpha, alpha * 0.5]), fs)
    # an impossible threshold flags nothing
    crit = ArtifactCriteria(low_freq_fraction=1.1, line_fraction=1.1)
    assert flag_artifact_components(res, criteria=crit) == []


def test_remove_components_zeroes_contribution():
    rec, _ = _sinusoid_recording(21)
    res = sobi(rec, method="schur")
    cleaned = remove_components(res, [0])
    kept = res.sources.copy()
    kept[0] = 0.0
    expected = res.mixing_estimate @ kept + res.means[:, None]
    assert np.abs(cleaned.data - expected).max() < 1e-12
    assert cleaned.sample_rate == rec.sample_rate
    assert cleaned.channel_names == rec.channel_names


def test_remove_components_bad_index():
    rec, _ = _sinusoid_recording(22)
    res = sobi(rec, method="schur")
    with pytest.raises(IndexError):
        remove_components(res, [99])
