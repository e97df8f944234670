"""Binary SVM trained with sequential minimal optimization, from scratch.

Training follows the simplified SMO scheme (Platt 1998's algorithm with
random second-index selection): pick a multiplier that violates the KKT
conditions, pair it with a seeded random partner, and solve the
two-variable subproblem analytically.  After the pass loop settles, an
explicit KKT audit either confirms optimality within ``tol`` or sends the
optimizer back for more passes until an iteration budget runs out.

Features are standardized inside ``svm_train`` using training-set
statistics only; the fitted standardizer travels with the model so
prediction-time inputs are mapped through the same affine transform.
"""

import json
import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptySignalError,
    InvalidSpecError,
    NoConvergenceWarning,
    SingleClassError,
    TooFewSamplesError,
)
from .rng import Xorshift64Star, stream

__all__ = [
    "Standardizer",
    "LabeledDataset",
    "SvmModel",
    "standardize_fit_apply",
    "svm_train",
    "svm_predict",
    "cross_validate",
    "stratified_folds",
    "save_model",
    "load_model",
]

_KERNELS = ("linear", "rbf")


@dataclass(frozen=True)
class Standardizer:
    """Per-feature affine map fitted on training data: (x - mean) / std.

    Constant features keep ``std = 1`` (so they map to exact zeros) and are
    flagged in ``constant_mask``.
    """

    means: np.ndarray
    stds: np.ndarray
    constant_mask: np.ndarray

    def apply(self, x):
        return (np.asarray(x, dtype=float) - self.means) / self.stds


@dataclass(frozen=True)
class LabeledDataset:
    """Feature vectors with ±1 labels (left = -1, right = +1)."""

    vectors: np.ndarray
    labels: np.ndarray
    provenance: tuple = ()

    def __post_init__(self):
        vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        labels = np.asarray(self.labels, dtype=int)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)
        if vectors.shape[0] != labels.shape[0]:
            raise InvalidSpecError(
                f"{vectors.shape[0]} vectors but {labels.shape[0]} labels"
            )
        if labels.size and not np.all(np.isin(labels, (-1, 1))):
            raise InvalidSpecError("labels must be -1 or +1")
        if not np.isfinite(vectors).all():
            raise InvalidSpecError("feature vectors contain non-finite values")

    def __len__(self):
        return self.labels.shape[0]


@dataclass(frozen=True)
class SvmModel:
    kernel: str
    gamma: float
    alphas: np.ndarray
    support_vectors: np.ndarray
    support_labels: np.ndarray
    bias: float
    c: float
    standardizer: Standardizer
    n_features: int
    converged: bool = True


def standardize_fit_apply(train):
    """Fit a standardizer on a dataset and return it with the transformed data."""
    if len(train) == 0:
        raise EmptySignalError("cannot standardize an empty dataset")
    x = train.vectors
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    constant = stds == 0.0
    stds = np.where(constant, 1.0, stds)
    standardizer = Standardizer(means, stds, constant)
    transformed = LabeledDataset(
        standardizer.apply(x), train.labels, train.provenance
    )
    return standardizer, transformed


def _kernel_matrix(x, kernel, gamma):
    if kernel == "linear":
        return x @ x.T
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    return np.exp(-gamma * np.maximum(d2, 0.0))


def _kernel_vector(support, x, kernel, gamma):
    if kernel == "linear":
        return support @ x
    diff = support - x[None, :]
    return np.exp(-gamma * np.sum(diff * diff, axis=1))


def _kkt_violations(alphas, margins, c, tol):
    count = 0
    for a, m in zip(alphas, margins):
        if a <= 1e-8:
            if m < 1.0 - tol:
                count += 1
        elif a >= c - 1e-8:
            if m > 1.0 + tol:
                count += 1
        elif abs(m - 1.0) > tol:
            count += 1
    return count


def _recompute_bias(alphas, y, k, c):
    """Optimal bias for fixed alphas.

    The running bias SMO maintains is only approximate; with the multipliers
    settled, the KKT-consistent bias is the mean residual over free support
    vectors, or the midpoint of the feasible interval the bound points allow.
    """
    f0 = (alphas * y) @ k
    free = (alphas > 1e-8) & (alphas < c - 1e-8)
    if free.any():
        return float(np.mean(y[free] - f0[free]))
    lo, hi = -np.inf, np.inf
    for i in range(y.shape[0]):
        target = y[i] - f0[i]
        at_upper = alphas[i] >= c - 1e-8
        # alpha = 0 demands margin >= 1; alpha = C demands margin <= 1.
        if (not at_upper and y[i] > 0) or (at_upper and y[i] < 0):
            lo = max(lo, target)
        else:
            hi = min(hi, target)
    if not np.isfinite(lo):
        return float(hi)
    if not np.isfinite(hi):
        return float(lo)
    return float(0.5 * (lo + hi))


def svm_train(data, c=1.0, kernel="linear", tol=1e-3, max_passes=50, seed=0, gamma=1.0):
    """Train a binary SVM by simplified SMO with a closing KKT audit.

    Deterministic for a fixed ``(data order, seed)``.  If the KKT audit still
    finds violations when the pass budget runs out, the best iterate is
    returned with ``converged=False`` and a :class:`NoConvergenceWarning`.
    """
    if kernel not in _KERNELS:
        raise InvalidSpecError(f"unknown kernel {kernel!r}")
    if c <= 0.0:
        raise InvalidSpecError("regularization c must be > 0")
    if gamma <= 0.0:
        raise InvalidSpecError("rbf gamma must be > 0")
    labels = data.labels
    if len(data) == 0 or np.all(labels == labels[0]):
        raise SingleClassError("training data must contain both classes")

    standardizer, std_data = standardize_fit_apply(data)
    x = std_data.vectors
    y = labels.astype(float)
    n = x.shape[0]
    k = _kernel_matrix(x, kernel, gamma)
    rng = Xorshift64Star(seed)

    alphas = np.zeros(n)
    b = 0.0

    def decision(i):
        return float((alphas * y) @ k[:, i] + b)

    def take_step(i, j, min_delta):
        nonlocal b
        if i == j:
            return False
        a_i_old, a_j_old = alphas[i], alphas[j]
        y_i, y_j = y[i], y[j]
        s = y_i * y_j
        if s < 0.0:
            low = max(0.0, a_j_old - a_i_old)
            high = min(c, c + a_j_old - a_i_old)
        else:
            low = max(0.0, a_i_old + a_j_old - c)
            high = min(c, a_i_old + a_j_old)
        if low >= high:
            return False
        e_i = decision(i) - y_i
        e_j = decision(j) - y_j
        eta = k[i, i] + k[j, j] - 2.0 * k[i, j]
        if eta > 0.0:
            a_j = a_j_old + y_j * (e_i - e_j) / eta
            a_j = min(high, max(low, a_j))
        else:
            # Zero/negative curvature (e.g. duplicated points): the dual
            # objective is linear along this direction, so evaluate it at
            # both endpoints and move to the better one.
            gamma_sum = a_i_old + s * a_j_old
            f0_i = decision(i) - b
            f0_j = decision(j) - b
            v_i = f0_i - a_i_old * y_i * k[i, i] - a_j_old * y_j * k[i, j]
            v_j = f0_j - a_i_old * y_i * k[i, j] - a_j_old * y_j * k[j, j]

            def dual_at(a_j_val):
                a_i_val = gamma_sum - s * a_j_val
                return (
                    a_i_val + a_j_val
                    - 0.5 * a_i_val * a_i_val * k[i, i]
                    - 0.5 * a_j_val * a_j_val * k[j, j]
                    - s * a_i_val * a_j_val * k[i, j]
                    - a_i_val * y_i * v_i
                    - a_j_val * y_j * v_j
                )

            low_obj = dual_at(low)
            high_obj = dual_at(high)
            if low_obj > high_obj + 1e-12:
                a_j = low
            elif high_obj > low_obj + 1e-12:
                a_j = high
            else:
                return False
        if abs(a_j - a_j_old) < min_delta * (a_j + a_j_old + min_delta):
            return False
        if a_j < 1e-10:
            a_j = 0.0
        elif a_j > c - 1e-10:
            a_j = c
        a_i = a_i_old + s * (a_j_old - a_j)
        alphas[i], alphas[j] = a_i, a_j
        b1 = (
            b - e_i
            - y_i * (a_i - a_i_old) * k[i, i]
            - y_j * (a_j - a_j_old) * k[i, j]
        )
        b2 = (
            b - e_j
            - y_i * (a_i - a_i_old) * k[i, j]
            - y_j * (a_j - a_j_old) * k[j, j]
        )
        if 0.0 < a_i < c:
            b = b1
        elif 0.0 < a_j < c:
            b = b2
        else:
            b = 0.5 * (b1 + b2)
        return True

    def one_pass():
        changed = 0
        for i in range(n):
            e_i = decision(i) - y[i]
            if not (
                (y[i] * e_i < -tol and alphas[i] < c)
                or (y[i] * e_i > tol and alphas[i] > 0.0)
            ):
                continue
            j = rng.randint(n - 1)
            if j >= i:
                j += 1
            if take_step(i, j, 1e-5):
                changed += 1
        return changed

    def violators():
        margins = y * ((alphas * y) @ k + b)
        bad = []
        for i in range(n):
            a, m = alphas[i], margins[i]
            if a <= 1e-8:
                if m < 1.0 - tol:
                    bad.append(i)
            elif a >= c - 1e-8:
                if m > 1.0 + tol:
                    bad.append(i)
            elif abs(m - 1.0) > tol:
                bad.append(i)
        return bad

    # Main phase: simplified SMO with seeded random partner selection.
    total = 0
    budget = 40 * max_passes
    quiet = 0
    while quiet < max_passes and total < budget:
        total += 1
        if one_pass() == 0:
            quiet += 1
        else:
            quiet = 0

    # Polish phase: while the KKT audit still finds violators, pair each one
    # deterministically with every other point.  This terminates either
    # clean or at a pairwise optimum where no two-variable step helps.
    converged = False
    for _ in range(100):
        b = _recompute_bias(alphas, y, k, c)
        bad = violators()
        if not bad:
            converged = True
            break
        improved = False
        for i in bad:
            for j in range(n):
                if take_step(i, j, 1e-12):
                    improved = True
                    break
        if not improved:
            break
    if not converged:
        _warnings.warn(
            "SMO reached a pairwise optimum with KKT violations beyond tol; "
            "returning the best iterate",
            NoConvergenceWarning,
        )

    support = alphas > 1e-8
    return SvmModel(
        kernel=kernel,
        gamma=gamma,
        alphas=alphas[support],
        support_vectors=x[support],
        support_labels=y[support],
        bias=b,
        c=c,
        standardizer=standardizer,
        n_features=x.shape[1],
        converged=converged,
    )


def svm_predict(model, x):
    """Predict one vector: returns ``(label, decision_value)``; ties go to +1."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != model.n_features:
        raise DimensionMismatchError(
            f"vector has {x.shape[0]} features, model expects {model.n_features}"
        )
    z = model.standardizer.apply(x)
    if model.alphas.size:
        kv = _kernel_vector(model.support_vectors, z, model.kernel, model.gamma)
        decision = float((model.alphas * model.support_labels) @ kv + model.bias)
    else:
        decision = float(model.bias)
    label = 1 if decision >= 0.0 else -1
    return label, decision


def stratified_folds(labels, folds, seed):
    """Seeded stratified split: list of ``folds`` index arrays covering 0..n-1."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    if folds < 2:
        raise InvalidSpecError("need at least 2 folds")
    if folds > n:
        raise TooFewSamplesError(f"{folds} folds for {n} samples")
    assignments = [[] for _ in range(folds)]
    for class_idx, value in enumerate(sorted(set(labels.tolist()))):
        members = [int(i) for i in np.flatnonzero(labels == value)]
        stream(seed, class_idx).shuffle(members)
        for pos, idx in enumerate(members):
            assignments[pos % folds].append(idx)
    if any(len(fold) == 0 for fold in assignments):
        raise TooFewSamplesError("a fold would be empty")
    return [np.array(sorted(fold)) for fold in assignments]


def cross_validate(
    data, folds=5, c=1.0, kernel="linear", seed=0, tol=1e-3, max_passes=50, gamma=1.0
):
    """Stratified k-fold cross-validation; standardization happens per fold.

    Returns ``(mean_accuracy, per_fold_accuracies)``.
    """
    fold_indices = stratified_folds(data.labels, folds, seed)
    accuracies = []
    for held_out in fold_indices:
        mask = np.ones(len(data), dtype=bool)
        mask[held_out] = False
        train = LabeledDataset(data.vectors[mask], data.labels[mask])
        model = svm_train(
            train, c=c, kernel=kernel, tol=tol, max_passes=max_passes,
            seed=seed, gamma=gamma,
        )
        hits = sum(
            1
            for i in held_out
            if svm_predict(model, data.vectors[i])[0] == data.labels[i]
        )
        accuracies.append(hits / held_out.shape[0])
    return float(np.mean(accuracies)), accuracies


def save_model(model, path):
    """Persist a model as version-1 JSON."""
    payload = {
        "format_version": 1,
        "kernel": model.kernel,
        "gamma": model.gamma,
        "c": model.c,
        "bias": model.bias,
        "converged": model.converged,
        "n_features": model.n_features,
        "alphas": model.alphas.tolist(),
        "support_vectors": model.support_vectors.tolist(),
        "support_labels": model.support_labels.tolist(),
        "standardizer": {
            "means": model.standardizer.means.tolist(),
            "stds": model.standardizer.stds.tolist(),
            "constant_mask": model.standardizer.constant_mask.tolist(),
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != 1:
        raise InvalidSpecError(f"unsupported model format_version {version!r}")
    std = payload["standardizer"]
    return SvmModel(
        kernel=payload["kernel"],
        gamma=payload["gamma"],
        alphas=np.array(payload["alphas"], dtype=float),
        support_vectors=np.array(payload["support_vectors"], dtype=float).reshape(
            len(payload["alphas"]), payload["n_features"]
        ),
        support_labels=np.array(payload["support_labels"], dtype=float),
        bias=payload["bias"],
        c=payload["c"],
        standardizer=Standardizer(
            np.array(std["means"], dtype=float),
            np.array(std["stds"], dtype=float),
            np.array(std["constant_mask"], dtype=bool),
        ),
        n_features=payload["n_features"],
        converged=payload["converged"],
    )
