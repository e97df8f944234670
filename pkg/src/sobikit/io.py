"""File formats: recording CSV with JSON sidecar, matrices, feature tables.

Recording CSV (exact format): a header line ``# channels=<n> samples=<T>``
followed by ``n`` lines of ``T`` comma-separated decimal floats.  Floats are
written with 17 significant digits, so a write→read round trip is
bit-exact.  Every recording carries a sidecar ``<base>.meta.json`` holding
``sample_rate``, ``channel_names``, and — for trial sets — the trial
windows, labels, and ground-truth file references.
"""

import json
import os
import re

import numpy as np

from .bss import Recording
from .errors import (
    InvalidSpecError,
    MissingSidecarError,
    RecordingParseError,
)
from .synth import GroundTruth, Trial, TrialSet

__all__ = [
    "sidecar_path",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_recording",
    "read_recording",
    "save_trialset",
    "load_trialset",
    "write_features",
    "read_features",
]

_HEADER_RE = re.compile(r"^# channels=(\d+) samples=(\d+)$")


def sidecar_path(path):
    """``data.csv`` -> ``data.meta.json``; extensionless paths just append."""
    base, ext = os.path.splitext(str(path))
    return (base if ext else str(path)) + ".meta.json"


def _format_row(row):
    return ",".join(f"{v:.17g}" for v in row)


def write_matrix_csv(matrix, path):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    n, t = matrix.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# channels={n} samples={t}\n")
        for row in matrix:
            fh.write(_format_row(row) + "\n")


def read_matrix_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise RecordingParseError(f"{path}: empty file", line=1)
    match = _HEADER_RE.match(lines[0])
    if not match:
        raise RecordingParseError(
            f"{path}: line 1: expected '# channels=<n> samples=<T>' header",
            line=1,
        )
    n, t = int(match.group(1)), int(match.group(2))
    if len(lines) - 1 != n:
        raise RecordingParseError(
            f"{path}: header declares {n} channels but file has "
            f"{len(lines) - 1} data rows",
            line=len(lines),
        )
    data = np.empty((n, t))
    for i, line in enumerate(lines[1:], start=2):
        tokens = line.split(",")
        if len(tokens) != t:
            raise RecordingParseError(
                f"{path}: line {i}: expected {t} values, found {len(tokens)}",
                line=i,
            )
        try:
            data[i - 2] = [float(tok) for tok in tokens]
        except ValueError as exc:
            raise RecordingParseError(f"{path}: line {i}: {exc}", line=i) from exc
    return data


def write_recording(rec, path, trials=None, ground_truth_refs=None, extra=None):
    """Write the CSV plus its sidecar.  Returns the sidecar path."""
    write_matrix_csv(rec.data, path)
    meta = {
        "format_version": 1,
        "sample_rate": rec.sample_rate,
        "channel_names": list(rec.channel_names),
    }
    if trials is not None:
        meta["trials"] = [
            {
                "start_sample": tr.start_sample,
                "end_sample": tr.end_sample,
                "label": tr.label,
                "baseline_start": tr.baseline_start,
                "baseline_end": tr.baseline_end,
            }
            for tr in trials
        ]
    if ground_truth_refs is not None:
        meta["ground_truth"] = ground_truth_refs
    if extra:
        meta.update(extra)
    side = sidecar_path(path)
    with open(side, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return side


def read_recording(path):
    """Read a recording and its sidecar.  Returns ``(Recording, meta dict)``."""
    data = read_matrix_csv(path)
    side = sidecar_path(path)
    if not os.path.exists(side):
        raise MissingSidecarError(f"no sidecar {side} for {path}")
    with open(side, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    if "sample_rate" not in meta:
        raise MissingSidecarError(f"{side}: sidecar lacks sample_rate")
    rec = Recording(
        data, float(meta["sample_rate"]), tuple(meta.get("channel_names", ()))
    )
    return rec, meta


def save_trialset(ts, path):
    """Write a TrialSet: recording CSV + sidecar + ground-truth CSVs alongside.

    Ground-truth files are referenced from the sidecar by file name relative
    to the recording's directory.
    """
    base, _ = os.path.splitext(str(path))
    refs = None
    if ts.ground_truth is not None:
        gt = ts.ground_truth
        write_matrix_csv(gt.sources, base + ".sources.csv")
        write_matrix_csv(gt.mixing, base + ".mixing.csv")
        write_matrix_csv(gt.clean_mixture, base + ".clean.csv")
        stem = os.path.basename(base)
        refs = {
            "sources": stem + ".sources.csv",
            "mixing": stem + ".mixing.csv",
            "clean_mixture": stem + ".clean.csv",
            "artifact_indices": list(gt.artifact_indices),
        }
    write_recording(ts.recording, path, trials=ts.trials, ground_truth_refs=refs)


def load_trialset(path):
    """Read a TrialSet written by :func:`save_trialset`."""
    rec, meta = read_recording(path)
    raw_trials = meta.get("trials")
    if not raw_trials:
        raise InvalidSpecError(f"{sidecar_path(path)}: sidecar has no trials")
    trials = tuple(
        Trial(
            start_sample=int(tr["start_sample"]),
            end_sample=int(tr["end_sample"]),
            label=str(tr["label"]),
            baseline_start=int(tr["baseline_start"]),
            baseline_end=int(tr["baseline_end"]),
        )
        for tr in raw_trials
    )
    for tr in trials:
        tr.validate(rec.n_samples)
    ground_truth = None
    refs = meta.get("ground_truth")
    if refs:
        folder = os.path.dirname(os.path.abspath(str(path)))
        ground_truth = GroundTruth(
            sources=read_matrix_csv(os.path.join(folder, refs["sources"])),
            mixing=read_matrix_csv(os.path.join(folder, refs["mixing"])),
            artifact_indices=tuple(refs.get("artifact_indices", ())),
            clean_mixture=read_matrix_csv(os.path.join(folder, refs["clean_mixture"])),
        )
    return TrialSet(recording=rec, trials=trials, ground_truth=ground_truth)


def write_features(vectors, labels, path, provenance=None):
    """Labeled feature table: ``# vectors=<n> features=<d>`` then label,f0,...."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    n, d = vectors.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# vectors={n} features={d}\n")
        for i in range(n):
            label = int(labels[i]) if labels is not None else 0
            fh.write(f"{label}," + _format_row(vectors[i]) + "\n")


def read_features(path):
    """Read a labeled feature table.  Returns ``(vectors, labels)``."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    header = re.match(r"^# vectors=(\d+) features=(\d+)$", lines[0] if lines else "")
    if not header:
        raise RecordingParseError(
            f"{path}: line 1: expected '# vectors=<n> features=<d>' header",
            line=1,
        )
    n, d = int(header.group(1)), int(header.group(2))
    if len(lines) - 1 != n:
        raise RecordingParseError(
            f"{path}: header declares {n} vectors but file has {len(lines) - 1} rows",
            line=len(lines),
        )
    vectors = np.empty((n, d))
    labels = np.empty(n, dtype=int)
    for i, line in enumerate(lines[1:], start=2):
        tokens = line.split(",")
        if len(tokens) != d + 1:
            raise RecordingParseError(
                f"{path}: line {i}: expected {d + 1} values, found {len(tokens)}",
                line=i,
            )
        try:
            labels[i - 2] = int(tokens[0])
            vectors[i - 2] = [float(tok) for tok in tokens[1:]]
        except ValueError as exc:
            raise RecordingParseError(f"{path}: line {i}: {exc}", line=i) from exc
    return vectors, labels
