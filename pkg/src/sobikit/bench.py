"""Timing harness comparing the two separation backends on seeded data.

Each dataset is a fresh seeded mixture of autoregressive sources with
distinct spectral peaks — the regime second-order separation is meant for.
Both backends run on the same recording, sequentially, on a monotonic
clock; the first run per method is a discarded warm-up and the reported
time is the median of the remaining repetitions.  Absolute seconds are a
property of the machine, not the algorithms; the stable quantity is the
ratio between the two backends on the same data.
"""

import json
import math
import platform
import statistics
from dataclasses import dataclass

from .bss import sobi
from .errors import InvalidSpecError
from .rng import stream
from .synth import SourceSpec, generate_sources, mix_sources

__all__ = [
    "REFERENCE_RATIO_RANGE",
    "BenchmarkRow",
    "BenchmarkReport",
    "benchmark_recording",
    "run_benchmark",
    "format_report",
    "save_report_json",
]

# Ratio range reported in earlier published timing comparisons of the same
# two algorithms; shown in reports for context only.
REFERENCE_RATIO_RANGE = (5.62, 6.35)


@dataclass(frozen=True)
class BenchmarkRow:
    dataset_id: int
    channels: int
    samples: int
    time_schur_s: float
    time_jacobi_s: float
    ratio: float
    score_schur: float
    score_jacobi: float


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple
    environment: str
    repetitions: int
    aggregation: str
    lags: tuple


def benchmark_recording(channels, samples, seed, fs=250.0):
    """Seeded mixture of ``channels`` AR(2) sources with spread-out spectral peaks."""
    specs = []
    for k in range(channels):
        theta = math.pi * (0.08 + 0.84 * k / max(1, channels - 1))
        rho = 0.92
        specs.append(
            SourceSpec(
                "broadband_noise",
                amplitude=1.0,
                ar_coefficients=(2.0 * rho * math.cos(theta), -rho * rho),
            )
        )
    sources = generate_sources(specs, samples / fs, fs, seed=seed)
    mix_rng = stream(seed, channels + 1)
    mixing = [
        [mix_rng.normal() for _ in range(channels)] for _ in range(channels)
    ]
    return mix_sources(sources, mixing, fs=fs)


def run_benchmark(
    n_datasets=5,
    channels=16,
    samples=30000,
    lags=tuple(range(1, 11)),
    repetitions=5,
    seed=42,
):
    """Time both backends on ``n_datasets`` seeded recordings."""
    if repetitions < 3:
        raise InvalidSpecError("need at least 3 repetitions")
    if n_datasets < 1:
        raise InvalidSpecError("need at least one dataset")
    lags = tuple(int(l) for l in lags)
    rows = []
    for d in range(n_datasets):
        rec = benchmark_recording(channels, samples, seed + d)
        # Interleave the two backends rep by rep so a transient load spike
        # lands on both sides of the ratio instead of skewing one median.
        times = {"schur": [], "jacobi": []}
        scores = {}
        for method in ("schur", "jacobi"):
            sobi(rec, lags=lags, method=method)  # warm-up, discarded
        for _ in range(repetitions):
            for method in ("schur", "jacobi"):
                res = sobi(rec, lags=lags, method=method)
                times[method].append(res.elapsed_seconds)
                scores[method] = res.diagnostics.score
        medians = {m: statistics.median(ts) for m, ts in times.items()}
        rows.append(
            BenchmarkRow(
                dataset_id=d,
                channels=channels,
                samples=samples,
                time_schur_s=medians["schur"],
                time_jacobi_s=medians["jacobi"],
                ratio=medians["jacobi"] / medians["schur"],
                score_schur=scores["schur"],
                score_jacobi=scores["jacobi"],
            )
        )
    environment = (
        f"{platform.python_implementation()} {platform.python_version()} "
        f"on {platform.machine()}, {platform.system()} {platform.release()}"
    )
    return BenchmarkReport(
        rows=tuple(rows),
        environment=environment,
        repetitions=repetitions,
        aggregation=(
            f"median of {repetitions} repetitions per method "
            "after one discarded warm-up run"
        ),
        lags=lags,
    )


def format_report(report):
    """Aligned text table plus context lines."""
    header = (
        f"{'dataset':>7}  {'channels':>8}  {'samples':>8}  "
        f"{'jacobi [s]':>12}  {'schur [s]':>12}  {'ratio':>7}"
    )
    lines = [header, "-" * len(header)]
    for row in report.rows:
        lines.append(
            f"{row.dataset_id:>7}  {row.channels:>8}  {row.samples:>8}  "
            f"{row.time_jacobi_s:>12.6f}  {row.time_schur_s:>12.6f}  "
            f"{row.ratio:>7.2f}"
        )
    lo, hi = REFERENCE_RATIO_RANGE
    lines += [
        "",
        f"lags: {','.join(str(l) for l in report.lags)}; {report.aggregation}",
        f"environment: {report.environment}",
        (
            f"context: earlier published timings of this algorithm pair show "
            f"ratios of about {lo:.2f}-{hi:.2f}; absolute seconds are "
            "hardware-bound and not comparable across machines."
        ),
    ]
    return "\n".join(lines)


def save_report_json(report, path):
    payload = {
        "format_version": 1,
        "environment": report.environment,
        "repetitions": report.repetitions,
        "aggregation": report.aggregation,
        "lags": list(report.lags),
        "reference_ratio_range": list(REFERENCE_RATIO_RANGE),
        "rows": [
            {
                "dataset_id": row.dataset_id,
                "channels": row.channels,
                "samples": row.samples,
                "time_schur_s": row.time_schur_s,
                "time_jacobi_s": row.time_jacobi_s,
                "ratio": row.ratio,
                "score_schur": row.score_schur,
                "score_jacobi": row.score_jacobi,
            }
            for row in report.rows
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
