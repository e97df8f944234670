"""Deterministic synthetic EEG: known sources, known mixing, known artifacts.

Every random draw comes from :mod:`sobikit.rng` substreams, so a given
``(specs, seed)`` pair produces bit-identical data on any platform.  The
generator covers the signal families the rest of the toolkit is tested
against: narrow-band mu/beta rhythms with event-related amplitude
modulation, stationary AR(2) background noise, sparse eyeblink pulses, and
mains interference.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .bss import Recording
from .errors import InvalidSpecError, RankDeficientMixingError
from .linalg import sym_eig
from .rng import stream

__all__ = [
    "SOURCE_KINDS",
    "SourceSpec",
    "Trial",
    "TrialSchedule",
    "GroundTruth",
    "TrialSet",
    "modulation_envelope",
    "generate_sources",
    "mix_sources",
    "make_dataset",
]

SOURCE_KINDS = (
    "mu_rhythm",
    "beta_rhythm",
    "broadband_noise",
    "eyeblink_artifact",
    "powerline_artifact",
)

_RHYTHM_KINDS = ("mu_rhythm", "beta_rhythm")
_DEFAULT_FREQ = {"mu_rhythm": 10.0, "beta_rhythm": 20.0, "powerline_artifact": 50.0}


@dataclass(frozen=True)
class SourceSpec:
    """One synthetic source row.

    ``erd_depth`` only affects rhythm kinds: inside an imagery window that
    targets this row, the amplitude is multiplied by ``1 - erd_depth`` when
    ``response == "erd"`` and by ``1 + erd_depth`` when ``response == "ers"``.
    """

    kind: str
    frequency: float = None
    amplitude: float = 1.0
    erd_depth: float = 0.0
    response: str = "erd"
    ar_coefficients: tuple = (0.5, -0.2)

    def resolved_frequency(self):
        if self.frequency is not None:
            return float(self.frequency)
        return _DEFAULT_FREQ.get(self.kind)

    def validate(self, fs):
        if self.kind not in SOURCE_KINDS:
            raise InvalidSpecError(f"unknown source kind {self.kind!r}")
        if self.amplitude <= 0.0:
            raise InvalidSpecError("amplitude must be > 0")
        if not 0.0 <= self.erd_depth <= 1.0:
            raise InvalidSpecError("erd_depth must lie in [0, 1]")
        if self.response not in ("erd", "ers"):
            raise InvalidSpecError(f"response must be 'erd' or 'ers', got {self.response!r}")
        if self.kind in _RHYTHM_KINDS or self.kind == "powerline_artifact":
            freq = self.resolved_frequency()
            if freq is None or not 0.0 < freq < fs / 2.0:
                raise InvalidSpecError(
                    f"{self.kind} frequency {freq} must lie in (0, fs/2)"
                )
        if self.kind == "broadband_noise":
            a1, a2 = self.ar_coefficients
            roots = np.roots([1.0, -a1, -a2])
            if np.max(np.abs(roots)) >= 1.0:
                raise InvalidSpecError(
                    f"AR coefficients {self.ar_coefficients} are not stationary"
                )


@dataclass(frozen=True)
class Trial:
    """One imagery trial: baseline window immediately before the imagery window."""

    start_sample: int
    end_sample: int
    label: str
    baseline_start: int
    baseline_end: int

    def validate(self, n_samples):
        if self.label not in ("left", "right"):
            raise InvalidSpecError(f"trial label must be left/right, got {self.label!r}")
        ok = (
            0 <= self.baseline_start < self.baseline_end <= self.start_sample
            and self.start_sample < self.end_sample <= n_samples
        )
        if not ok:
            raise InvalidSpecError(
                f"trial windows out of order or out of range: {self}"
            )


@dataclass(frozen=True)
class TrialSchedule:
    """Imagery windows plus the mapping from label to the rhythm rows it modulates."""

    trials: tuple
    modulated_rows: dict


@dataclass(frozen=True)
class GroundTruth:
    sources: np.ndarray
    mixing: np.ndarray
    artifact_indices: tuple
    clean_mixture: np.ndarray


@dataclass(frozen=True)
class TrialSet:
    recording: Recording
    trials: tuple
    ground_truth: GroundTruth

    @property
    def labels_signed(self):
        """Labels as -1 (left) / +1 (right), one per trial."""
        return np.array([-1 if t.label == "left" else 1 for t in self.trials])


def modulation_envelope(n_samples, spec, row_index, schedule):
    """Per-sample amplitude multiplier a rhythm row sees under a schedule.

    Exactly 1 outside imagery windows, exactly ``1 - depth`` (or ``1 + depth``
    for ERS) inside imagery windows whose label targets this row.
    """
    env = np.ones(n_samples)
    if schedule is None or spec.kind not in _RHYTHM_KINDS or spec.erd_depth == 0.0:
        return env
    if spec.response == "erd":
        gain = 1.0 - spec.erd_depth
    else:
        gain = 1.0 + spec.erd_depth
    for trial in schedule.trials:
        rows = schedule.modulated_rows.get(trial.label, ())
        if row_index in rows:
            env[trial.start_sample : trial.end_sample] = gain
    return env


def _raised_cosine_pulse(width_samples):
    k = np.arange(width_samples)
    return 0.5 * (1.0 - np.cos(2.0 * math.pi * (k + 1) / (width_samples + 1)))


def generate_sources(specs, duration_s, fs, trials=None, seed=0):
    """Realize each :class:`SourceSpec` as one row of an m x T matrix.

    Row k draws from substream ``stream(seed, k)``, so adding or reordering
    other rows never perturbs a row's waveform.  Identical ``(specs, seed)``
    give bit-identical output.
    """
    if not specs:
        raise InvalidSpecError("need at least one source spec")
    n_samples = int(round(duration_s * fs))
    if n_samples < 1000:
        raise InvalidSpecError(
            f"duration*fs = {n_samples} samples; need at least 1000"
        )
    if trials is not None:
        for trial in trials.trials:
            trial.validate(n_samples)
    t = np.arange(n_samples) / fs
    rows = []
    for k, spec in enumerate(specs):
        spec.validate(fs)
        rng = stream(seed, k)
        if spec.kind in _RHYTHM_KINDS or spec.kind == "powerline_artifact":
            phase = rng.uniform_range(0.0, 2.0 * math.pi)
            row = spec.amplitude * np.sin(
                2.0 * math.pi * spec.resolved_frequency() * t + phase
            )
            if spec.kind in _RHYTHM_KINDS:
                row = row * modulation_envelope(n_samples, spec, k, trials)
        elif spec.kind == "broadband_noise":
            a1, a2 = spec.ar_coefficients
            burn = 200
            x1 = x2 = 0.0
            out = np.empty(n_samples)
            for i in range(-burn, n_samples):
                x = a1 * x1 + a2 * x2 + spec.amplitude * rng.normal()
                x2 = x1
                x1 = x
                if i >= 0:
                    out[i] = x
            row = out
        else:  # eyeblink_artifact
            width = max(2, int(round(0.3 * fs)))
            pulse = spec.amplitude * _raised_cosine_pulse(width)
            row = np.zeros(n_samples)
            pos = int(round(rng.uniform_range(1.0, 3.0) * fs))
            while pos + width <= n_samples:
                row[pos : pos + width] += pulse
                pos += width + int(round(rng.uniform_range(1.0, 3.0) * fs))
        rows.append(row)
    return np.vstack(rows)


def mix_sources(sources, a, fs=250.0, channel_names=()):
    """Apply a mixing matrix: ``data = a @ sources`` exactly.

    ``a`` must be well conditioned over its smaller dimension (condition
    number <= 1e6), so no channel (tall ``a``: no source direction) is
    degenerate.
    """
    sources = np.asarray(sources, dtype=float)
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or sources.ndim != 2 or a.shape[1] != sources.shape[0]:
        raise InvalidSpecError(
            f"mixing {a.shape} incompatible with sources {sources.shape}"
        )
    gram = a.T @ a if a.shape[0] >= a.shape[1] else a @ a.T
    values = sym_eig(gram.tolist()).values
    lam_max, lam_min = values[0], values[-1]
    if lam_min <= 0.0 or math.sqrt(lam_max / lam_min) > 1e6:
        raise RankDeficientMixingError(
            "mixing matrix is rank deficient or too ill-conditioned"
        )
    return Recording(a @ sources, fs, channel_names)


def _structured_mixing(channels, n_sources, rng):
    """Lateralized base topographies plus seeded jitter."""
    n_left = (channels + 1) // 2
    base = np.zeros((channels, n_sources))
    for c in range(channels):
        left = c < n_left
        within = (c if left else c - n_left) / max(1, n_left - 1)
        ipsi = 1.0 - 0.25 * within
        contra = 0.18
        base[c, 0] = ipsi if left else contra          # mu left
        base[c, 1] = contra if left else ipsi          # mu right
        base[c, 2] = 0.8 * (ipsi if left else contra)  # beta left
        base[c, 3] = 0.8 * (contra if left else ipsi)  # beta right
        base[c, 4] = 0.5                               # broadband noise
        base[c, 5] = 1.1 * (1.0 - 0.8 * within)        # eyeblink, frontal-heavy
        base[c, 6] = 0.6                               # powerline
    jitter = np.array(
        [[0.12 * rng.normal() for _ in range(n_sources)] for _ in range(channels)]
    )
    return base + jitter


def make_dataset(
    n_trials_per_class,
    channels=8,
    fs=250.0,
    seed=0,
    erd_depth=0.7,
    baseline_s=2.0,
    imagery_s=2.0,
):
    """Full motor-imagery test bed with ground truth.

    Seven sources — mu and beta rhythms for each hemisphere, broadband
    noise, an eyeblink train, and 50 Hz line interference — mixed into
    ``channels`` channels through a seeded, well-conditioned lateralized
    topography.  Trials alternate left/right; each has ``baseline_s`` of
    rest followed by ``imagery_s`` of imagery during which the rhythm rows
    contralateral to the imagined hand are attenuated by ``erd_depth``.
    """
    if n_trials_per_class < 1:
        raise InvalidSpecError("need at least one trial per class")
    if channels < 4:
        raise InvalidSpecError("need at least 4 channels")
    n_trials = 2 * n_trials_per_class
    trial_len = int(round((baseline_s + imagery_s) * fs))
    base_len = int(round(baseline_s * fs))
    n_samples = n_trials * trial_len

    trials = []
    for i in range(n_trials):
        offset = i * trial_len
        trials.append(
            Trial(
                start_sample=offset + base_len,
                end_sample=offset + trial_len,
                label="left" if i % 2 == 0 else "right",
                baseline_start=offset,
                baseline_end=offset + base_len,
            )
        )
    # Contralateral organization: imagining the left hand desynchronizes the
    # right-hemisphere rhythms (rows 1, 3) and vice versa.
    schedule = TrialSchedule(tuple(trials), {"left": (1, 3), "right": (0, 2)})

    specs = [
        SourceSpec("mu_rhythm", frequency=9.5, amplitude=1.0, erd_depth=erd_depth),
        SourceSpec("mu_rhythm", frequency=10.5, amplitude=1.0, erd_depth=erd_depth),
        SourceSpec("beta_rhythm", frequency=19.0, amplitude=0.7, erd_depth=erd_depth),
        SourceSpec("beta_rhythm", frequency=21.0, amplitude=0.7, erd_depth=erd_depth),
        SourceSpec("broadband_noise", amplitude=0.4),
        SourceSpec("eyeblink_artifact", amplitude=3.0),
        SourceSpec("powerline_artifact", amplitude=1.5),
    ]
    sources = generate_sources(
        specs, n_samples / fs, fs, trials=schedule, seed=seed
    )

    mix_rng = stream(seed, len(specs))
    mixing = None
    for _ in range(32):
        candidate = _structured_mixing(channels, len(specs), mix_rng)
        gram = (
            candidate.T @ candidate
            if channels >= len(specs)
            else candidate @ candidate.T
        )
        values = sym_eig(gram.tolist()).values
        if values[-1] > 0.0 and math.sqrt(values[0] / values[-1]) <= 100.0:
            mixing = candidate
            break
    if mixing is None:
        raise RankDeficientMixingError(
            "could not draw a well-conditioned mixing matrix"
        )

    names = _channel_names(channels)
    recording = mix_sources(sources, mixing, fs=fs, channel_names=names)
    artifact_indices = (5, 6)
    neural = [k for k in range(len(specs)) if k not in artifact_indices]
    clean = mixing[:, neural] @ sources[neural, :]
    return TrialSet(
        recording=recording,
        trials=tuple(trials),
        ground_truth=GroundTruth(
            sources=sources,
            mixing=mixing,
            artifact_indices=artifact_indices,
            clean_mixture=clean,
        ),
    )


def _channel_names(channels):
    standard = ("Fp1", "F3", "C3", "P3", "Fp2", "F4", "C4", "P4")
    if channels <= len(standard):
        n_left = (channels + 1) // 2
        left = standard[:4][:n_left]
        right = standard[4:][: channels - n_left]
        return left + right
    return tuple(f"ch{i}" for i in range(channels))
