"""Spectral features: periodogram, band power, energy, ERD/ERS percentages.

Band selection happens in the frequency domain on a plain rectangular-window
periodogram.  That keeps the estimate deterministic and exactly Parseval
consistent (the one-sided power integrates to the mean square of the
signal), which the band-power accounting relies on.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptySignalError,
    EpochTooShortError,
    SignalTooShortError,
    ZeroReferenceError,
)

__all__ = [
    "Band",
    "MU_BAND",
    "BETA_BAND",
    "DEFAULT_BANDS",
    "periodogram",
    "band_power",
    "energy",
    "erd_percentage",
    "extract_features",
]


@dataclass(frozen=True)
class Band:
    """Frequency band in Hz, inclusive on both edges."""

    low: float
    high: float
    name: str = ""

    def validate(self, fs):
        if not 0.0 <= self.low < self.high < fs / 2.0:
            raise ValueError(
                f"band {self.name or (self.low, self.high)} invalid for fs={fs}: "
                "need 0 <= low < high < fs/2"
            )


MU_BAND = Band(8.0, 12.0, "mu")
BETA_BAND = Band(13.0, 30.0, "beta")
DEFAULT_BANDS = (MU_BAND, BETA_BAND)


def periodogram(signal, fs):
    """One-sided power spectral density of a real signal.

    Returns ``(frequencies, power)`` where ``power[k]`` is |DFT|^2 scaled by
    1/(fs*N), with interior bins doubled so that ``sum(power) * fs/N`` equals
    ``mean(signal**2)``.
    """
    x = np.asarray(signal, dtype=float).ravel()
    n = x.size
    if n < 8:
        raise SignalTooShortError(f"periodogram needs >= 8 samples, got {n}")
    spectrum = np.fft.rfft(x)
    power = (spectrum.real**2 + spectrum.imag**2) / (fs * n)
    if n % 2 == 0:
        power[1:-1] *= 2.0
    else:
        power[1:] *= 2.0
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    return freqs, power


def band_power(signal, band, fs):
    """Integrated periodogram power over ``band.low <= f <= band.high``."""
    band.validate(fs)
    freqs, power = periodogram(signal, fs)
    mask = (freqs >= band.low) & (freqs <= band.high)
    df = fs / np.asarray(signal).size
    return float(np.sum(power[mask]) * df)


def energy(signal):
    """Sum of squared samples."""
    x = np.asarray(signal, dtype=float).ravel()
    if x.size == 0:
        raise EmptySignalError("energy of an empty signal is undefined")
    return float(np.dot(x, x))


def erd_percentage(active_power, reference_power):
    """Relative band-power change in percent: negative = ERD, positive = ERS."""
    if reference_power <= 0.0:
        raise ZeroReferenceError("reference power must be > 0")
    return (100.0 * (active_power - reference_power)) / reference_power


def extract_features(epoch, bands=DEFAULT_BANDS):
    """Per-channel band powers plus per-channel energy for one epoch.

    ``epoch`` is a :class:`sobikit.bss.Recording` (or anything with ``data``
    and ``sample_rate``).  The output vector is laid out block-wise:
    ``[band0 ch0..chN-1, band1 ch0..chN-1, ..., energy ch0..chN-1]``.
    """
    data = np.asarray(epoch.data, dtype=float)
    fs = epoch.sample_rate
    n_channels, n_samples = data.shape
    if n_samples < fs:
        raise EpochTooShortError(
            f"epoch has {n_samples} samples; need at least one second ({fs:g})"
        )
    blocks = []
    for band in bands:
        blocks.extend(band_power(data[ch], band, fs) for ch in range(n_channels))
    blocks.extend(energy(data[ch]) for ch in range(n_channels))
    return np.array(blocks)
