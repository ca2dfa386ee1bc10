"""Time-tagged photodetection ingestion and analysis.

Parses tag CSV streams, bins counts into fixed windows, builds joint
count histograms, compares them against theoretical distributions, and
synthesizes tag streams from the random-phase model for end-to-end
checks.

Timestamps are stored internally as integer tenths of nanoseconds so a
3.3 ns detector resolution accumulates no drift over long streams; the
on-disk format is decimal nanoseconds with one optional decimal digit.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .util import DomainError, format_float

TWO_PI = 2.0 * math.pi

TAG_HEADER = "channel,timestamp_ns"
HISTOGRAM_HEADER = "k,kprime,count"


class TagFormatError(ValueError):
    """Malformed or inconsistent tag input; carries the offending line."""

    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


@dataclass(frozen=True)
class TagRecord:
    """A single detection: channel 0 ('+' port) or 1 ('-' port) and a
    timestamp in tenths of nanoseconds since stream start."""

    channel: int
    timestamp_tenths: int

    @property
    def timestamp_ns(self):
        return self.timestamp_tenths / 10.0


@dataclass(frozen=True)
class BinningConfig:
    window_ns: int = 80_000
    resolution_tenths: int = 33  # 3.3 ns
    truncation: int = 15

    def __post_init__(self):
        if self.window_ns <= 0 or self.resolution_tenths <= 0:
            raise DomainError("window and resolution must be positive")
        if self.window_ns * 10 < self.resolution_tenths:
            raise DomainError("window shorter than the timing resolution")
        if self.truncation < 1:
            raise DomainError("truncation must be >= 1")

    @property
    def window_tenths(self):
        return self.window_ns * 10


class TagStream:
    """A time-sorted detection record stream backed by flat arrays."""

    def __init__(self, channels, timestamps_tenths, duration_tenths=None):
        self.channels = np.asarray(channels, dtype=np.int64)
        self.timestamps_tenths = np.asarray(timestamps_tenths, dtype=np.int64)
        if self.channels.shape != self.timestamps_tenths.shape:
            raise DomainError("channel and timestamp arrays differ in length")
        self.duration_tenths = duration_tenths

    def __len__(self):
        return len(self.channels)

    def __iter__(self):
        for ch, ts in zip(self.channels, self.timestamps_tenths):
            yield TagRecord(int(ch), int(ts))


def _parse_timestamp_tenths(text, line_number):
    """Decimal nanoseconds with at most one fractional digit -> tenths."""
    whole, dot, frac = text.strip().partition(".")
    try:
        value = int(whole) * 10
    except ValueError:
        raise TagFormatError(line_number, f"bad timestamp {text!r}") from None
    if dot:
        if len(frac) != 1 or not frac.isdigit():
            raise TagFormatError(
                line_number, f"timestamp {text!r} needs exactly one decimal digit")
        value += int(frac)
    if value < 0:
        raise TagFormatError(line_number, "negative timestamp")
    return value


def parse_tags(source):
    """Parse a tag CSV stream (file object or iterable of lines).

    Requires the `channel,timestamp_ns` header, channels in {0, 1}, and
    non-decreasing timestamps; violations report the offending line.
    """
    records_ch = []
    records_ts = []
    previous = -1
    line_number = 0
    saw_header = False
    for raw in source:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line_number += 1
        line = raw.strip()
        if not line:
            continue
        if not saw_header:
            if line != TAG_HEADER:
                raise TagFormatError(line_number, f"expected header {TAG_HEADER!r}")
            saw_header = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise TagFormatError(line_number, f"expected 2 fields, got {len(parts)}")
        if parts[0].strip() not in ("0", "1"):
            raise TagFormatError(line_number, f"channel {parts[0]!r} not in {{0, 1}}")
        channel = int(parts[0])
        ts = _parse_timestamp_tenths(parts[1], line_number)
        if ts < previous:
            raise TagFormatError(line_number, "timestamps decrease")
        previous = ts
        records_ch.append(channel)
        records_ts.append(ts)
    return TagStream(np.array(records_ch, dtype=np.int64),
                     np.array(records_ts, dtype=np.int64))


def write_tags(stream, out):
    """Write a tag stream in the CSV format accepted by parse_tags."""
    out.write(TAG_HEADER + "\n")
    for ch, ts in zip(stream.channels, stream.timestamps_tenths):
        out.write(f"{ch},{ts // 10}.{ts % 10}\n")


def bin_counts(stream, config, duration_ns=None):
    """Group tags into consecutive windows of window_ns.

    Returns an (n_windows, 2) integer array of per-window (k_plus,
    k_minus) counts, clamped at the truncation. With an explicit
    duration the final partial window is discarded; otherwise the
    window containing the last tag closes the stream (the stream's own
    recorded duration, if any, takes precedence).
    """
    window = config.window_tenths
    if duration_ns is not None:
        n_windows = int(duration_ns * 10) // window
    elif stream.duration_tenths is not None:
        n_windows = stream.duration_tenths // window
    elif len(stream) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    else:
        n_windows = int(stream.timestamps_tenths.max()) // window + 1
    counts = np.zeros((n_windows, 2), dtype=np.int64)
    if n_windows == 0 or len(stream) == 0:
        return counts
    window_idx = stream.timestamps_tenths // window
    keep = window_idx < n_windows
    for channel in (0, 1):
        sel = keep & (stream.channels == channel)
        counts[:, channel] = np.bincount(window_idx[sel], minlength=n_windows)
    return np.minimum(counts, config.truncation)


@dataclass(frozen=True)
class EmpiricalHistogram:
    """Integer (K+1) x (K+1) table of observed (k, k') multiplicities."""

    truncation: int
    counts: np.ndarray = field(repr=False)

    @property
    def total(self):
        return int(self.counts.sum())


def histogram(outcomes, truncation):
    """Tally outcomes into an empirical joint histogram; counts above
    the truncation fold into the K-th bucket."""
    outcomes = np.asarray(outcomes, dtype=np.int64).reshape(-1, 2)
    if np.any(outcomes < 0):
        raise DomainError("negative count in outcomes")
    outcomes = np.minimum(outcomes, truncation)
    size = truncation + 1
    flat = np.bincount(outcomes[:, 0] * size + outcomes[:, 1], minlength=size * size)
    return EmpiricalHistogram(truncation, flat.reshape(size, size))


def histogram_to_csv(hist, out):
    out.write(HISTOGRAM_HEADER + "\n")
    for k in range(hist.truncation + 1):
        for kp in range(hist.truncation + 1):
            out.write(f"{k},{kp},{hist.counts[k, kp]}\n")


@dataclass(frozen=True)
class ComparisonResult:
    """Per-cell residuals against a theoretical distribution.

    residuals holds N_kk' - total * P_kk'; normalized divides by
    sqrt(max(N_kk', 1)). fraction_within_2 counts occupied cells whose
    normalized residual has magnitude <= 2; tv_distance is the total
    variation distance between the empirical frequencies and theory.
    """

    residuals: np.ndarray = field(repr=False)
    normalized: np.ndarray = field(repr=False)
    fraction_within_2: float
    tv_distance: float


def compare_to_theory(hist, theory):
    """Residual analysis of an empirical histogram against a model."""
    if hist.truncation != theory.truncation:
        raise DomainError("histogram and theory truncations differ")
    if hist.total <= 0:
        raise DomainError("empty histogram cannot be compared")
    counts = hist.counts.astype(float)
    expected = hist.total * theory.probs
    residuals = counts - expected
    normalized = residuals / np.sqrt(np.maximum(counts, 1.0))
    occupied = hist.counts > 0
    within = np.abs(normalized[occupied]) <= 2.0
    fraction = float(within.mean()) if occupied.any() else 1.0
    tv = 0.5 * float(np.abs(counts / hist.total - theory.probs).sum())
    return ComparisonResult(residuals, normalized, fraction, tv)


def synthesize_tags(rng, energy_per_window, vis_magnitude, config, windows,
                    phase_model="per-window-uniform"):
    """Generate a synthetic tag stream from the random-phase model.

    Per window: a fresh uniform global phase, Poisson counts at the two
    port intensities (unclamped; binning applies the truncation), each
    count placed at a uniform multiple of the timing resolution inside
    the window. The stream records its duration, so bin_counts
    round-trips the exact per-window counts.
    """
    if windows < 1:
        raise DomainError("windows must be >= 1")
    if energy_per_window < 0.0:
        raise DomainError("energy must be >= 0")
    if phase_model != "per-window-uniform":
        raise DomainError(f"unknown phase model {phase_model!r}")
    if not 0.0 <= vis_magnitude <= 1.0:
        raise DomainError("visibility magnitude must lie in [0, 1]")
    window = config.window_tenths
    slots = window // config.resolution_tenths

    phases = rng.uniform(0.0, TWO_PI, windows)
    i_plus = energy_per_window * (1.0 + vis_magnitude * np.cos(phases)) / 2.0
    counts = np.empty((windows, 2), dtype=np.int64)
    counts[:, 0] = rng.poisson(i_plus)
    counts[:, 1] = rng.poisson(energy_per_window - i_plus)

    parts = []
    for channel in (0, 1):
        n = int(counts[:, channel].sum())
        window_of_tag = np.repeat(np.arange(windows, dtype=np.int64), counts[:, channel])
        offsets = rng.integers(0, slots, size=n) * config.resolution_tenths
        ts = window_of_tag * window + offsets
        parts.append((np.full(n, channel, dtype=np.int64), ts))
    channels = np.concatenate([p[0] for p in parts])
    timestamps = np.concatenate([p[1] for p in parts])
    order = np.lexsort((channels, timestamps))
    return TagStream(channels[order], timestamps[order],
                     duration_tenths=windows * window)
