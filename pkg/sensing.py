"""
Proprioceptive contact detection from finger bend-sensor streams

Pipeline per channel: subtract the first sample, median filter (kernel 5,
mirrored edges), then flag the first consecutive-sample difference above
the threshold.
"""
import csv
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import median_filter as _ndimage_median

from utils.logger import get_logger
from utils.validators import (
    EmptyInputError,
    ParameterError,
    TraceParseError,
    validate_integer,
    validate_odd_kernel,
    validate_positive,
)

logger = get_logger(__name__)

DEFAULT_THRESHOLD = 5.0
DEFAULT_KERNEL = 5
N_FINGERS = 4
TRACE_HEADER = ["t_s", "f0", "f1", "f2", "f3"]
# Rise of the contact step over three consecutive samples
RISE_PROFILE = (0.25, 0.75, 1.0)


@dataclass(frozen=True)
class SensorTrace:
    dt: float
    channels: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.channels, dtype=float)
        if data.ndim != 2:
            raise ParameterError(f"Sensor channels must have shape (channels, samples), got {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise EmptyInputError("A sensor trace needs at least one sample per channel")
        if self.dt <= 0:
            raise ParameterError("Trace dt must be positive")
        object.__setattr__(self, "channels", data)

    @property
    def n_samples(self) -> int:
        return int(self.channels.shape[1])

    @property
    def raw(self) -> np.ndarray:
        return self.channels

    @property
    def normalized(self) -> np.ndarray:
        return np.vstack([normalize_trace(ch) for ch in self.channels])

    def filtered(self, kernel: int = DEFAULT_KERNEL) -> np.ndarray:
        return np.vstack([median_filter(ch, kernel) for ch in self.normalized])

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt


@dataclass(frozen=True)
class DetectionResult:
    per_finger: Tuple[Optional[int], ...]
    transit_point: Optional[int]
    threshold: float
    kernel: int = DEFAULT_KERNEL

    @property
    def detected_count(self) -> int:
        return sum(1 for i in self.per_finger if i is not None)

    def to_dict(self) -> dict:
        return {
            "per_finger": list(self.per_finger),
            "transit_point": self.transit_point,
            "threshold": self.threshold,
            "kernel": self.kernel,
        }


def normalize_trace(raw) -> np.ndarray:
    """out[i] = raw[i] - raw[0]"""
    x = np.asarray(raw, dtype=float)
    if x.size == 0:
        raise EmptyInputError("Cannot normalize an empty trace")
    return x - x[0]


def median_filter(x, k: int = DEFAULT_KERNEL) -> np.ndarray:
    """
    Sliding median with mirrored edges (d c b | a b c d | c b a)

    Args:
        x: Series to filter
        k: Odd kernel size

    Returns:
        Filtered series of the same length

    Raises:
        ParameterError: If k is even or below 1
    """
    k = validate_odd_kernel(k)
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptyInputError("Cannot filter an empty trace")
    if k == 1 or x.size == 1:
        return x.copy()
    return _ndimage_median(x, size=k, mode='mirror')


def detect_contact_per_finger(filtered, threshold: float = DEFAULT_THRESHOLD) -> Optional[int]:
    """Later index of the first consecutive pair whose |difference| strictly exceeds threshold."""
    threshold = validate_positive(threshold, "Threshold", error_cls=ParameterError)
    x = np.asarray(filtered, dtype=float)
    if x.size < 2:
        return None
    hits = np.flatnonzero(np.abs(np.diff(x)) > threshold)
    if hits.size == 0:
        return None
    return int(hits[0]) + 1


def detect_channel(raw, threshold: float = DEFAULT_THRESHOLD, kernel: int = DEFAULT_KERNEL) -> Optional[int]:
    return detect_contact_per_finger(median_filter(normalize_trace(raw), kernel), threshold)


def detect_transit_point(traces: SensorTrace, threshold: float = DEFAULT_THRESHOLD,
                         kernel: int = DEFAULT_KERNEL) -> DetectionResult:
    if traces.channels.shape[0] != N_FINGERS:
        raise ParameterError(f"Expected {N_FINGERS} channels, got {traces.channels.shape[0]}")
    per_finger = tuple(detect_channel(ch, threshold, kernel) for ch in traces.channels)
    detected = [i for i in per_finger if i is not None]
    transit = min(detected) if detected else None
    return DetectionResult(per_finger=per_finger, transit_point=transit, threshold=float(threshold),
                           kernel=int(kernel))


def step_profile(length: int, step_index: int) -> np.ndarray:
    """0 before step_index, then the three-sample rise, then 1."""
    profile = np.zeros(length)
    for offset, level in enumerate(RISE_PROFILE):
        if step_index + offset < length:
            profile[step_index + offset:] = level
    return profile


def synthesize_trace(pre_level: float, post_level: float, step_index: int, noise_sigma: float,
                     length: int, dt: float, seed: Optional[int], channels: int = N_FINGERS) -> SensorTrace:
    """
    Step-like bend signal with Gaussian noise, identical mean on every channel

    Returns:
        SensorTrace, deterministic for a given seed
    """
    length = validate_integer(length, "Length", min_value=1)
    step_index = validate_integer(step_index, "Step index", min_value=0, max_value=length - 1)
    if noise_sigma < 0:
        raise ParameterError("noise_sigma must be >= 0")
    mean = pre_level + (post_level - pre_level) * step_profile(length, step_index)
    data = np.tile(mean, (channels, 1))
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        data = data + rng.normal(0.0, noise_sigma, size=data.shape)
    return SensorTrace(dt=float(dt), channels=data)


def shift_trace(trace: SensorTrace, delay: int) -> SensorTrace:
    """Delay every channel by prepending copies of its first sample."""
    pad = np.repeat(trace.channels[:, :1], delay, axis=1)
    return SensorTrace(dt=trace.dt, channels=np.hstack([pad, trace.channels]))


def write_trace_csv(trace: SensorTrace, path: str) -> None:
    with open(path, 'w', newline='', encoding='utf-8') as f:
        f.write(f"# dt_s={trace.dt!r}\n")
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(TRACE_HEADER)
        for i, t in enumerate(trace.times()):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in trace.channels[:, i]])


def _parse_rows(lines: Iterable[str]) -> Tuple[Optional[float], List[Tuple[int, List[float]]]]:
    dt = None
    rows = []
    header_seen = False
    for line_number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            body = text[1:].strip()
            if body.startswith("dt_s="):
                try:
                    dt = float(body.split("=", 1)[1])
                except ValueError:
                    raise TraceParseError(f"bad dt value '{body}'", line_number)
            continue
        cells = next(csv.reader([text]))
        if not header_seen:
            if [c.strip() for c in cells] != TRACE_HEADER:
                raise TraceParseError(f"expected header '{','.join(TRACE_HEADER)}'", line_number)
            header_seen = True
            continue
        if len(cells) != len(TRACE_HEADER):
            raise TraceParseError(f"expected {len(TRACE_HEADER)} columns, got {len(cells)}", line_number)
        try:
            rows.append((line_number, [float(c) for c in cells]))
        except ValueError:
            raise TraceParseError(f"non-numeric value in {cells}", line_number)
    if not header_seen:
        raise TraceParseError("missing header", 1)
    return dt, rows


def ingest_csv(path: str) -> SensorTrace:
    """
    Read a `t_s,f0,f1,f2,f3` trace

    dt comes from an optional `# dt_s=<value>` line, otherwise from the first
    two timestamps. Timestamps must be uniformly spaced.

    Raises:
        TraceParseError: With the offending 1-based line number
    """
    with open(path, 'r', encoding='utf-8') as f:
        dt, rows = _parse_rows(f)
    if not rows:
        raise EmptyInputError(f"Trace {path} has no samples")

    times = np.array([r[1][0] for r in rows])
    if dt is None:
        if len(rows) < 2:
            raise TraceParseError("cannot infer dt from a single sample", rows[0][0])
        dt = float(times[1] - times[0])
    if dt <= 0:
        raise TraceParseError(f"dt must be positive, got {dt}", rows[min(1, len(rows) - 1)][0])
    for k, (line_number, _) in enumerate(rows):
        expected = times[0] + k * dt
        if abs(times[k] - expected) > 1e-6 * max(1.0, abs(expected)):
            raise TraceParseError(f"timestamp {times[k]} breaks uniform spacing dt={dt}", line_number)

    channels = np.array([r[1][1:] for r in rows]).T
    logger.info(f"Ingested trace {path}: {channels.shape[1]} samples, dt={dt}")
    return SensorTrace(dt=dt, channels=channels)


def traces_from_samples(samples: Sequence[Sequence[float]], dt: float) -> SensorTrace:
    """Build a trace from per-tick rows of four readings."""
    return SensorTrace(dt=dt, channels=np.asarray(samples, dtype=float).T)
