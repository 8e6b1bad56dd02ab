"""Host sequences, histograms, messages and logarithmic multinomial arithmetic.

The number of distinct rearrangements of a host is the multinomial
coefficient r = n! / (h_1! ... h_q!).  Everything downstream (capacity,
rates, bounds) works with log2(r).  For small totals the factorials are
evaluated exactly; for large totals Robbins' two-sided sharpening of
Stirling's formula gives a guaranteed underestimate of log2(r), which is
the safe direction: a capacity overestimate would break decodability,
an underestimate only costs a fraction of a bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Exact factorial evaluation is used when the histogram total is at or
# below this threshold (per evaluation, i.e. per partition).
EXACT_FACTORIAL_LIMIT = 20

# Histogram totals must fit the coder's frequency-precision budget.
MAX_TOTAL = 1 << 40

# Safety margin subtracted before flooring Robbins log-counts, covering the
# accumulated double-precision rounding of the log-factorial sums (<= 1e-7
# absolute in the worst supported case, budgeted at 1e-9 relative).
FLOOR_GUARD = 1e-6

_LOG2E = math.log2(math.e)
_LOG2_2PI = math.log2(2.0 * math.pi)


class HostError(ValueError):
    """Invalid host sequence or histogram."""


@dataclass(frozen=True)
class Histogram:
    """Sorted support values and their positive counts."""

    values: np.ndarray  # strictly increasing int64, length q
    counts: np.ndarray  # positive int64, length q
    n: int

    @property
    def q(self) -> int:
        return len(self.values)

    def validate(self) -> None:
        v, h = self.values, self.counts
        if len(v) != len(h) or len(v) == 0:
            raise HostError("histogram support and counts must match and be nonempty")
        if np.any(np.diff(v) <= 0):
            raise HostError("histogram support must be strictly increasing")
        if np.any(h <= 0):
            raise HostError("histogram counts must be positive")
        if int(h.sum()) != self.n:
            raise HostError("histogram counts must sum to n")
        if self.n > MAX_TOTAL:
            raise HostError(f"histogram total {self.n} exceeds cap 2^40")

    def type_vector(self) -> np.ndarray:
        """Empirical probability vector h/n."""
        return self.counts / float(self.n)


@dataclass
class HostSequence:
    """Finite integer sequence plus nominal bit depth (used for peak ratios only)."""

    samples: np.ndarray
    value_bits: int | None = None

    def __post_init__(self) -> None:
        self.samples = _coerce_samples(self.samples)
        if self.value_bits is None:
            lo = int(self.samples.min())
            hi = int(self.samples.max())
            if lo >= 0:
                self.value_bits = max(1, int(hi).bit_length())

    @property
    def n(self) -> int:
        return len(self.samples)

    def histogram(self) -> Histogram:
        return compute_histogram(self.samples)


def _coerce_samples(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size == 0:
        raise HostError("empty host")
    if arr.dtype.kind == "f" or (
        arr.dtype.kind == "O" and any(isinstance(v, float) for v in arr[:16])
    ):
        raise HostError("hosts must be integer sequences")
    return arr.astype(np.int64)


def as_samples(x) -> np.ndarray:
    if isinstance(x, HostSequence):
        return x.samples
    return _coerce_samples(x)


def compute_histogram(x) -> Histogram:
    """Histogram of an integer sequence, support sorted ascending."""
    samples = as_samples(x)
    values, counts = np.unique(samples, return_counts=True)
    hist = Histogram(values.astype(np.int64), counts.astype(np.int64), int(len(samples)))
    hist.validate()
    return hist


@dataclass(frozen=True)
class LogCount:
    """log2 of a rearrangement count.

    ``exact`` marks values computed from exact integer factorials; when it is
    False the value comes from Robbins bounds and strictly underestimates
    log2(r).  ``count`` carries the exact integer r when it was computed.
    """

    value: float
    exact: bool
    count: int | None = None


@dataclass
class Message:
    """Payload bit string (most significant bit first)."""

    bits: np.ndarray
    capacity: int | None = None

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 1:
            raise ValueError("message bits must be a 1-d array")
        if np.any(self.bits > 1):
            raise ValueError("message bits must be 0/1")
        if self.capacity is not None and len(self.bits) > self.capacity:
            raise ValueError("message longer than capacity")

    def __len__(self) -> int:
        return len(self.bits)

    @classmethod
    def from_bytes(cls, data: bytes, nbits: int | None = None) -> "Message":
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        if nbits is not None:
            if nbits > len(bits):
                raise ValueError("requested more bits than the payload holds")
            bits = bits[:nbits]
        return cls(bits)

    @classmethod
    def from_int(cls, value: int, width: int) -> "Message":
        if value < 0 or value >> width:
            raise ValueError("value does not fit in width")
        if width == 0:
            return cls(np.zeros(0, dtype=np.uint8))
        data = (value << ((-width) % 8)).to_bytes((width + 7) // 8, "big")
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))[:width]
        return cls(bits)

    @classmethod
    def from_bitstring(cls, s: str) -> "Message":
        return cls(np.frombuffer(s.encode(), dtype=np.uint8) - ord("0"))

    def as_int(self) -> int:
        if len(self.bits) == 0:
            return 0
        excess = (-len(self.bits)) % 8
        return int.from_bytes(np.packbits(self.bits).tobytes(), "big") >> excess

    def padded(self, capacity: int) -> "Message":
        if len(self.bits) > capacity:
            raise ValueError("message longer than capacity")
        bits = np.zeros(capacity, dtype=np.uint8)
        bits[: len(self.bits)] = self.bits
        return Message(bits, capacity)

    def to_bytes(self) -> bytes:
        if len(self.bits) == 0:
            return b""
        return np.packbits(self.bits).tobytes()


def multinomial_exact(counts) -> int:
    """Exact rearrangement count n! / prod(h_k!) as a big integer."""
    counts = np.asarray(counts, dtype=np.int64)
    n = int(counts.sum())
    r = math.factorial(n)
    for h in counts:
        r //= math.factorial(int(h))
    return r


def robbins_log2_bounds(z: int) -> tuple[float, float]:
    """Two-sided Robbins bounds on log2(z!), valid for z >= 1."""
    if z < 1:
        raise ValueError("Robbins bounds need z >= 1")
    base = 0.5 * (_LOG2_2PI + math.log2(z)) + z * (math.log2(z) - _LOG2E)
    return base + _LOG2E / (12 * z + 1), base + _LOG2E / (12 * z)


def log2_factorial_exact(z: int) -> float:
    return math.log2(math.factorial(z)) if z > 1 else 0.0


def log_multinomial(hist: Histogram | np.ndarray) -> LogCount:
    """log2 of the rearrangement count, exact or Robbins-underestimated.

    Exact integer factorials are used for totals up to EXACT_FACTORIAL_LIMIT.
    Beyond that the Robbins lower bound is applied to n! and upper bounds to
    the denominator factorials (exact values for small ones), so the result
    is a strict underestimate of log2(r).
    """
    counts = hist.counts if isinstance(hist, Histogram) else np.asarray(hist, dtype=np.int64)
    if len(counts) == 0 or np.any(counts <= 0):
        raise HostError("invalid histogram counts")
    n = int(counts.sum())
    if n > MAX_TOTAL:
        raise HostError("histogram total exceeds cap 2^40")
    if len(counts) == 1 or n <= 1:
        return LogCount(0.0, exact=True, count=1)
    if n <= EXACT_FACTORIAL_LIMIT:
        r = multinomial_exact(counts)
        return LogCount(math.log2(r), exact=True, count=r)
    total = robbins_log2_bounds(n)[0]
    for h in counts:
        h = int(h)
        if h <= EXACT_FACTORIAL_LIMIT:
            total -= log2_factorial_exact(h)
        else:
            total -= robbins_log2_bounds(h)[1]
    return LogCount(total, exact=False)


def capacity_bits(hist: Histogram | np.ndarray) -> int:
    """floor(log2 r~) message bits decodable from one block, never above floor(log2 r)."""
    lc = log_multinomial(hist)
    if lc.exact:
        return lc.count.bit_length() - 1
    return max(0, math.floor(lc.value - FLOOR_GUARD))


def entropy_bits(hist: Histogram | np.ndarray) -> float:
    """Empirical entropy H(X) of the type, in bits."""
    counts = hist.counts if isinstance(hist, Histogram) else np.asarray(hist, dtype=np.int64)
    n = float(counts.sum())
    p = counts / n
    return float(-(p * np.log2(p)).sum())


# Host file formats shared with the CLI: raw little-endian signed 32-bit
# samples (.i32) or UTF-8 text with one decimal integer per line (.txt).

def load_host(path, fmt: str | None = None, value_bits: int | None = None) -> HostSequence:
    path = Path(path)
    fmt = fmt or ("i32" if path.suffix == ".i32" else "txt")
    if fmt == "i32":
        samples = np.fromfile(path, dtype="<i4").astype(np.int64)
    elif fmt == "txt":
        with open(path, "rb") as fh:
            samples = np.array([int(line) for line in fh.read().split()], dtype=np.int64)
    else:
        raise ValueError(f"unknown host format {fmt!r}")
    if len(samples) == 0:
        raise HostError("empty host")
    return HostSequence(samples, value_bits=value_bits)


def save_host(path, samples, fmt: str | None = None) -> None:
    path = Path(path)
    samples = as_samples(samples)
    fmt = fmt or ("i32" if path.suffix == ".i32" else "txt")
    if fmt == "i32":
        if samples.min() < -(1 << 31) or samples.max() >= (1 << 31):
            raise HostError("samples do not fit in signed 32-bit range")
        samples.astype("<i4").tofile(path)
    elif fmt == "txt":
        with open(path, "w") as fh:
            fh.write("\n".join(str(int(s)) for s in samples))
            fh.write("\n")
    else:
        raise ValueError(f"unknown host format {fmt!r}")
