"""Permutation encoder/decoder built on reverse-adaptation arithmetic coding.

Embedding maps a c-bit message (c = floor(log2 r~)) to a rearrangement of
the host by driving the arithmetic *decoding* loop with the message bit
stream; extraction runs the interval-narrowing *encoding* loop over the
stego sequence and recovers the unique c-bit dyadic point inside the final
interval.  The count model starts at the host histogram and is decremented
after every symbol, so outputs are exact rearrangements and both sides
share the model for free.

Registers are W = 64 bits wide, renormalized one bit at a time with a
pending-bit counter for straddle (carry) resolution.  Interval division
uses exact integer cumulative counts, which requires total <= 2^(W-2);
zero-count symbols receive no subinterval.  The compiled kernel in
``permstego._kernel`` implements the identical integer algorithm; the
classes below are the readable reference used for small inputs and for
cross-checking the kernel.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .host import Histogram, Message, capacity_bits, compute_histogram, as_samples

try:
    from . import _kernel

    HAVE_KERNEL = True
except ImportError:  # pragma: no cover - build-less fallback
    _kernel = None
    HAVE_KERNEL = False

W = 64
FULL = 1 << W
HALF = FULL >> 1
QUARTER = FULL >> 2
THREEQ = HALF + QUARTER
MASK = FULL - 1

# Linear cumulative-count scans below this support size, Fenwick above.
LINEAR_SCAN_LIMIT = 64


class CapacityError(ValueError):
    """Message longer than the available embedding capacity."""


class StegoKeyError(ValueError):
    """Malformed stego key."""


@dataclass
class StegoKey:
    """t support permutations; permutation (i mod t)+1 is used at stage i."""

    perms: list

    def __post_init__(self) -> None:
        if len(self.perms) == 0:
            raise StegoKeyError("key needs at least one permutation")
        self.perms = [np.asarray(p, dtype=np.int64) for p in self.perms]
        q = len(self.perms[0])
        for p in self.perms:
            if len(p) != q or not np.array_equal(np.sort(p), np.arange(q)):
                raise StegoKeyError("key entries must be permutations of the support indices")

    @property
    def t(self) -> int:
        return len(self.perms)

    @property
    def q(self) -> int:
        return len(self.perms[0])


def derive_key(passphrase: str, q: int, t: int = 1) -> StegoKey:
    """Deterministic key from a passphrase.

    The first 8 bytes of SHA-256(passphrase) seed a PCG64 generator whose
    first t permutation draws of {0..q-1} become the key.
    """
    seed = int.from_bytes(hashlib.sha256(passphrase.encode()).digest()[:8], "big")
    rng = np.random.Generator(np.random.PCG64(seed))
    return StegoKey([rng.permutation(q) for _ in range(t)])


def apply_key(hist: Histogram, key: StegoKey | None, stage: int):
    """Count/support ordering the coder uses at 1-based stage ``stage``."""
    if key is None:
        return hist.counts, hist.values
    if key.q != hist.q:
        raise StegoKeyError(f"key is for q={key.q}, histogram has q={hist.q}")
    perm = key.perms[stage % key.t]
    return hist.counts[perm], hist.values[perm]


def _layouts(q: int, key: StegoKey | None) -> np.ndarray:
    """Stage layouts as an int64 (t, q) array; row k serves stages with (i mod t) == k."""
    if key is None:
        return np.arange(q, dtype=np.int64)[None, :]
    if key.q != q:
        raise StegoKeyError(f"key is for q={key.q}, histogram has q={q}")
    return np.stack(key.perms).astype(np.int64)


class CoderState:
    """Finite-precision interval registers plus the mutable count table.

    Encoding (used for extraction) emits bits; decoding (used for embedding)
    consumes them.  Both run the identical division/adaptation steps so the
    interval sequences coincide.
    """

    def __init__(self, counts: np.ndarray):
        self.low = 0
        self.high = MASK
        self.pending = 0
        self.counts = [int(c) for c in counts]
        self.total = sum(self.counts)
        if self.total > (1 << (W - 2)):
            raise ValueError("total count exceeds the frequency-precision budget 2^(W-2)")

    def _narrow(self, cum: int, cnt: int) -> None:
        rng = self.high - self.low + 1
        total = self.total
        self.high = self.low + (rng * (cum + cnt)) // total - 1
        self.low = self.low + (rng * cum) // total

    def _span(self, layout: np.ndarray, sym: int) -> tuple[int, int]:
        cum = 0
        for pos in layout:
            pos = int(pos)
            if pos == sym:
                return cum, self.counts[pos]
            cum += self.counts[pos]
        raise ValueError("symbol not in layout")

    def _find(self, layout: np.ndarray, value: int) -> tuple[int, int]:
        cum = 0
        for pos in layout:
            pos = int(pos)
            c = self.counts[pos]
            if cum + c > value:
                return pos, cum
            cum += c
        raise AssertionError("scaled value outside the count range")

    def _consume(self, sym: int) -> None:
        self.counts[sym] -= 1
        self.total -= 1


def encode_symbols(counts: np.ndarray, syms: np.ndarray, layouts: np.ndarray) -> np.ndarray:
    """Arithmetic-encode a symbol sequence; return the exact bit expansion
    of the final interval's lower bound (reference implementation)."""
    st = CoderState(counts)
    t = len(layouts)
    out = []
    emit = out.append

    def shift_out(bit: int) -> None:
        emit(bit)
        other = 1 - bit
        for _ in range(st.pending):
            emit(other)
        st.pending = 0

    for i, sym in enumerate(syms):
        layout = layouts[(i + 1) % t]
        cum, cnt = st._span(layout, int(sym))
        st._narrow(cum, cnt)
        while True:
            if st.high < HALF:
                shift_out(0)
            elif st.low >= HALF:
                shift_out(1)
                st.low -= HALF
                st.high -= HALF
            elif st.low >= QUARTER and st.high < THREEQ:
                st.pending += 1
                st.low -= QUARTER
                st.high -= QUARTER
            else:
                break
            st.low <<= 1
            st.high = (st.high << 1) | 1
        st._consume(int(sym))
    # Flush the full register so the collected bits are the exact binary
    # expansion of the final lower bound.
    b0 = st.low >> (W - 1)
    shift_out(b0)
    for k in range(W - 2, -1, -1):
        emit((st.low >> k) & 1)
    return np.array(out, dtype=np.uint8)


def decode_symbols(counts: np.ndarray, n: int, bits: np.ndarray, layouts: np.ndarray) -> np.ndarray:
    """Arithmetic-decode ``n`` symbols from a bit stream (zero padded past
    its end); reference implementation of the embedding direction."""
    st = CoderState(counts)
    t = len(layouts)
    nbits = len(bits)
    pos = 0

    def next_bit() -> int:
        nonlocal pos
        b = int(bits[pos]) if pos < nbits else 0
        pos += 1
        return b

    code = 0
    for _ in range(W):
        code = (code << 1) | next_bit()
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        layout = layouts[(i + 1) % t]
        rng = st.high - st.low + 1
        value = ((code - st.low + 1) * st.total - 1) // rng
        sym, cum = st._find(layout, value)
        st._narrow(cum, st.counts[sym])
        while True:
            if st.high < HALF:
                pass
            elif st.low >= HALF:
                st.low -= HALF
                st.high -= HALF
                code -= HALF
            elif st.low >= QUARTER and st.high < THREEQ:
                st.low -= QUARTER
                st.high -= QUARTER
                code -= QUARTER
            else:
                break
            st.low <<= 1
            st.high = (st.high << 1) | 1
            code = (code << 1) | next_bit()
        st._consume(sym)
        out[i] = sym
    return out


def _bits_to_int(bits: np.ndarray) -> int:
    if len(bits) == 0:
        return 0
    excess = (-len(bits)) % 8
    return int.from_bytes(np.packbits(bits).tobytes(), "big") >> excess


def message_from_low_bits(bits: np.ndarray, c: int) -> int:
    """Unique c-bit dyadic point at or above the exact lower bound 0.bits."""
    if c == 0:
        return 0
    nb = len(bits)
    value = _bits_to_int(bits)
    if nb <= c:
        return value << (c - nb)
    shift = nb - c
    m = (value + (1 << shift) - 1) >> shift
    return min(m, (1 << c) - 1)


def unrank_to_symbols(
    hist: Histogram,
    bits: np.ndarray,
    key: StegoKey | None = None,
    use_kernel: bool | None = None,
) -> np.ndarray:
    """Map a (padded) message bit stream to the symbol-index rearrangement."""
    layouts = _layouts(hist.q, key)
    counts = hist.counts.copy()
    if use_kernel is None:
        use_kernel = HAVE_KERNEL
    if use_kernel:
        out = np.empty(hist.n, dtype=np.int64)
        _kernel.unrank(counts, layouts, np.ascontiguousarray(bits, dtype=np.uint8), out)
        return out
    return decode_symbols(counts, hist.n, bits, layouts)


def rank_low_bits(
    hist: Histogram,
    syms: np.ndarray,
    key: StegoKey | None = None,
    use_kernel: bool | None = None,
) -> np.ndarray:
    """Exact bit expansion of the final interval low for a symbol sequence."""
    layouts = _layouts(hist.q, key)
    counts = hist.counts.copy()
    if use_kernel is None:
        use_kernel = HAVE_KERNEL
    if use_kernel:
        cap = int(capacity_bits(hist))
        buf = np.empty(cap + 2 * W + 64, dtype=np.uint8)
        nb = _kernel.rank(counts, layouts, np.ascontiguousarray(syms, dtype=np.int64), buf)
        return buf[:nb]
    return encode_symbols(counts, np.asarray(syms, dtype=np.int64), layouts)


def perm_encode(
    x,
    message: Message,
    key: StegoKey | None = None,
    use_kernel: bool | None = None,
) -> np.ndarray:
    """Embed a message into a rearrangement of the host."""
    samples = as_samples(x)
    hist = compute_histogram(samples)
    c = capacity_bits(hist)
    if len(message.bits) > c:
        raise CapacityError(f"capacity exceeded: {len(message.bits)} bits > {c} available")
    syms = unrank_to_symbols(hist, message.bits, key=key, use_kernel=use_kernel)
    return hist.values[syms]


def perm_decode(
    y,
    key: StegoKey | None = None,
    use_kernel: bool | None = None,
) -> Message:
    """Extract the capacity-length message carried by a stego sequence."""
    samples = as_samples(y)
    hist = compute_histogram(samples)
    c = capacity_bits(hist)
    syms = np.searchsorted(hist.values, samples)
    bits = rank_low_bits(hist, syms, key=key, use_kernel=use_kernel)
    return Message.from_int(message_from_low_bits(bits, c), c)
