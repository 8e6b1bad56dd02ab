# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops of the permutation codec.

Identical integer algorithm to the reference classes in permstego.coder:
64-bit interval registers (128-bit products), one-bit renormalization with
a pending counter, exact integer cumulative counts.  Cumulative lookups use
a linear scan for q <= 64 and Fenwick trees above; with a t-permutation key
one tree per stage layout is kept, all decremented after each symbol.
"""

import numpy as np

cdef extern from *:
    ctypedef unsigned long long u128 "__uint128_t"

ctypedef long long i64
ctypedef unsigned char u8

cdef int W = 64
cdef u128 HALF = (<u128>1) << 63
cdef u128 QUARTER = (<u128>1) << 62
cdef u128 THREEQ = ((<u128>1) << 63) + ((<u128>1) << 62)
cdef u128 FULL_MINUS_1 = (((<u128>1) << 64) - 1)

cdef int LINEAR_SCAN_LIMIT = 64


cdef inline void fen_add(i64* tree, Py_ssize_t q, Py_ssize_t pos, i64 delta) noexcept nogil:
    # pos is 1-based
    while pos <= q:
        tree[pos] += delta
        pos += pos & (-pos)


cdef inline i64 fen_prefix(i64* tree, Py_ssize_t pos) noexcept nogil:
    # sum of 1-based positions 1..pos
    cdef i64 s = 0
    while pos > 0:
        s += tree[pos]
        pos -= pos & (-pos)
    return s


cdef inline Py_ssize_t fen_find(i64* tree, Py_ssize_t q, Py_ssize_t topbit,
                                i64 value, i64* cum_out) noexcept nogil:
    # Largest 1-based pos with prefix(pos) <= value; returns the 0-based
    # layout position of the symbol whose span contains value.
    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t step = topbit
    cdef i64 rem = value
    while step > 0:
        if pos + step <= q and tree[pos + step] <= rem:
            pos += step
            rem -= tree[pos]
        step >>= 1
    cum_out[0] = value - rem
    return pos


def unrank(i64[::1] counts, i64[:, ::1] layouts, const u8[::1] bits, i64[::1] out):
    """Arithmetic-decode len(out) symbols from a zero-extended bit stream.

    ``counts`` is consumed in place.  layouts[(i+1) % t] orders the
    subintervals at 0-based stage i.
    """
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t q = counts.shape[0]
    cdef Py_ssize_t t = layouts.shape[0]
    cdef Py_ssize_t nbits = bits.shape[0]
    cdef bint use_fen = q > LINEAR_SCAN_LIMIT

    cdef i64 total = 0
    cdef Py_ssize_t k
    for k in range(q):
        total += counts[k]
    if total != n:
        raise ValueError("counts must sum to the output length")
    if total > (<i64>1) << (W - 2):
        raise ValueError("total count exceeds the frequency-precision budget")

    trees_arr = np.zeros((t, q + 1), dtype=np.int64) if use_fen else np.zeros((1, 1), dtype=np.int64)
    inv_arr = np.zeros((t, q), dtype=np.int64) if use_fen else np.zeros((1, 1), dtype=np.int64)
    cdef i64[:, ::1] trees = trees_arr
    cdef i64[:, ::1] inv = inv_arr
    cdef Py_ssize_t topbit = 1
    cdef Py_ssize_t ki, pos, parent
    if use_fen:
        while topbit * 2 <= q:
            topbit *= 2
        for ki in range(t):
            for pos in range(1, q + 1):
                inv[ki, layouts[ki, pos - 1]] = pos - 1
                trees[ki, pos] += counts[layouts[ki, pos - 1]]
                parent = pos + (pos & (-pos))
                if parent <= q:
                    trees[ki, parent] += trees[ki, pos]

    cdef u128 low = 0
    cdef u128 high = FULL_MINUS_1
    cdef u128 code = 0
    cdef u128 rng, value128
    cdef i64 value, cum, cnt = 0
    cdef Py_ssize_t bitpos = 0, i, j, sym = 0
    cdef int b

    with nogil:
        for j in range(W):
            b = bits[bitpos] if bitpos < nbits else 0
            bitpos += 1
            code = (code << 1) | <u128>b
        for i in range(n):
            ki = (i + 1) % t
            rng = high - low + 1
            value128 = ((code - low + 1) * <u128>total - 1) / rng
            value = <i64>value128
            if use_fen:
                pos = fen_find(&trees[ki, 0], q, topbit, value, &cum)
                sym = layouts[ki, pos]
                cnt = counts[sym]
            else:
                cum = 0
                for j in range(q):
                    sym = layouts[ki, j]
                    cnt = counts[sym]
                    if cum + cnt > value:
                        break
                    cum += cnt
            high = low + (rng * <u128>(cum + cnt)) / <u128>total - 1
            low = low + (rng * <u128>cum) / <u128>total
            while True:
                if high < HALF:
                    pass
                elif low >= HALF:
                    low -= HALF
                    high -= HALF
                    code -= HALF
                elif low >= QUARTER and high < THREEQ:
                    low -= QUARTER
                    high -= QUARTER
                    code -= QUARTER
                else:
                    break
                low = low << 1
                high = (high << 1) | 1
                b = bits[bitpos] if bitpos < nbits else 0
                bitpos += 1
                code = (code << 1) | <u128>b
            counts[sym] -= 1
            total -= 1
            if use_fen:
                for j in range(t):
                    fen_add(&trees[j, 0], q, inv[j, sym] + 1, -1)
            out[i] = sym
    return None


def rank(i64[::1] counts, i64[:, ::1] layouts, const i64[::1] syms, u8[::1] out_bits):
    """Arithmetic-encode a symbol sequence and write the exact binary
    expansion of the final interval's lower bound; returns the bit count."""
    cdef Py_ssize_t n = syms.shape[0]
    cdef Py_ssize_t q = counts.shape[0]
    cdef Py_ssize_t t = layouts.shape[0]
    cdef Py_ssize_t maxnb = out_bits.shape[0]
    cdef bint use_fen = q > LINEAR_SCAN_LIMIT

    cdef i64 total = 0
    cdef Py_ssize_t k
    for k in range(q):
        total += counts[k]
    if total != n:
        raise ValueError("counts must sum to the symbol count")
    if total > (<i64>1) << (W - 2):
        raise ValueError("total count exceeds the frequency-precision budget")

    trees_arr = np.zeros((t, q + 1), dtype=np.int64) if use_fen else np.zeros((1, 1), dtype=np.int64)
    inv_arr = np.zeros((t, q), dtype=np.int64)
    cdef i64[:, ::1] trees = trees_arr
    cdef i64[:, ::1] inv = inv_arr
    cdef Py_ssize_t ki, pos, parent
    for ki in range(t):
        for pos in range(q):
            inv[ki, layouts[ki, pos]] = pos
    if use_fen:
        for ki in range(t):
            for pos in range(1, q + 1):
                trees[ki, pos] += counts[layouts[ki, pos - 1]]
                parent = pos + (pos & (-pos))
                if parent <= q:
                    trees[ki, parent] += trees[ki, pos]

    cdef u128 low = 0
    cdef u128 high = FULL_MINUS_1
    cdef u128 rng
    cdef i64 cum, cnt, pending = 0
    cdef Py_ssize_t nb = 0, i, j, sym
    cdef int bit, other, overflow = 0

    with nogil:
        for i in range(n):
            ki = (i + 1) % t
            sym = syms[i]
            cnt = counts[sym]
            if cnt <= 0:
                overflow = 2
                break
            if use_fen:
                cum = fen_prefix(&trees[ki, 0], inv[ki, sym])
            else:
                cum = 0
                for j in range(q):
                    pos = layouts[ki, j]
                    if pos == sym:
                        break
                    cum += counts[pos]
            rng = high - low + 1
            high = low + (rng * <u128>(cum + cnt)) / <u128>total - 1
            low = low + (rng * <u128>cum) / <u128>total
            while True:
                if high < HALF:
                    bit = 0
                elif low >= HALF:
                    bit = 1
                    low -= HALF
                    high -= HALF
                elif low >= QUARTER and high < THREEQ:
                    pending += 1
                    low -= QUARTER
                    high -= QUARTER
                    low = low << 1
                    high = (high << 1) | 1
                    continue
                else:
                    break
                if nb + 1 + pending > maxnb:
                    overflow = 1
                    break
                out_bits[nb] = <u8>bit
                nb += 1
                other = 1 - bit
                while pending > 0:
                    out_bits[nb] = <u8>other
                    nb += 1
                    pending -= 1
                low = low << 1
                high = (high << 1) | 1
            if overflow:
                break
            counts[sym] -= 1
            total -= 1
            if use_fen:
                for j in range(t):
                    fen_add(&trees[j, 0], q, inv[j, sym] + 1, -1)
        if not overflow:
            # flush: exact register contents, pending resolved at the MSB
            bit = 1 if low >= HALF else 0
            if nb + 1 + pending + (W - 1) > maxnb:
                overflow = 1
            else:
                out_bits[nb] = <u8>bit
                nb += 1
                other = 1 - bit
                while pending > 0:
                    out_bits[nb] = <u8>other
                    nb += 1
                    pending -= 1
                for j in range(W - 2, -1, -1):
                    out_bits[nb] = <u8>((low >> j) & 1)
                    nb += 1
    if overflow == 2:
        raise ValueError("symbol not available in the count model")
    if overflow:
        raise ValueError("bit buffer too small")
    return nb
