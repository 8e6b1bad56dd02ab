import itertools

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from permstego.host import Message, capacity_bits, compute_histogram, multinomial_exact
from permstego.coder import CapacityError, StegoKey, perm_encode
from permstego.partition import (
    IndexPartitioning,
    PartitionError,
    SupportPartitioning,
    count_support_partitionings,
    lsb_pairing,
    partitioned_decode,
    partitioned_encode,
    support_induced,
    uniform_support_sequence,
)
from permstego.analysis import compute_metrics


def groups_of(sp):
    return [g.tolist() for g in sp.groups]


def test_support_induced_examples():
    x = np.array([0, 0, 1, 5, 5, 6])
    sp = SupportPartitioning([np.array([0, 1]), np.array([2, 3])])
    part = support_induced(sp, x)
    assert [u.tolist() for u in part.index_vectors] == [[0, 1, 2], [3, 4, 5]]
    whole = SupportPartitioning([np.arange(4)])
    assert [u.tolist() for u in support_induced(whole, x).index_vectors] == [[0, 1, 2, 3, 4, 5]]
    singles = SupportPartitioning([np.array([k]) for k in range(4)])
    part = support_induced(singles, x)
    assert [u.tolist() for u in part.index_vectors] == [[0, 1], [2], [3, 4], [5]]
    assert sum(len(g) for g in singles.groups) == 4


def test_support_induced_mismatch():
    sp = SupportPartitioning([np.array([0, 1])])
    with pytest.raises(PartitionError):
        support_induced(sp, np.array([0, 1, 2]))


def test_uniform_sequence_byte_support():
    v = np.arange(256)
    sp = uniform_support_sequence(v, 2)
    assert groups_of(sp) == [list(range(128)), list(range(128, 256))]
    assert groups_of(uniform_support_sequence(v, 1)) == [list(range(256))]
    sp = uniform_support_sequence(v, 256)
    assert sp.p == 256 and all(len(g) == 1 for g in sp.groups)


def test_uniform_sequence_connected_and_ties():
    # midpoint ties go to the lower group: v=0..2, p=2 has midpoint at 1
    sp = uniform_support_sequence(np.array([0, 1, 2]), 2)
    assert groups_of(sp) == [[0, 1], [2]]
    # gapped support can produce empty groups, which are dropped
    sp = uniform_support_sequence(np.array([0, 1, 2, 100]), 3)
    assert sp.requested_p == 3
    assert sp.p == 2
    assert groups_of(sp) == [[0, 1, 2], [3]]
    # p = q is pinned to singletons even on gapped supports
    sp = uniform_support_sequence(np.array([0, 1, 100]), 3)
    assert groups_of(sp) == [[0], [1], [2]]
    for q in (2, 5, 9):
        v = np.sort(np.random.default_rng(q).choice(1000, size=q, replace=False))
        for p in range(1, q + 1):
            sp = uniform_support_sequence(v, p)
            flat = np.concatenate(sp.groups)
            assert np.array_equal(flat, np.arange(q))  # connected, in order


def test_uniform_sequence_range_errors():
    with pytest.raises(PartitionError):
        uniform_support_sequence(np.arange(4), 0)
    with pytest.raises(PartitionError):
        uniform_support_sequence(np.arange(4), 5)


def test_lsb_pairing():
    sp = lsb_pairing(np.arange(256))
    assert sp.p == 128
    assert groups_of(sp)[:2] == [[0, 1], [2, 3]]
    assert groups_of(lsb_pairing(np.array([7]))) == [[0]]
    assert groups_of(lsb_pairing(np.array([1, 2, 5]))) == [[0, 1], [2]]


def test_count_support_partitionings():
    # oracle: enumerate all partitions of a small set
    def bell_by_enumeration(q):
        labels = [0] * q
        seen = set()

        def rec(i, maxl):
            if i == q:
                seen.add(tuple(labels))
                return
            for lab in range(maxl + 1):
                labels[i] = lab
                rec(i + 1, max(maxl, lab + 1))

        rec(0, 0)
        return len(seen)

    for q in range(1, 7):
        assert count_support_partitionings(q) == bell_by_enumeration(q)
        assert count_support_partitionings(q, connected_only=True) == 2 ** (q - 1)
    assert count_support_partitionings(3) == 5
    assert count_support_partitionings(256, connected_only=True) == 2**255


def test_partitioned_codec_exhaustive():
    x = np.array([0, 0, 1, 5, 5, 6])
    sp = SupportPartitioning([np.array([0, 1]), np.array([2, 3])])
    part = support_induced(sp, x)
    ys = set()
    for m in range(4):
        msg = Message.from_int(m, 2)
        y = partitioned_encode(x, part, msg)
        assert np.array_equal(np.sort(y), np.sort(x))
        ys.add(tuple(y))
        back = partitioned_decode(y, support_induced(sp, y))
        assert back.as_int() == m and len(back.bits) == 2
    assert len(ys) == 4


def test_partitioned_trivial_cases():
    x = np.array([4, 7, 7, 9, 4, 4])
    hist = compute_histogram(x)
    whole = SupportPartitioning([np.arange(hist.q)])
    msg = Message.from_int(3, capacity_bits(hist))
    assert np.array_equal(partitioned_encode(x, whole, msg), perm_encode(x, msg))
    singles = SupportPartitioning([np.array([k]) for k in range(hist.q)])
    for m in range(1):
        y = partitioned_encode(x, singles, Message.from_int(0, 0))
        assert np.array_equal(y, x)
    assert len(partitioned_decode(x, singles).bits) == 0


def test_partitioned_capacity_error():
    x = np.array([0, 0, 1, 5, 5, 6])
    sp = SupportPartitioning([np.array([0, 1]), np.array([2, 3])])
    with pytest.raises(CapacityError):
        partitioned_encode(x, sp, Message.from_bitstring("101"))


def test_partitioned_keyed_round_trip():
    rng = np.random.default_rng(9)
    x = rng.integers(0, 16, size=200)
    hist = compute_histogram(x)
    sp = uniform_support_sequence(hist.values, 4)
    key = StegoKey([rng.permutation(hist.q) for _ in range(2)])
    part = support_induced(sp, x)
    caps = sum(capacity_bits(hist.counts[g]) for g in sp.groups)
    msg = Message(rng.integers(0, 2, size=caps, dtype=np.uint8))
    y = partitioned_encode(x, part, msg, key=key)
    assert np.array_equal(np.sort(y), np.sort(x))
    back = partitioned_decode(y, support_induced(sp, y), key=key)
    assert np.array_equal(back.bits, msg.bits)


def test_index_partitioning_validation():
    with pytest.raises(PartitionError):
        IndexPartitioning([np.array([0, 1]), np.array([1, 2])], 3)
    with pytest.raises(PartitionError):
        IndexPartitioning([np.array([0, 2])], 3)


def test_reassembly_scatter_gather():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(2, 40))
        x = rng.integers(-5, 6, size=n)
        hist = compute_histogram(x)
        p = int(rng.integers(1, hist.q + 1))
        sp = uniform_support_sequence(hist.values, p)
        part = support_induced(sp, x)
        rebuilt = np.empty_like(x)
        for u in part.index_vectors:
            rebuilt[u] = x[u]
        assert np.array_equal(rebuilt, x)
        assert sum(len(u) for u in part.index_vectors) == n


def test_partitioned_count_is_product():
    rng = np.random.default_rng(2)
    for _ in range(30):
        n = int(rng.integers(2, 11))
        x = rng.integers(0, 4, size=n)
        hist = compute_histogram(x)
        p = int(rng.integers(1, hist.q + 1))
        sp = uniform_support_sequence(hist.values, p)
        product = 1
        for g in sp.groups:
            product *= multinomial_exact(hist.counts[g])
        # exhaustive: count distinct outputs over all messages of the joint capacity
        part = support_induced(sp, x)
        caps = sum(capacity_bits(hist.counts[g]) for g in sp.groups)
        ys = {tuple(partitioned_encode(x, part, Message.from_int(m, caps))) for m in range(1 << caps)}
        assert len(ys) == 1 << caps
        assert (1 << caps) <= product
        # density: floor per partition loses less than one bit each
        assert product < (1 << (caps + sp.p))


def test_invariance_of_support_induced_metrics():
    rng = np.random.default_rng(4)
    x = rng.integers(0, 10, size=300)
    hist = compute_histogram(x)
    sp = uniform_support_sequence(hist.values, 3)
    rep_x = compute_metrics(x, sp)
    for _ in range(5):
        y = rng.permutation(x)
        rep_y = compute_metrics(y, sp)
        assert rep_x == rep_y


def test_describe():
    sp = SupportPartitioning([np.array([0, 1]), np.array([2])])
    text = sp.describe(np.array([0, 1, 5]))
    assert text.splitlines() == ["group 1: 0..1", "group 2: 5..5"]
