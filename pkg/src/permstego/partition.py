"""Partitionings and the partitioned permutation codec.

A support partitioning groups histogram bins; applied to a host it induces
an index partitioning that any rearrangement reproduces identically, which
is what lets the decoder recompute the encoder's partitioning blind.
Coding runs independently per partition and the stego vector is reassembled
by scattering each permuted subvector back to its index vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .host import Histogram, Message, capacity_bits, compute_histogram, as_samples
from .coder import StegoKey, CapacityError, unrank_to_symbols, rank_low_bits, message_from_low_bits


class PartitionError(ValueError):
    pass


@dataclass
class SupportPartitioning:
    """Disjoint sorted index groups covering the support {0..q-1}.

    ``requested_p`` records the p asked of a generating sequence; the
    effective number of groups can be smaller when empty groups are dropped.
    """

    groups: list
    requested_p: int | None = None

    def __post_init__(self) -> None:
        self.groups = [np.asarray(g, dtype=np.int64) for g in self.groups]
        q = self.q
        cover = np.concatenate(self.groups) if self.groups else np.zeros(0, dtype=np.int64)
        if len(cover) != q or not np.array_equal(np.sort(cover), np.arange(q)):
            raise PartitionError("groups must disjointly cover the support indices")
        for g in self.groups:
            if len(g) == 0 or np.any(np.diff(g) <= 0):
                raise PartitionError("each group must be nonempty and sorted ascending")

    @property
    def p(self) -> int:
        return len(self.groups)

    @property
    def q(self) -> int:
        return int(sum(len(g) for g in self.groups))

    def describe(self, values: np.ndarray) -> str:
        lines = []
        for j, g in enumerate(self.groups, start=1):
            lines.append(f"group {j}: {int(values[g[0]])}..{int(values[g[-1]])}")
        return "\n".join(lines)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SupportPartitioning):
            return NotImplemented
        return len(self.groups) == len(other.groups) and all(
            np.array_equal(a, b) for a, b in zip(self.groups, other.groups)
        )


@dataclass
class IndexPartitioning:
    """Disjoint sorted position vectors covering {0..n-1}.

    ``support_groups`` is set when the partitioning was induced by a support
    partitioning, enabling histogram shortcuts and blind decoding.
    """

    index_vectors: list
    n: int
    support_groups: SupportPartitioning | None = None

    def __post_init__(self) -> None:
        self.index_vectors = [np.asarray(u, dtype=np.int64) for u in self.index_vectors]
        cover = np.concatenate(self.index_vectors) if self.index_vectors else np.zeros(0, dtype=np.int64)
        if len(cover) != self.n or not np.array_equal(np.sort(cover), np.arange(self.n)):
            raise PartitionError("index vectors must disjointly cover 0..n-1")
        for u in self.index_vectors:
            if len(u) and np.any(np.diff(u) <= 0):
                raise PartitionError("index vectors must be sorted ascending")

    @property
    def p(self) -> int:
        return len(self.index_vectors)

    def lengths(self) -> list[int]:
        return [len(u) for u in self.index_vectors]


def support_induced(sp: SupportPartitioning, x) -> IndexPartitioning:
    """Index partitioning collecting, per group, the positions whose value
    falls in that group's support bins."""
    samples = as_samples(x)
    hist = compute_histogram(samples)
    if sp.q != hist.q:
        raise PartitionError(f"partitioning is over q={sp.q}, host support has q={hist.q}")
    bin_of = np.searchsorted(hist.values, samples)
    group_of_bin = np.empty(hist.q, dtype=np.int64)
    for j, g in enumerate(sp.groups):
        group_of_bin[g] = j
    group_of_sample = group_of_bin[bin_of]
    order = np.argsort(group_of_sample, kind="stable")
    counts = np.bincount(group_of_sample, minlength=sp.p)
    splits = np.cumsum(counts)[:-1]
    vectors = np.split(order, splits)
    return IndexPartitioning([np.sort(u) for u in vectors], hist.n, support_groups=sp)


def uniform_support_sequence(values, p: int) -> SupportPartitioning:
    """p-th member of the uniform centroid sequence over a support vector.

    Centroids sit at v1 + (j - 1/2)(vq - v1)/p; every bin goes to its nearest
    centroid, ties to the lower-indexed one (decided by exact integer
    comparison).  Groups come out connected; empty ones are dropped and the
    survivors renumbered.  p = q is the all-singletons partitioning: the
    centroid rule already yields it on gap-free supports, and pinning it for
    gapped supports keeps the sequence's zero-distortion fallback intact.
    """
    v = np.asarray(values, dtype=np.int64)
    ids = uniform_group_ids(v, p)
    cuts = np.flatnonzero(np.diff(ids)) + 1  # empty groups dropped implicitly
    groups = np.split(np.arange(len(v)), cuts)
    return SupportPartitioning(groups, requested_p=p)


def uniform_group_ids(values: np.ndarray, p: int) -> np.ndarray:
    """Raw group index per support bin under the p-th uniform partitioning
    (before empty groups are dropped); nondecreasing over the sorted support."""
    v = np.asarray(values, dtype=np.int64)
    q = len(v)
    if not 1 <= p <= q:
        raise PartitionError(f"p={p} outside 1..q={q}")
    if p == 1 or q == 1:
        return np.zeros(q, dtype=np.int64)
    if p == q:
        return np.arange(q, dtype=np.int64)
    span = int(v[-1] - v[0])
    # bin k belongs to group #{j in 1..p-1 : j*span < p*(v_k - v_1)};
    # integer comparison keeps the nearest-centroid tie on the lower group
    scaled = p * (v - v[0])
    return np.maximum(np.minimum((scaled - 1) // span, p - 1), 0)


def lsb_pairing(values) -> SupportPartitioning:
    """Static pairing of adjacent histogram bins, ceil(q/2) groups."""
    q = len(np.asarray(values))
    groups = [np.arange(k, min(k + 2, q)) for k in range(0, q, 2)]
    return SupportPartitioning(groups, requested_p=(q + 1) // 2)


def count_support_partitionings(q: int, connected_only: bool = False) -> int:
    """Bell number B(q), or 2^(q-1) when restricted to connected partitions."""
    if q < 1:
        raise ValueError("q must be >= 1")
    if connected_only:
        return 1 << (q - 1)
    # Bell triangle; B(q) is the last entry of the q-th row
    row = [1]
    for _ in range(q - 1):
        nxt = [row[-1]]
        for val in row:
            nxt.append(nxt[-1] + val)
        row = nxt
    return row[-1]


def _as_index_partitioning(part, x) -> IndexPartitioning:
    if isinstance(part, SupportPartitioning):
        return support_induced(part, x)
    if isinstance(part, IndexPartitioning):
        return part
    raise PartitionError("expected a SupportPartitioning or IndexPartitioning")


def _restrict_key(key: StegoKey | None, local_bins: np.ndarray) -> StegoKey | None:
    """Key for one partition: each permutation restricted to the partition's
    support bins, relabeled to local indices."""
    if key is None or len(local_bins) <= 1:
        return None
    perms = []
    for perm in key.perms:
        sel = perm[np.isin(perm, local_bins)]
        perms.append(np.searchsorted(local_bins, sel))
    return StegoKey(perms)


def partition_capacities(x, part: IndexPartitioning) -> list[int]:
    samples = as_samples(x)
    return [capacity_bits(compute_histogram(samples[u])) for u in part.index_vectors]


def _partition_histograms(samples, part: IndexPartitioning, hist: Histogram | None = None):
    """Per-partition (histogram, local symbol indices, local bin ids)."""
    out = []
    if part.support_groups is not None:
        hist = hist or compute_histogram(samples)
        bin_of = np.searchsorted(hist.values, samples)
        for u, g in zip(part.index_vectors, part.support_groups.groups):
            sub = Histogram(hist.values[g], hist.counts[g], int(hist.counts[g].sum()))
            syms = np.searchsorted(hist.values[g], samples[u])
            out.append((u, sub, syms, g))
    else:
        for u in part.index_vectors:
            sub = compute_histogram(samples[u])
            syms = np.searchsorted(sub.values, samples[u])
            out.append((u, sub, syms, None))
    return out


def _local_key(key: StegoKey | None, g, sub: Histogram, global_hist: Histogram) -> StegoKey | None:
    """Key for one partition, restricted to its support bins (global ids)."""
    if key is None:
        return None
    if g is None:
        # arbitrary index partitioning: locate the subvector's bins in the
        # global support
        g = np.searchsorted(global_hist.values, sub.values)
    return _restrict_key(key, np.asarray(g, dtype=np.int64))


def partitioned_encode(x, part, message: Message, key: StegoKey | None = None) -> np.ndarray:
    """Split the message into per-partition chunks of each partition's
    capacity, encode every subvector independently, scatter back."""
    samples = as_samples(x)
    hist = compute_histogram(samples)
    part = _as_index_partitioning(part, samples)
    pieces = _partition_histograms(samples, part, hist)
    caps = [capacity_bits(sub) for _, sub, _, _ in pieces]
    total = int(sum(caps))
    if len(message.bits) > total:
        raise CapacityError(f"capacity exceeded: {len(message.bits)} bits > {total} available")
    bits = message.padded(total).bits
    y = np.empty_like(samples)
    off = 0
    for (u, sub, _, g), c in zip(pieces, caps):
        syms = unrank_to_symbols(sub, bits[off : off + c], key=_local_key(key, g, sub, hist))
        y[u] = sub.values[syms]
        off += c
    return y


def partitioned_decode(y, part, key: StegoKey | None = None) -> Message:
    """Concatenate the per-partition decoded chunks (left inverse of
    partitioned_encode for the same partitioning and key)."""
    samples = as_samples(y)
    hist = compute_histogram(samples)
    part = _as_index_partitioning(part, samples)
    pieces = _partition_histograms(samples, part, hist)
    chunks = []
    for u, sub, syms, g in pieces:
        c = capacity_bits(sub)
        low_bits = rank_low_bits(sub, syms, key=_local_key(key, g, sub, hist))
        chunks.append(Message.from_int(message_from_low_bits(low_bits, c), c).bits)
    bits = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.uint8)
    return Message(bits)
