"""Blind adaptive partition selection under a distortion constraint.

Both sides evaluate the same pre-agreed sequence of support partitionings
(the uniform centroid sequence by default) on the shared histogram, keep the
ones meeting xi_bar >= kappa, and pick the rate maximizer, first in the
sequence on ties.  Every quantity involved is a function of the histogram
alone, so encoder and decoder agree exactly from any rearrangement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .host import Histogram, compute_histogram, HostError
from .partition import SupportPartitioning, lsb_pairing, uniform_group_ids, uniform_support_sequence
from .analysis import (
    MetricsReport,
    _as_histogram,
    _avg_power_of,
    _host_power_of,
    compute_metrics,
)


class InfeasibleConstraintError(ValueError):
    """No partitioning in the sequence meets the distortion constraint."""


@dataclass
class SelectionConstraint:
    """Minimum host-to-average-watermark power ratio and the sequence id."""

    kappa: float
    sequence: str = "uniform"  # uniform | lsb | explicit
    explicit: list | None = None

    def __post_init__(self) -> None:
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if self.sequence not in ("uniform", "lsb", "explicit"):
            raise ValueError(f"unknown partitioning sequence {self.sequence!r}")
        if self.sequence == "explicit" and not self.explicit:
            raise ValueError("explicit sequence needs a partitioning list")


@dataclass
class SelectionResult:
    p_star: int
    requested_p: int | None
    partitioning: SupportPartitioning
    report: MetricsReport
    variance_spread: float | None
    selection_rate: float

    def agrees_with(self, other: "SelectionResult") -> bool:
        return (
            self.p_star == other.p_star
            and self.requested_p == other.requested_p
            and self.partitioning == other.partitioning
            and self.report == other.report
            and self.selection_rate == other.selection_rate
        )


def _candidates(hist: Histogram, constraint: SelectionConstraint):
    if constraint.sequence == "uniform":
        for p in range(1, hist.q + 1):
            yield uniform_support_sequence(hist.values, p)
    elif constraint.sequence == "lsb":
        yield lsb_pairing(hist.values)
    else:
        yield from constraint.explicit


def _score_and_feasible(hist: Histogram, sp: SupportPartitioning, kappa: float):
    """Selection rate H(X|U) and feasibility of xi_bar >= kappa.

    The selection rate uses the entropy upper bound on each partition rate;
    it is a pure histogram function, identical on both sides.
    """
    subs = [(hist.values[g], hist.counts[g]) for g in sp.groups]
    wavg = _avg_power_of(subs)
    px = _host_power_of(hist)
    feasible = (wavg == 0.0) or (px / wavg >= kappa)
    n = float(hist.n)
    score = 0.0
    for _, h in subs:
        nj = float(h.sum())
        pr = h / nj
        score += (nj / n) * float(-(pr * np.log2(pr)).sum())
    return score, feasible


def _variance_spread(hist: Histogram, sp: SupportPartitioning) -> float | None:
    """max/min intrapartition sample variance over partitions with nonzero
    variance; variance constancy is the necessary condition for a
    partitioning to approach the rate upper bound."""
    variances = []
    for g in sp.groups:
        v = hist.values[g].astype(np.float64)
        h = hist.counts[g].astype(np.float64)
        nj = h.sum()
        s1 = float(h @ v)
        var = float(h @ (v * v)) / nj - (s1 / nj) ** 2
        if var > 0:
            variances.append(var)
    if not variances:
        return None
    return max(variances) / min(variances)


def _best_uniform_p(hist: Histogram, kappa: float) -> tuple[int | None, float]:
    """Sweep the whole uniform sequence with prefix sums: O(q) per p.

    Returns (best requested p, its selection rate).  Evaluating every p
    through one shared code path keeps encoder/decoder selections bitwise
    identical.
    """
    v = hist.values
    hf = hist.counts.astype(np.float64)
    vf = v.astype(np.float64)
    zero = np.zeros(1)
    c_n = np.concatenate([zero, np.cumsum(hf)])
    c_s1 = np.concatenate([zero, np.cumsum(hf * vf)])
    c_s2 = np.concatenate([zero, np.cumsum(hf * vf * vf)])
    c_hl = np.concatenate([zero, np.cumsum(hf * np.log2(hf))])
    px = c_s2[-1]
    n = float(hist.n)
    best_p = None
    best_score = -1.0
    for p in range(1, hist.q + 1):
        ids = uniform_group_ids(v, p)
        cuts = np.flatnonzero(np.diff(ids)) + 1
        starts = np.concatenate([[0], cuts])
        ends = np.concatenate([cuts, [hist.q]])
        nj = c_n[ends] - c_n[starts]
        s1 = c_s1[ends] - c_s1[starts]
        s2 = c_s2[ends] - c_s2[starts]
        wavg = 2.0 * float(np.sum(s2 - s1 * s1 / nj))
        if wavg > 0 and px / wavg < kappa:
            continue
        score = float(np.sum(nj * np.log2(nj) - (c_hl[ends] - c_hl[starts]))) / n
        if score > best_score:
            best_p = p
            best_score = score
    return best_p, best_score


def select_partitioning(signal, constraint: SelectionConstraint, value_bits: int | None = None) -> SelectionResult:
    """Feasible partitioning of maximum selection rate, first on ties.

    ``signal`` may be the host, any rearrangement of it, or its histogram;
    the result is identical in all cases (invariance property).
    """
    hist, inferred_bits = _as_histogram(signal)
    if value_bits is None:
        value_bits = inferred_bits
    best = None
    best_score = -1.0
    if constraint.sequence == "uniform":
        best_p, best_score = _best_uniform_p(hist, constraint.kappa)
        if best_p is not None:
            best = uniform_support_sequence(hist.values, best_p)
    else:
        for sp in _candidates(hist, constraint):
            score, feasible = _score_and_feasible(hist, sp, constraint.kappa)
            if feasible and score > best_score:
                best = sp
                best_score = score
    if best is None:
        raise InfeasibleConstraintError(
            f"no partitioning in the {constraint.sequence} sequence reaches xi_bar >= {constraint.kappa}"
        )
    report = compute_metrics(hist, best, value_bits=value_bits)
    return SelectionResult(
        p_star=best.p,
        requested_p=best.requested_p,
        partitioning=best,
        report=report,
        variance_spread=_variance_spread(hist, best),
        selection_rate=best_score,
    )


def verify_blind_agreement(x, y, constraint: SelectionConstraint) -> bool:
    """True iff the selector output from x and from a rearrangement y is
    identical, including every theoretical metric."""
    hx = compute_histogram(x)
    hy = compute_histogram(y)
    if not (np.array_equal(hx.values, hy.values) and np.array_equal(hx.counts, hy.counts)):
        raise HostError("y is not a rearrangement of x (histogram mismatch)")
    rx = select_partitioning(hx, constraint)
    ry = select_partitioning(hy, constraint)
    return rx.agrees_with(ry)
