"""Acceptance suite: the eight release criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion with its runtime.  The large sweeps (criteria 3, 4, 5, 8) share
module-scoped fixtures so the full-scale experiments run once each plus the
repeat required by the determinism criterion.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from permstego.host import Message, capacity_bits, compute_histogram, entropy_bits
from permstego.coder import StegoKey, perm_encode
from permstego.partition import support_induced, partitioned_decode, partitioned_encode
from permstego.analysis import avg_watermark_power, chebyshev_bound, rho_upper_bound, to_db
from permstego.selector import SelectionConstraint, select_partitioning, verify_blind_agreement
from permstego.oracle import enumerate_rearrangements, exact_metrics, permutation_expectations, table_codec
from permstego.experiments import (
    FIG2_COLUMNS,
    FIG3_COLUMNS,
    gaussian_host,
    run_fig2,
    run_fig3,
    run_lsb,
    rows_to_csv,
)

FULL_N = 10**6
SEED = 0


def report(criterion, elapsed, detail=""):
    print(f"PASS criterion {criterion} ({elapsed:.1f}s) {detail}")


@pytest.fixture(scope="module")
def fig2_rows():
    return run_fig2(n=FULL_N, seed=SEED)


@pytest.fixture(scope="module")
def fig3_rows():
    return run_fig3(n=FULL_N, seed=SEED)


@pytest.fixture(scope="module")
def lsb_rows():
    return run_lsb(n=FULL_N, seed=SEED)


def test_criterion_1_round_trip_perfection():
    """1000 randomized embed/extract trials across sizes, supports, kappas
    and keys: bit-exact recovery and exact histogram preservation."""
    t0 = time.time()
    rng = np.random.default_rng(101)
    trials_per_size = 250
    for n in (10, 100, 1000, 10**4):
        for _ in range(trials_per_size):
            qmax = min(256, n)
            q = int(rng.integers(2, qmax + 1))
            lo = int(rng.integers(-128, 128))
            values = np.sort(rng.choice(np.arange(lo, lo + 512), size=q, replace=False))
            x = np.concatenate([values, rng.choice(values, size=n - q)])
            rng.shuffle(x)
            kappa = float(10 ** rng.uniform(-1, 6))
            constraint = SelectionConstraint(kappa)
            sel = select_partitioning(x, constraint)
            key = None
            if rng.random() < 0.5:
                key = StegoKey([rng.permutation(sel.report.q) for _ in range(int(rng.integers(1, 4)))])
            part = support_induced(sel.partitioning, x)
            c = int(round(sel.report.rho_emp * n))
            msg = Message(rng.integers(0, 2, size=c, dtype=np.uint8))
            y = partitioned_encode(x, part, msg, key=key)
            hx = compute_histogram(x)
            hy = compute_histogram(y)
            assert np.array_equal(hx.values, hy.values) and np.array_equal(hx.counts, hy.counts)
            # blind extraction: recompute the partitioning from y
            sel_y = select_partitioning(y, constraint)
            part_y = support_induced(sel_y.partitioning, y)
            back = partitioned_decode(y, part_y, key=key)
            assert np.array_equal(back.bits, msg.bits)
    elapsed = time.time() - t0
    report(1, elapsed, "1000/1000 round trips, histograms exact")
    assert elapsed < 60


def _corpus_hosts():
    supports = [
        np.array([0]),
        np.array([0, 1]),
        np.array([-1, 1]),
        np.array([0, 1, 2]),
        np.array([-1, 0, 2]),
    ]
    for values in supports:
        s = len(values)
        for n in range(s, 7):
            for cuts in itertools.combinations(range(1, n), s - 1):
                bounds = (0,) + cuts + (n,)
                counts = np.diff(bounds)
                yield np.repeat(values, counts)
    rng = np.random.default_rng(202)
    for _ in range(50):
        q = int(rng.integers(2, 5))
        n = int(rng.integers(q, 10))
        values = np.sort(rng.choice(np.arange(-5, 6), size=q, replace=False))
        x = np.concatenate([values, rng.choice(values, size=n - q)])
        rng.shuffle(x)
        yield x


def test_criterion_2_oracle_equivalence():
    """Codec vs lookup-table oracle and exact rational agreement of every
    enumerated average with its closed form (zero tolerance)."""
    t0 = time.time()
    hosts = 0
    for x in _corpus_hosts():
        hosts += 1
        tc = table_codec(x)
        assert tc.injective and tc.all_in_set
        em = exact_metrics(x)
        assert em.avg_power == em.avg_power_closed
        assert em.max_power == em.max_power_closed
        assert em.nu_bar == em.nu_bar_closed
        assert em.var_power == em.var_power_closed
        # closed-form exact eps does not exist (generalized rencontres is
        # open); the exact chain against the closed-form lower bound is the
        # zero-tolerance check
        assert em.eps_bar_coeff >= em.eps_lower_coeff
        pe = permutation_expectations(x)
        assert (pe.e_pi == pe.e_pi_closed).all()
        assert (pe.e_pxxp == pe.e_pxxp_closed).all()
        assert (pe.e_pxxp_rearr == pe.e_pxxp_closed).all()
    elapsed = time.time() - t0
    report(2, elapsed, f"{hosts} hosts, all exact")
    assert elapsed < 120


def test_criterion_3_fig2_reproduction(fig2_rows):
    """Binary sweep at n = 10^6: single-draw empirics match the theory
    curves at the paper's plotted agreement."""
    t0 = time.time()
    assert len(fig2_rows) == 19
    for row in fig2_rows:
        w = int(round(row["omega"] * FULL_N))
        p1 = w / FULL_N
        h_x = -(p1 * math.log2(p1) + (1 - p1) * math.log2(1 - p1))
        assert abs(row["rho_emp"] - h_x) <= 0.002
        assert abs(to_db(row["xi_emp"]) - to_db(row["xi_bar"])) <= 0.1
        assert row["eps_emp"] >= 1.95
        assert row["xi_min"] >= row["xi_bar"] / 2
    elapsed = time.time() - t0
    report(3, elapsed, "19 grid points within tolerance")


def test_criterion_4_fig3_reproduction(fig3_rows):
    """Gaussian-host partition sweep: rate chains hold at every p and the
    gap to the upper bound stays small and flat."""
    t0 = time.time()
    ss = np.random.SeedSequence(SEED)
    x = gaussian_host(FULL_N, ss.spawn(1 + 256)[0])
    h_x = entropy_bits(compute_histogram(x))
    gaps = []
    for row in fig3_rows:
        assert row["rho_emp"] <= row["rho_theory"] <= h_x + 1e-12
        assert row["rho_theory"] < row["rho_u"]
        assert max(row["rho_l"], row["rho_l_prime"], 0.0) <= row["rho_theory"] + 1e-12
        if row["p"] >= 4:
            gaps.append(row["rho_u"] - row["rho_emp"])
    gaps = np.array(gaps)
    assert gaps.min() >= 0.0
    assert gaps.max() <= 1.0
    assert gaps.std() <= 0.15
    elapsed = time.time() - t0
    report(
        4,
        elapsed,
        f"{len(fig3_rows)} partitionings; gap in [{gaps.min():.3f}, {gaps.max():.3f}], std {gaps.std():.3f}",
    )


def test_criterion_5_lsb_pairing(lsb_rows):
    """Static adjacent-bin pairing reproduces the histogram-preserving LSB
    operating point and the paper's upper-bound constant."""
    t0 = time.time()
    row = lsb_rows[0]
    assert abs(row["avg_power_per_element"] - 0.5) <= 0.05
    assert abs(row["rho_emp"] - 1.0) <= 0.05
    # the paper's constant is the bound evaluated at the nominal power 1/2;
    # the seeded host lands close enough for the same band to hold as-is
    assert abs(rho_upper_bound(0.5) - 1.2546) <= 1e-4
    assert abs(row["rho_u"] - 1.2546) <= 1e-4
    elapsed = time.time() - t0
    report(
        5,
        elapsed,
        f"w2/n={row['avg_power_per_element']:.4f}, rho_emp={row['rho_emp']:.4f}, rho_u={row['rho_u']:.5f}",
    )


def test_criterion_6_concentration():
    """Chebyshev tail bound over 10^4 embeddings at n = 10^4, plus the hard
    cap that empties every tail beyond gamma = 1."""
    t0 = time.time()
    rng = np.random.default_rng(606)
    n = 10**4
    x = np.clip(np.rint(rng.normal(128, 25, size=n)), 0, 255).astype(np.int64)
    hist = compute_histogram(x)
    c = capacity_bits(hist)
    wavg = avg_watermark_power(x)
    trials = 10**4
    powers = np.empty(trials)
    for k in range(trials):
        y = perm_encode(x, Message(rng.integers(0, 2, size=c, dtype=np.uint8)))
        d = (y - x).astype(np.float64)
        powers[k] = d @ d
    dev = np.abs(powers - wavg)
    for gamma in (0.05, 0.1, 0.5):
        freq = float(np.mean(dev >= gamma * wavg))
        assert freq <= chebyshev_bound(gamma, n), (gamma, freq)
    assert int(np.sum(dev >= 1.000001 * wavg)) == 0
    elapsed = time.time() - t0
    report(6, elapsed, "tails under 1/(gamma^2 (n-1)), empty beyond gamma=1")
    assert elapsed < 120


def test_criterion_7_blind_agreement():
    """Selector output and all theoretical metrics identical from the host
    and from random rearrangements, exactly."""
    t0 = time.time()
    rng = np.random.default_rng(707)
    for _ in range(100):
        n = int(rng.integers(64, 2048))
        q = int(rng.integers(2, 65))
        values = np.sort(rng.choice(np.arange(-300, 300), size=q, replace=False))
        x = np.concatenate([values, rng.choice(values, size=n - q)])
        rng.shuffle(x)
        kappa = float(10 ** rng.uniform(-1, 7))
        constraint = SelectionConstraint(kappa)
        for _ in range(10):
            y = rng.permutation(x)
            assert verify_blind_agreement(x, y, constraint)
    elapsed = time.time() - t0
    report(7, elapsed, "100 hosts x 10 rearrangements, exact agreement")


def test_criterion_8_determinism(fig2_rows, fig3_rows):
    """Fixed-seed experiment CSVs are byte-identical across runs."""
    t0 = time.time()
    csv2_a = rows_to_csv(fig2_rows, FIG2_COLUMNS)
    csv2_b = rows_to_csv(run_fig2(n=FULL_N, seed=SEED), FIG2_COLUMNS)
    assert csv2_a.encode() == csv2_b.encode()
    csv3_a = rows_to_csv(fig3_rows, FIG3_COLUMNS)
    csv3_b = rows_to_csv(run_fig3(n=FULL_N, seed=SEED), FIG3_COLUMNS)
    assert csv3_a.encode() == csv3_b.encode()
    elapsed = time.time() - t0
    report(8, elapsed, "fig2 and fig3 byte-identical on rerun")
