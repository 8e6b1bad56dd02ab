import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from permstego.host import HostError, HostSequence, Message, capacity_bits, compute_histogram
from permstego.coder import perm_encode
from permstego.partition import SupportPartitioning, uniform_support_sequence
from permstego.analysis import (
    avg_watermark_power,
    chebyshev_bound,
    compute_metrics,
    degree_of_host_change,
    efficiency_bounds,
    empirical_metrics,
    geometry,
    max_watermark_power,
    power_ratios,
    rate_and_bounds,
    rho_upper_bound,
    to_db,
)

X7 = np.array([1, 2, 3, 4, 4, 4, 4])
PAIR_PART = SupportPartitioning([np.array([0, 1]), np.array([2, 3])])


def test_avg_power_examples():
    assert avg_watermark_power(X7) == pytest.approx(124 / 7, rel=1e-12)
    assert avg_watermark_power(np.array([1, 1, 2, 2, 3, 3, 3])) == pytest.approx(68 / 7, rel=1e-12)
    assert avg_watermark_power(np.array([9, 9, 9])) == 0.0
    x = np.array([0, 0, 1, 5, 5, 6])
    assert avg_watermark_power(x, PAIR_PART) == pytest.approx(8 / 3, rel=1e-12)
    assert avg_watermark_power(x) == pytest.approx(233 / 3, rel=1e-12)


def test_same_rate_different_power():
    a = compute_metrics(X7)
    b = compute_metrics(np.array([1, 1, 2, 2, 3, 3, 3]))
    assert a.rho == pytest.approx(b.rho, rel=1e-12)
    assert a.avg_power != b.avg_power and a.nu_bar != b.nu_bar


def test_max_power_examples():
    assert max_watermark_power(np.array([0, 0, 1])) == pytest.approx(2.0)
    x = np.array([-1, 1])
    assert max_watermark_power(x) == pytest.approx(8.0)
    assert max_watermark_power(x) == pytest.approx(4 * 2.0)  # antipodal equality
    assert max_watermark_power(np.array([3, 3, 3])) == 0.0


def test_power_ratio_examples():
    xi, xi_star, xi_min = power_ratios(np.array([-1, 0, 1]))
    assert xi == pytest.approx(0.5, rel=1e-12)
    assert to_db(xi) == pytest.approx(-3.0103, abs=1e-3)
    # binary Hamming host, weight 3 of 10
    x = np.repeat([0, 1], [7, 3])
    xi, xi_star, xi_min = power_ratios(x)
    assert xi == pytest.approx(1 / 1.4, rel=1e-12)
    assert xi_min == pytest.approx(0.5, rel=1e-12)
    xi, xi_star, xi_min = power_ratios(np.array([4, 4]))
    assert xi == math.inf and xi_min == math.inf and xi_star == math.inf
    with pytest.raises(HostError):
        power_ratios(np.array([0, 0]))


def test_degree_of_host_change_examples():
    assert degree_of_host_change(np.array([0, 0, 1])) == pytest.approx(4 / 9, rel=1e-12)
    x = np.repeat(np.arange(5), 4)
    assert degree_of_host_change(x) == pytest.approx(1 - 1 / 5, rel=1e-12)
    assert degree_of_host_change(np.array([2, 2])) == 0.0


def test_efficiency_examples():
    eps_l, eps_asym = efficiency_bounds(np.array([0, 0, 1]))
    assert eps_l == pytest.approx(math.log2(3) / 3, rel=1e-12)
    # binary type 1/2 asymptote: 2 bits per change
    x = np.repeat([0, 1], [500, 500])
    _, eps_asym = efficiency_bounds(x)
    assert eps_asym == pytest.approx(2.0, rel=1e-12)
    assert efficiency_bounds(np.array([1, 1])) == (None, None)


def test_rate_and_bounds_examples():
    assert rho_upper_bound(0.5) == pytest.approx(1.2546, abs=1e-4)
    assert rho_upper_bound(0.0) == pytest.approx(0.2546, abs=1e-4)
    # uniform histogram, large n: rho_l ~ log2 q ~ rho
    q, reps = 16, 4096
    x = np.repeat(np.arange(q), reps)
    rb = rate_and_bounds(x)
    assert rb["rho_l"] == pytest.approx(math.log2(q), abs=0.02)
    assert rb["rho"] == pytest.approx(math.log2(q), abs=0.01)
    # asymptotic crossover of the two lower bounds at nu = 1/2
    assert -math.log2(1 - 0.5) == pytest.approx(2 * 0.5, rel=1e-12)


def test_bounds_ordering_random():
    rng = np.random.default_rng(12)
    for _ in range(60):
        n = int(rng.integers(2, 13))
        x = rng.integers(-4, 5, size=n)
        hist = compute_histogram(x)
        p = int(rng.integers(1, hist.q + 1))
        part = uniform_support_sequence(hist.values, p)
        rep = compute_metrics(x, part)
        rep.validate()
        if math.isfinite(rep.xi_bar):
            assert rep.xi_min >= rep.xi_bar / 2 * (1 - 1e-12)
            assert rep.xi_bar >= 0.5 * (1 - 1e-12)
        assert rep.max_power <= 2 * rep.avg_power * (1 + 1e-12) + 1e-12
        assert rep.nu_bar <= rep.nu_ub_power + 1e-12
        assert rep.nu_bar <= rep.nu_ub_tau + 1e-9
        assert rep.nu_bar <= rep.nu_ub_log_tau + 1e-9
        assert rep.cond_entropy - rep.zeta_within - 1e-12 <= rep.rho
        assert rep.rho <= rep.cond_entropy + 1e-12 <= rep.entropy + 2e-12
        if rep.p == 1:
            assert rep.entropy - rep.zeta - 1e-12 <= rep.rho <= rep.entropy + 1e-12
        assert rep.rho < rep.rho_u
        assert max(rep.rho_l, rep.rho_l_prime) <= rep.rho + 1e-12
        if rep.eff_lower is not None:
            assert rep.eff_lower <= rep.eff_lower_asymptotic * (1 + 1e-9)


def test_geometry_examples():
    ybar, rc2, phi = geometry(X7)
    assert ybar == pytest.approx(22 / 7, rel=1e-12)
    assert rc2 == pytest.approx(62 / 7, rel=1e-12)
    xi = power_ratios(X7)[0]
    assert xi == pytest.approx(1 / (2 * math.sin(phi) ** 2), rel=1e-12)
    # zero-sum host: covering radius equals the host norm
    x = np.array([-2, -1, 0, 1, 2])
    _, rc2, _ = geometry(x)
    assert rc2 == pytest.approx(float(x @ x), rel=1e-12)
    ybar, rc2, phi = geometry(np.array([3, 3, 3]))
    assert phi == 0.0 and rc2 == 0.0
    with pytest.raises(HostError):
        geometry(np.array([0, 0]))


def test_chebyshev_examples():
    assert chebyshev_bound(1.0, 101) == pytest.approx(0.01, rel=1e-12)
    assert chebyshev_bound(0.1, 10**4 + 1) == pytest.approx(0.01, rel=1e-12)
    with pytest.raises(ValueError):
        chebyshev_bound(1.0, 1)
    with pytest.raises(ValueError):
        chebyshev_bound(0.0, 10)
    # the hard cap makes the bound vacuous beyond gamma = 1
    x = np.array([5, 1, 1, 2])
    assert max_watermark_power(x) <= 2 * avg_watermark_power(x)


def test_empirical_metrics_examples():
    x = np.array([0, 0, 1])
    em = empirical_metrics(x, x, rho_emp=0.0)
    assert em.nu_emp == 0.0 and em.eps_emp is None and em.xi_emp == math.inf
    em = empirical_metrics(x, np.array([0, 1, 0]), rho_emp=1 / 3)
    assert em.watermark_power == 2.0
    assert em.nu_emp == pytest.approx(2 / 3)
    assert em.xi_emp == pytest.approx(0.5)


def test_binary_hamming_closed_forms():
    for w, n in ((1, 4), (3, 10), (5, 10), (9, 10), (500, 1000)):
        x = np.repeat([0, 1], [n - w, w])
        omega = w / n
        assert avg_watermark_power(x) == pytest.approx(2 * w * (1 - omega), rel=1e-12)
        assert max_watermark_power(x) == pytest.approx(2 * min(w, n - w), rel=1e-12)
        xi, xi_star, xi_min = power_ratios(x)
        assert xi == pytest.approx(1 / (2 * (1 - omega)), rel=1e-12)
        assert xi_min == pytest.approx(0.5 * max(1.0, omega / (1 - omega)), rel=1e-12)
        assert xi_star == pytest.approx(1 / (2 * omega * (1 - omega)), rel=1e-12)
        nu = degree_of_host_change(x)
        assert nu == pytest.approx(omega / xi, rel=1e-12)
        assert nu == pytest.approx(1 / xi_star, rel=1e-12)


def test_single_draw_power_concentration():
    rng = np.random.default_rng(21)
    n = 10**4
    x = rng.integers(0, 64, size=n)
    hist = compute_histogram(x)
    wavg = avg_watermark_power(x)
    c = capacity_bits(hist)
    gamma = 0.1
    exceed = 0
    trials = 10**3
    for _ in range(trials):
        bits = rng.integers(0, 2, size=c, dtype=np.uint8)
        y = perm_encode(x, Message(bits))
        w2 = float((y - x) @ (y - x))
        if abs(w2 - wavg) >= gamma * wavg:
            exceed += 1
    assert exceed / trials <= chebyshev_bound(gamma, n)


def test_report_csv_row():
    from permstego.analysis import REPORT_COLUMNS, report_csv_row

    rep = compute_metrics(X7)
    row = report_csv_row(rep)
    assert len(row) == len(REPORT_COLUMNS)
    assert row[REPORT_COLUMNS.index("n")] == "7"
    # 12 significant digits
    assert row[REPORT_COLUMNS.index("avg_power")] == format(124 / 7, ".12g")
