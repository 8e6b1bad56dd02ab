"""Theoretical distortion/rate quantities and empirical measurements.

Every theoretical quantity reduces to histogram computations, which is what
makes blind partition selection possible: any rearrangement of a host
produces the exact same numbers.  Partitioned quantities follow the
per-partition sums; the rate-distortion bounds keep the global (q, n)
correction term, which remains valid for support-induced partitionings.

Double precision throughout with a 1e-9 relative self-consistency budget;
exact rational ground truth lives in permstego.oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .host import (
    Histogram,
    HostSequence,
    HostError,
    as_samples,
    capacity_bits,
    compute_histogram,
    entropy_bits,
    log_multinomial,
)
from .partition import IndexPartitioning, SupportPartitioning

_TWO_PI_E = 2.0 * math.pi * math.e
RELTOL = 1e-9


def _as_histogram(x) -> tuple[Histogram, int | None]:
    if isinstance(x, Histogram):
        return x, None
    if isinstance(x, HostSequence):
        return x.histogram(), x.value_bits
    return compute_histogram(x), HostSequence(as_samples(x)).value_bits


def _subhistograms(x, part) -> tuple[Histogram, list[tuple[np.ndarray, np.ndarray]], int | None]:
    """Global histogram, per-partition (values, counts) pairs, requested p."""
    hist, _ = _as_histogram(x)
    if part is None:
        return hist, [(hist.values, hist.counts)], None
    if isinstance(part, SupportPartitioning):
        if part.q != hist.q:
            raise ValueError("partitioning does not match the host support")
        return hist, [(hist.values[g], hist.counts[g]) for g in part.groups], part.requested_p
    if isinstance(part, IndexPartitioning):
        samples = as_samples(x)
        subs = []
        for u in part.index_vectors:
            sh = compute_histogram(samples[u])
            subs.append((sh.values, sh.counts))
        req = part.support_groups.requested_p if part.support_groups is not None else None
        return hist, subs, req
    raise ValueError("part must be a SupportPartitioning or IndexPartitioning")


def _avg_power_of(subs) -> float:
    total = 0.0
    for v, h in subs:
        vf = v.astype(np.float64)
        hf = h.astype(np.float64)
        nj = hf.sum()
        s1 = float(hf @ vf)
        total += 2.0 * (float(hf @ (vf * vf)) - s1 * s1 / nj)
    return total


def _max_power_of(subs) -> float:
    total = 0.0
    for v, h in subs:
        rep = np.repeat(v.astype(np.float64), h)
        total += 2.0 * (float(rep @ rep) - float(rep @ rep[::-1]))
    return total


def _nu_of(subs, n: int) -> float:
    total = 0.0
    for _, h in subs:
        hf = h.astype(np.float64)
        nj = hf.sum()
        total += (nj / n) * (1.0 - float(hf @ hf) / (nj * nj))
    return total


def _host_power_of(hist: Histogram) -> float:
    vf = hist.values.astype(np.float64)
    return float(hist.counts.astype(np.float64) @ (vf * vf))


def avg_watermark_power(x, part=None) -> float:
    """Mean squared-Euclidean embedding distortion over uniform messages:
    2 (||x||^2 - sum_j (x_j^t 1)^2 / n_j)."""
    _, subs, _ = _subhistograms(x, part)
    return _avg_power_of(subs)


def max_watermark_power(x, part=None) -> float:
    """Worst-case single-message distortion 2 (||x||^2 - sum_j asc_j . desc_j)."""
    _, subs, _ = _subhistograms(x, part)
    return _max_power_of(subs)


def host_power(x) -> float:
    hist, _ = _as_histogram(x)
    return _host_power_of(hist)


def degree_of_host_change(x, part=None) -> float:
    """Expected fraction of changed positions: sum_j (n_j/n)(1 - ||p_j||^2)."""
    hist, subs, _ = _subhistograms(x, part)
    return _nu_of(subs, hist.n)


def power_ratios(x, part=None, value_bits: int | None = None) -> tuple[float, float | None, float]:
    """Host-to-watermark power ratios (xi_bar, xi_star, xi_min); a vanishing
    watermark power maps to +inf.  xi_star needs a nominal bit depth."""
    hist, subs, _ = _subhistograms(x, part)
    if value_bits is None:
        value_bits = _as_histogram(x)[1]
    px = _host_power_of(hist)
    if px == 0.0:
        raise HostError("power ratios need a nonzero host")
    wavg = _avg_power_of(subs)
    wmax = _max_power_of(subs)
    xi_bar = px / wavg if wavg > 0 else math.inf
    xi_min = px / wmax if wmax > 0 else math.inf
    xi_star = None
    if value_bits is not None:
        peak = float(hist.n) * float((1 << value_bits) - 1) ** 2
        xi_star = peak / wavg if wavg > 0 else math.inf
    return xi_bar, xi_star, xi_min


def _rate_terms(subs) -> tuple[float, float, float, bool, int | None]:
    """(n*rho, n*rho_emp, n*H(X|U), all_exact, exact r or None)."""
    log_r = 0.0
    cap = 0.0
    cond_h = 0.0
    all_exact = True
    r_exact = 1
    for v, h in subs:
        lc = log_multinomial(h)
        log_r += lc.value
        cap += capacity_bits(h)
        nj = float(h.sum())
        p = h / nj
        cond_h += nj * float(-(p * np.log2(p)).sum())
        if lc.exact:
            r_exact *= lc.count
        else:
            all_exact = False
    return log_r, cap, cond_h, all_exact, (r_exact if all_exact else None)


def zeta_term(q: int, n: int) -> float:
    """Finite-n entropy defect (q/n) log2(n+1)."""
    return (q / n) * math.log2(n + 1)


def rho_upper_bound(avg_power_per_element: float) -> float:
    """Djackov-Massey-Willems bound on the rate from the per-element power."""
    return 0.5 * math.log2(_TWO_PI_E * (avg_power_per_element / 2.0 + 1.0 / 12.0))


def rate_and_bounds(x, part=None) -> dict:
    """Embedding rate, entropy brackets, and all rate/nu bounds."""
    hist, subs, _ = _subhistograms(x, part)
    n = hist.n
    log_r, cap_bits, cond_h_n, _, _ = _rate_terms(subs)
    wavg = _avg_power_of(subs)
    nu = _nu_of(subs, n)
    zeta = zeta_term(hist.q, n)
    rho_u = rho_upper_bound(wavg / n)
    tau = (2.0 ** zeta) * math.sqrt(_TWO_PI_E * (wavg / (2.0 * n) + 1.0 / 12.0))
    return {
        "rho": log_r / n,
        "rho_emp": cap_bits / n,
        "entropy": entropy_bits(hist),
        "cond_entropy": cond_h_n / n,
        "zeta": zeta,
        "zeta_within": sum(len(v) * math.log2(float(h.sum()) + 1.0) for v, h in subs) / n,
        "rho_u": rho_u,
        "rho_l": max(0.0, -math.log2(1.0 - nu) - zeta),
        "rho_l_prime": max(0.0, 2.0 * nu - zeta),
        "nu_ub_tau": 1.0 - 1.0 / tau,
        "nu_ub_log_tau": 0.5 * math.log2(tau),
        "nu_ub_power": wavg / n,
    }


def efficiency_bounds(x, part=None) -> tuple[float | None, float | None]:
    """(eps_l, asymptotic eps_l'): ((r-1)/r)^2 rho/nu and H(X|U)/nu.

    None when r = 1; there is no host change to measure efficiency against.
    """
    hist, subs, _ = _subhistograms(x, part)
    n = hist.n
    log_r, _, cond_h_n, all_exact, r_exact = _rate_terms(subs)
    nu = _nu_of(subs, n)
    if log_r == 0.0 or nu == 0.0:
        return None, None
    if all_exact:
        frac = (r_exact - 1) / r_exact
    elif log_r < 64.0:
        frac = 1.0 - 2.0 ** (-log_r)
    else:
        frac = 1.0
    return frac * frac * (log_r / n) / nu, (cond_h_n / n) / nu


def geometry(x) -> tuple[float, float, float]:
    """Covering-sphere data (ybar, R_c^2, phi) of the unpartitioned code."""
    hist, _ = _as_histogram(x)
    px = _host_power_of(hist)
    if px == 0.0:
        raise HostError("geometry needs a nonzero host")
    n = float(hist.n)
    s1 = float(hist.counts.astype(np.float64) @ hist.values.astype(np.float64))
    rc2 = 0.5 * _avg_power_of([(hist.values, hist.counts)])
    cosphi = min(1.0, max(-1.0, s1 / (math.sqrt(px) * math.sqrt(n))))
    return s1 / n, rc2, math.acos(cosphi)


def chebyshev_bound(gamma: float, n: int) -> float:
    """P{| ||W||^2 - mean | >= gamma * mean} <= 1/(gamma^2 (n-1)), any host."""
    if n < 2:
        raise ValueError("Chebyshev bound needs n >= 2")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return 1.0 / (gamma * gamma * (n - 1))


@dataclass
class EmpiricalMetrics:
    xi_emp: float
    xi_star_emp: float | None
    nu_emp: float
    eps_emp: float | None
    watermark_power: float


def empirical_metrics(x, y, rho_emp: float, value_bits: int | None = None) -> EmpiricalMetrics:
    """Single-draw measurements from an actual (host, stego) pair."""
    xs = as_samples(x)
    ys = as_samples(y)
    if len(xs) != len(ys):
        raise ValueError("host and stego must have the same length")
    if value_bits is None:
        value_bits = HostSequence(xs).value_bits
    w = (ys - xs).astype(np.float64)
    w2 = float(w @ w)
    px = float(xs.astype(np.float64) @ xs.astype(np.float64))
    n = len(xs)
    nu = float(np.count_nonzero(ys != xs)) / n
    xi_star = None
    if value_bits is not None:
        xi_star = (n * float((1 << value_bits) - 1) ** 2 / w2) if w2 > 0 else math.inf
    return EmpiricalMetrics(
        xi_emp=px / w2 if w2 > 0 else math.inf,
        xi_star_emp=xi_star,
        nu_emp=nu,
        eps_emp=(rho_emp / nu) if nu > 0 else None,
        watermark_power=w2,
    )


def to_db(value: float | None) -> float | None:
    if value is None:
        return None
    if value == 0:
        return -math.inf
    return 10.0 * math.log10(value)


@dataclass
class MetricsReport:
    """All theoretical quantities for one (host, partitioning) pair."""

    n: int
    q: int
    p: int
    requested_p: int | None
    value_bits: int | None
    host_power: float
    avg_power: float
    avg_power_per_element: float
    max_power: float
    xi_bar: float
    xi_star: float | None
    xi_min: float
    nu_bar: float
    rho: float
    rho_emp: float
    entropy: float
    cond_entropy: float
    zeta: float
    zeta_within: float
    rho_u: float
    rho_l: float
    rho_l_prime: float
    nu_ub_tau: float
    nu_ub_log_tau: float
    nu_ub_power: float
    eff_lower: float | None
    eff_lower_asymptotic: float | None
    ybar: float | None
    covering_radius_sq: float | None
    angle: float | None
    avg_power_unpartitioned: float = 0.0
    part_lengths: list = field(default_factory=list, repr=False)
    part_support_sizes: list = field(default_factory=list, repr=False)

    @property
    def xi_bar_db(self) -> float:
        return to_db(self.xi_bar)

    @property
    def xi_star_db(self) -> float | None:
        return to_db(self.xi_star)

    @property
    def xi_min_db(self) -> float:
        return to_db(self.xi_min)

    def chebyshev(self, gamma: float) -> float:
        return chebyshev_bound(gamma, self.n)

    def validate(self, reltol: float = RELTOL) -> None:
        """Check the paper's invariant chains; raises ValueError on violation."""
        bad = []

        def ck(cond, label):
            if not cond:
                bad.append(label)

        tol = 1.0 + reltol
        ck(self.avg_power <= self.max_power * tol + 1e-300, "avg <= max power")
        ck(self.max_power <= 2.0 * self.avg_power * tol + 1e-300, "max <= 2 avg power")
        ck(self.max_power <= 4.0 * self.host_power * tol + 1e-300, "max <= 4 host power")
        if math.isfinite(self.xi_bar):
            ck(self.xi_bar >= 0.5 / tol, "xi_bar >= 1/2")
            ck(self.xi_min >= self.xi_bar / 2.0 / tol, "xi_min >= xi_bar/2")
            ck(self.xi_bar >= self.xi_min / tol, "xi_bar >= xi_min")
            if self.xi_star is not None and math.isfinite(self.xi_star):
                ck(self.xi_star >= self.xi_bar / tol, "xi_star >= xi_bar")
        ck(-1e-12 <= self.nu_bar <= (1.0 - 1.0 / self.q) * tol + 1e-12, "nu range")
        ck(self.nu_bar <= self.nu_ub_power * tol + 1e-12, "nu <= power per element")
        ck(self.nu_bar <= self.nu_ub_tau * tol + 1e-9, "nu < 1 - 1/tau")
        ck(self.nu_bar <= self.nu_ub_log_tau * tol + 1e-9, "nu < log2(tau)/2")
        ck(self.rho <= self.cond_entropy * tol + 1e-12, "rho <= H(X|U)")
        ck(self.cond_entropy <= self.entropy * tol + 1e-12, "H(X|U) <= H")
        ck(
            self.rho >= (self.cond_entropy - self.zeta_within) / tol - 1e-12,
            "rho >= H(X|U) - zeta_within",
        )
        ck(self.rho < self.rho_u * tol + 1e-12, "rho < rho_u")
        ck(self.rho_l <= self.rho * tol + 1e-12, "rho_l <= rho")
        ck(self.rho_l_prime <= self.rho * tol + 1e-12, "rho_l' <= rho")
        ck(self.rho_emp <= self.rho * tol + 1e-12, "rho_emp <= rho")
        if self.covering_radius_sq is not None:
            ck(
                abs(self.covering_radius_sq - 0.5 * self.avg_power_unpartitioned)
                <= reltol * max(1.0, self.avg_power_unpartitioned),
                "Rc^2 = unpartitioned avg power / 2",
            )
        if self.angle is not None and self.p == 1 and math.isfinite(self.xi_bar):
            s = math.sin(self.angle)
            if s > 0:
                ck(
                    abs(self.xi_bar - 1.0 / (2.0 * s * s)) <= 1e-12 * self.xi_bar,
                    "xi_bar from angle",
                )
        if bad:
            raise ValueError("metric invariants violated: " + ", ".join(bad))


def compute_metrics(x, part=None, value_bits: int | None = None) -> MetricsReport:
    """Full MetricsReport for a host (or histogram) and optional partitioning."""
    hist, inferred_bits = _as_histogram(x)
    if value_bits is None:
        value_bits = inferred_bits
    _, subs, requested = _subhistograms(x, part)
    n = hist.n
    avg = _avg_power_of(subs)
    mx = _max_power_of(subs)
    px = _host_power_of(hist)
    nu = _nu_of(subs, n)
    log_r, cap_bits, cond_h_n, all_exact, r_exact = _rate_terms(subs)
    zeta = zeta_term(hist.q, n)
    zeta_within = sum(len(v) * math.log2(float(h.sum()) + 1.0) for v, h in subs) / n
    rho = log_r / n
    rho_u = rho_upper_bound(avg / n)
    tau = (2.0 ** zeta) * math.sqrt(_TWO_PI_E * (avg / (2.0 * n) + 1.0 / 12.0))
    if log_r == 0.0 or nu == 0.0:
        eff_l = eff_asym = None
    else:
        if all_exact:
            frac = (r_exact - 1) / r_exact
        elif log_r < 64.0:
            frac = 1.0 - 2.0 ** (-log_r)
        else:
            frac = 1.0
        eff_l = frac * frac * rho / nu
        eff_asym = (cond_h_n / n) / nu
    avg_unpart = _avg_power_of([(hist.values, hist.counts)])
    if px > 0:
        s1 = float(hist.counts.astype(np.float64) @ hist.values.astype(np.float64))
        ybar = s1 / n
        rc2 = 0.5 * avg_unpart
        phi = math.acos(min(1.0, max(-1.0, s1 / (math.sqrt(px) * math.sqrt(n)))))
    else:
        ybar = rc2 = phi = None
    xi_bar = px / avg if avg > 0 else math.inf
    xi_min = px / mx if mx > 0 else math.inf
    xi_star = None
    if value_bits is not None:
        peak = float(n) * float((1 << value_bits) - 1) ** 2
        xi_star = peak / avg if avg > 0 else math.inf
    return MetricsReport(
        n=n,
        q=hist.q,
        p=len(subs),
        requested_p=requested,
        value_bits=value_bits,
        host_power=px,
        avg_power=avg,
        avg_power_per_element=avg / n,
        max_power=mx,
        xi_bar=xi_bar,
        xi_star=xi_star,
        xi_min=xi_min,
        nu_bar=nu,
        rho=rho,
        rho_emp=cap_bits / n,
        entropy=entropy_bits(hist),
        cond_entropy=cond_h_n / n,
        zeta=zeta,
        zeta_within=zeta_within,
        rho_u=rho_u,
        rho_l=max(0.0, -math.log2(1.0 - nu) - zeta),
        rho_l_prime=max(0.0, 2.0 * nu - zeta),
        nu_ub_tau=1.0 - 1.0 / tau,
        nu_ub_log_tau=0.5 * math.log2(tau),
        nu_ub_power=avg / n,
        eff_lower=eff_l,
        eff_lower_asymptotic=eff_asym,
        ybar=ybar,
        covering_radius_sq=rc2,
        angle=phi,
        avg_power_unpartitioned=avg_unpart,
        part_lengths=[int(h.sum()) for _, h in subs],
        part_support_sizes=[len(v) for v, _ in subs],
    )


# Canonical flat CSV column order for a MetricsReport row (republished in
# the CLI docstring).
REPORT_COLUMNS = [
    "n", "q", "p", "requested_p", "value_bits",
    "host_power", "avg_power", "avg_power_per_element", "max_power",
    "xi_bar", "xi_bar_db", "xi_star", "xi_star_db", "xi_min", "xi_min_db",
    "nu_bar", "rho", "rho_emp", "entropy", "cond_entropy", "zeta", "zeta_within",
    "rho_u", "rho_l", "rho_l_prime",
    "nu_ub_tau", "nu_ub_log_tau", "nu_ub_power",
    "eff_lower", "eff_lower_asymptotic",
    "ybar", "covering_radius_sq", "angle",
]


def format_value(v) -> str:
    """CSV cell: 12 significant digits, '.' decimal point, empty for N/A."""
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def report_csv_row(report: MetricsReport) -> list[str]:
    return [format_value(getattr(report, col)) for col in REPORT_COLUMNS]
