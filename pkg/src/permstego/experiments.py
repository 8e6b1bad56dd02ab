"""Reproducible experiment sweeps: binary-host rate/distortion curves,
the partitioned Gaussian-host sweep, and the static-pairing row.

Every sweep is driven by one master seed: SeedSequence(seed) spawns one
child for the host draw and one per grid point for the message draw, so
rows are reproducible independently of execution order.  Gaussian hosts
use inverse-CDF sampling (PCG64 uniforms through NormalDist.inv_cdf),
rounded to nearest integer and clamped to [0, 255].
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .host import HostSequence, Message, capacity_bits, compute_histogram
from .partition import lsb_pairing, support_induced, uniform_support_sequence, partitioned_encode, partitioned_decode
from .coder import perm_encode, perm_decode
from .analysis import compute_metrics, empirical_metrics, format_value, to_db

FIG2_COLUMNS = [
    "omega", "rho_theory", "rho_emp", "xi_bar", "xi_emp", "xi_min",
    "rho_u", "rho_l_prime", "eff_lower", "eps_emp",
]

FIG3_COLUMNS = [
    "p", "rho_theory", "rho_emp", "rho_u", "rho_l", "rho_l_prime",
    "xi_bar_db", "xi_emp_db", "xi_star_db", "xi_min_db",
    "eff_lower", "eps_emp", "nu_bar", "nu_emp", "avg_power_per_element", "p_effective",
]

DEFAULT_FIG2_GRID = [round(0.05 * k, 2) for k in range(1, 20)]


@dataclass
class ExperimentConfig:
    """One reproducible sweep: the seed fixes the host and message draws."""

    experiment: str  # fig2 | fig3 | lsb
    n: int = 10**6
    seed: int = 0
    grid: list | None = None
    out_path: str | None = None
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.experiment not in ("fig2", "fig3", "lsb"):
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.n < 2:
            raise ValueError("experiments need n >= 2")
        if self.grid is not None and len(self.grid) == 0:
            raise ValueError("sweep grid must be nonempty")


def binary_host(n: int, omega: float, rng: np.random.Generator) -> np.ndarray:
    """Binary host with exactly round(omega * n) ones, randomly placed."""
    w = int(round(omega * n))
    x = np.zeros(n, dtype=np.int64)
    x[:w] = 1
    rng.shuffle(x)
    return x


def gaussian_host(n: int, seed_seq: np.random.SeedSequence, mean: float = 128.0, sd: float = 25.0) -> np.ndarray:
    """Quantized Gaussian host on {0..255} via inverse-CDF sampling."""
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    u = rng.random(n)
    inv = NormalDist(mean, sd).inv_cdf
    z = np.fromiter((inv(float(ui)) for ui in u), dtype=np.float64, count=n)
    return np.clip(np.rint(z), 0, 255).astype(np.int64)


def random_message_bits(c: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=c, dtype=np.uint8)


def _fig2_point(n: int, omega: float, seed_seq) -> dict:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    x = binary_host(n, omega, rng)
    host = HostSequence(x, value_bits=1)
    report = compute_metrics(host)
    report.validate()
    c = capacity_bits(compute_histogram(x))
    msg = Message(random_message_bits(c, rng))
    y = perm_encode(x, msg)
    back = perm_decode(y)
    if not np.array_equal(back.bits, msg.bits):
        raise AssertionError(f"round-trip failed at omega={omega}")
    if not np.array_equal(np.sort(y), np.sort(x)):
        raise AssertionError(f"histogram not preserved at omega={omega}")
    emp = empirical_metrics(x, y, report.rho_emp, value_bits=1)
    return {
        "omega": omega,
        "rho_theory": report.rho,
        "rho_emp": report.rho_emp,
        "xi_bar": report.xi_bar,
        "xi_emp": emp.xi_emp,
        "xi_min": report.xi_min,
        "rho_u": report.rho_u,
        "rho_l_prime": report.rho_l_prime,
        "eff_lower": report.eff_lower,
        "eps_emp": emp.eps_emp,
    }


def run_fig2(n: int = 10**6, grid=None, seed: int = 0, jobs: int = 1) -> list[dict]:
    """Unpartitioned coding on binary hosts across Hamming weights."""
    grid = list(grid) if grid is not None else list(DEFAULT_FIG2_GRID)
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(1 + len(grid))[1:]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda a: _fig2_point(n, *a), zip(grid, children)))
    else:
        rows = [_fig2_point(n, omega, child) for omega, child in zip(grid, children)]
    return rows


def _fig3_point(x, hist, p: int, seed_seq) -> dict:
    sp = uniform_support_sequence(hist.values, p)
    part = support_induced(sp, x)
    report = compute_metrics(hist, sp, value_bits=8)
    report.validate()
    c = sum(capacity_bits(hist.counts[g]) for g in sp.groups)
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    msg = Message(random_message_bits(c, rng))
    y = partitioned_encode(x, part, msg)
    back = partitioned_decode(y, support_induced(sp, y))
    if not np.array_equal(back.bits, msg.bits):
        raise AssertionError(f"round-trip failed at p={p}")
    if not np.array_equal(np.sort(y), np.sort(x)):
        raise AssertionError(f"histogram not preserved at p={p}")
    emp = empirical_metrics(x, y, report.rho_emp, value_bits=8)
    return {
        "p": p,
        "rho_theory": report.rho,
        "rho_emp": report.rho_emp,
        "rho_u": report.rho_u,
        "rho_l": report.rho_l,
        "rho_l_prime": report.rho_l_prime,
        "xi_bar_db": report.xi_bar_db,
        "xi_emp_db": to_db(emp.xi_emp),
        "xi_star_db": report.xi_star_db,
        "xi_min_db": report.xi_min_db,
        "eff_lower": report.eff_lower,
        "eps_emp": emp.eps_emp,
        "nu_bar": report.nu_bar,
        "nu_emp": emp.nu_emp,
        "avg_power_per_element": report.avg_power_per_element,
        "p_effective": report.p,
    }


def run_fig3(n: int = 10**6, seed: int = 0, grid=None, jobs: int = 1) -> list[dict]:
    """Partitioned coding on one quantized Gaussian host, sweeping the
    uniform support sequence.

    The sweep covers p = 1..q for the observed support size q (extreme
    8-bit bins draw no samples at this n, so q is slightly below 256).
    """
    ss = np.random.SeedSequence(seed)
    host_ss, *rest = ss.spawn(1 + 256)
    x = gaussian_host(n, host_ss)
    hist = compute_histogram(x)
    wanted = grid if grid is not None else range(1, hist.q + 1)
    ps = [int(p) for p in wanted if 1 <= int(p) <= hist.q]
    points = [(p, rest[p - 1]) for p in ps]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda a: _fig3_point(x, hist, *a), points))
    else:
        rows = [_fig3_point(x, hist, p, child) for p, child in points]
    return rows


def run_lsb(n: int = 10**6, seed: int = 0) -> list[dict]:
    """Static adjacent-bin pairing on the same host as the fig3 sweep."""
    ss = np.random.SeedSequence(seed)
    host_ss, *rest = ss.spawn(1 + 256)
    x = gaussian_host(n, host_ss)
    hist = compute_histogram(x)
    sp = lsb_pairing(hist.values)
    part = support_induced(sp, x)
    report = compute_metrics(hist, sp, value_bits=8)
    report.validate()
    c = sum(capacity_bits(hist.counts[g]) for g in sp.groups)
    rng = np.random.Generator(np.random.PCG64(rest[0]))
    msg = Message(random_message_bits(c, rng))
    y = partitioned_encode(x, part, msg)
    back = partitioned_decode(y, support_induced(sp, y))
    if not np.array_equal(back.bits, msg.bits):
        raise AssertionError("round-trip failed for the lsb pairing")
    emp = empirical_metrics(x, y, report.rho_emp, value_bits=8)
    return [{
        "p": sp.p,
        "rho_theory": report.rho,
        "rho_emp": report.rho_emp,
        "rho_u": report.rho_u,
        "rho_l": report.rho_l,
        "rho_l_prime": report.rho_l_prime,
        "xi_bar_db": report.xi_bar_db,
        "xi_emp_db": to_db(emp.xi_emp),
        "xi_star_db": report.xi_star_db,
        "xi_min_db": report.xi_min_db,
        "eff_lower": report.eff_lower,
        "eps_emp": emp.eps_emp,
        "nu_bar": report.nu_bar,
        "nu_emp": emp.nu_emp,
        "avg_power_per_element": report.avg_power_per_element,
        "p_effective": report.p,
    }]


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(row.get(col)) for col in columns))
    return "\n".join(lines) + "\n"


def run_experiment(cfg: ExperimentConfig) -> tuple[list[dict], list[str]]:
    if cfg.experiment == "fig2":
        return run_fig2(n=cfg.n, grid=cfg.grid, seed=cfg.seed, jobs=cfg.jobs), FIG2_COLUMNS
    if cfg.experiment == "fig3":
        return run_fig3(n=cfg.n, seed=cfg.seed, grid=cfg.grid, jobs=cfg.jobs), FIG3_COLUMNS
    return run_lsb(n=cfg.n, seed=cfg.seed), FIG3_COLUMNS
