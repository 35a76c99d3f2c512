"""Sweeps, CSV output and oracle cross-checks behind the command-line tool."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, TextIO

import numpy as np

from .cavity import CavityParams
from .ecp.closed_form import balanced_alpha, closed_form
from .ecp.ensemble import chain_estimate, run_ensemble
from .ecp.states import WParams, random_wparams
from .ecp.tree import exact_table
from .pcg import gate_metrics

FIG5_GRID = (0.01, 0.66, 0.01)
FIG6_G_GRID = (0.5, 3.0, 0.05)
FIG6_KS_GRID = (0.0, 1.0, 0.02)
EXACT_TOL = 1e-8
MC_SIGMAS = 5.0
MIN_TRAJECTORIES = 10_000


def float_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid lo, lo + step, ... <= hi, rounded to 12 decimals."""
    if not step > 0:
        raise ValueError(f"grid step must be > 0, got {step}")
    if hi < lo:
        raise ValueError(f"empty grid: max {hi} < min {lo}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def write_csv(out: TextIO, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


# -- fig5 -------------------------------------------------------------------

def fig5_header(n_rounds: int = 3) -> List[str]:
    return ["beta_sq", "alpha_sq", "gamma_sq"] + [f"p_total_n{n}" for n in range(1, n_rounds + 1)] + ["feasible"]


def fig5_rows(beta_sq: Sequence[float], n_rounds: int = 3) -> List[list]:
    """Balanced-parameter totals per grid point.

    Infeasible points are kept as rows of NaN with ``feasible`` = 0.
    """
    rows = []
    for b in beta_sq:
        try:
            w = balanced_alpha(b)
        except ValueError:
            rows.append([b] + [float("nan")] * (2 + n_rounds) + [0])
            continue
        a2, b2, c2 = w.weights
        rows.append([b, a2, c2, *closed_form(w, n_rounds).totals, 1])
    return rows


# -- fig6 -------------------------------------------------------------------

FIG6_HEADER = ["g_over_ks_plus_k", "ks_over_k", "fidelity_even", "fidelity_odd", "efficiency"]


def fig6_rows(g_grid: Sequence[float], ks_grid: Sequence[float], qd_gamma: float = 0.1,
              detuning: float = 0.5, full_complex: bool = False) -> List[list]:
    rows = []
    for g in g_grid:
        for ks in ks_grid:
            m = gate_metrics(CavityParams.from_ratios(g, ks, qd_gamma, detuning), full_complex)
            rows.append([g, ks, m.fidelity_even, m.fidelity_odd, m.efficiency])
    return rows


def metrics_report(params: CavityParams, full_complex: bool = False) -> str:
    m = gate_metrics(params, full_complex)
    return (f"F_even = {m.fidelity_even:.6f}\n"
            f"F_odd  = {m.fidelity_odd:.6f}\n"
            f"eta    = {m.efficiency:.6f}\n")


# -- run --------------------------------------------------------------------

LEDGER_HEADER = ["round", "consumed", "successes", "recycled3", "recycled2", "discarded",
                 "losses", "empirical_p", "unpaired3", "unpaired2"]


def ledger_rows(ledgers) -> List[list]:
    return [[l.round_index, l.consumed, l.successes, l.recycled_three_photon, l.recycled_two_photon,
             l.discarded, l.losses, l.empirical_p, l.unpaired_three_photon, l.unpaired_two_photon]
            for l in ledgers]


# -- compare ----------------------------------------------------------------

FACTORS = ("p1o", "p1e", "p1o_prime", "p1e_prime")


@dataclass
class Comparison:
    w: WParams
    names: List[str]
    closed: List[float]
    exact: List[float]
    sampled: List[float]
    sigma: List[float]
    exact_dev: float
    mc_z: float

    def passed(self) -> bool:
        return self.exact_dev <= EXACT_TOL and self.mc_z <= MC_SIGMAS


def _table_values(t, n_rounds):
    vals = [t.p1o, t.p1e, t.p1o_prime, t.p1e_prime]
    for p_no, p_ne in t.per_round:
        vals += [p_no, p_ne]
    return vals + list(t.totals)


def _names(n_rounds):
    names = list(FACTORS)
    for n in range(2, n_rounds + 1):
        names += [f"p{n}o", f"p{n}e"]
    return names + [f"total_n{n}" for n in range(1, n_rounds + 1)]


def compare_one(w: WParams, n_rounds: int, n_trajectories: int, seed: int) -> Comparison:
    """Closed form, exact enumeration and Monte Carlo for one parameter triple.

    Each sampled factor is a ratio of counts and gets a binomial sigma from
    its own denominator; the sampled totals are rebuilt from those factors
    and shown without a sigma.
    """
    closed = _table_values(closed_form(w, n_rounds), n_rounds)
    exact = _table_values(exact_table(w, n_rounds), n_rounds)
    ledgers = run_ensemble(w, n_trajectories, n_rounds, seed=seed)
    first = ledgers[0]
    e = first.empirical_probabilities
    n3 = e["p1o"] * first.consumed
    attempts = n3 - first.unpaired_three_photon
    sampled = [e["p1o"], e["p1e"], e["p1o_prime"], e["p1e_prime"]]
    dens = [first.consumed, first.consumed, attempts, attempts]
    for led in ledgers[1:]:
        sampled += [led.empirical_probabilities["p_no"], led.empirical_probabilities["p_ne"]]
        dens += [led.consumed, led.consumed]
    n_factors = len(sampled)
    sigma = []
    z = 0.0
    for p_hat, p, n in zip(sampled, closed[:n_factors], dens):
        if n == 0:
            sigma.append(float("nan"))
            continue
        s = math.sqrt(p * (1 - p) / n)
        sigma.append(s)
        dev = abs(p_hat - p)
        if s > 0:
            z = max(z, dev / s)
        elif dev > 1e-12:
            z = math.inf
    sampled += chain_estimate(ledgers)
    sigma += [float("nan")] * n_rounds
    exact_dev = max(abs(a - b) for a, b in zip(exact, closed))
    return Comparison(w, _names(n_rounds), closed, exact, sampled, sigma, exact_dev, z)


def compare_triples(k: int, seed: int, n_rounds: int, n_trajectories: int,
                    extra: Optional[Sequence[WParams]] = None) -> List[Comparison]:
    if n_trajectories < MIN_TRAJECTORIES:
        raise ValueError(f"compare needs at least {MIN_TRAJECTORIES} trajectories")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    triples = list(extra or []) + [random_wparams(rng) for _ in range(k)]
    return [compare_one(w, n_rounds, n_trajectories, seed + 1 + i) for i, w in enumerate(triples)]


def compare_report(results: Sequence[Comparison]) -> str:
    lines = []
    for i, c in enumerate(results):
        a2, b2, c2 = c.w.weights
        lines.append(f"triple {i}: |alpha|^2={a2:.6f} |beta|^2={b2:.6f} |gamma|^2={c2:.6f}")
        lines.append(f"  {'quantity':<10} {'closed':>14} {'exact':>14} {'monte_carlo':>14} {'sigma':>10}")
        for name, cf, ex, mc, s in zip(c.names, c.closed, c.exact, c.sampled, c.sigma):
            lines.append(f"  {name:<10} {cf:>14.10f} {ex:>14.10f} {mc:>14.10f} {s:>10.2e}")
        status = "ok" if c.passed() else "FAIL"
        lines.append(f"  max |exact - closed| = {c.exact_dev:.3e}  max MC z = {c.mc_z:.2f}  {status}")
    worst_exact = max(c.exact_dev for c in results)
    worst_z = max(c.mc_z for c in results)
    lines.append(f"overall: max |exact - closed| = {worst_exact:.3e} (tol {EXACT_TOL:g}), "
                 f"max MC z = {worst_z:.2f} (limit {MC_SIGMAS:g})")
    return "\n".join(lines) + "\n"


def compare_rows(results: Sequence[Comparison]) -> List[list]:
    rows = []
    for i, c in enumerate(results):
        for name, cf, ex, mc, s in zip(c.names, c.closed, c.exact, c.sampled, c.sigma):
            rows.append([i, name, cf, ex, mc, s])
    return rows


COMPARE_HEADER = ["triple", "quantity", "closed_form", "exact", "monte_carlo", "sigma"]
