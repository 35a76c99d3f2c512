"""Closed-form success probabilities of the concentration protocol.

Every expression depends on the moduli only.  Later rounds are evaluated
through the ratio t = (|gamma|/|beta|)**(2**n), which keeps the homogeneous
round probabilities finite for any number of rounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

from .states import WParams

MAX_ROUNDS = 30


@dataclass(frozen=True)
class ProbabilityTable:
    p1o: float
    p1e: float
    p1o_prime: float
    p1e_prime: float
    per_round: Tuple[Tuple[float, float], ...]  # (p_no, p_ne) for n = 2..N
    total: float
    xi: float
    totals: Tuple[float, ...] = field(default=())  # cumulative total after 1..N rounds

    @property
    def n_rounds(self) -> int:
        return len(self.per_round) + 1


def step1_probabilities(b2: float, c2: float, a2: float) -> Tuple[float, float]:
    """(P_1o, P_1e) from squared moduli."""
    return a2 * (c2 + 2 * b2), (c2 + b2) ** 2


def step2_probabilities(b2: float, c2: float) -> Tuple[float, float]:
    """(P'_1o, P'_1e); both zero-weight inputs give (0, 1) by convention."""
    denom = (c2 + 2 * b2) * (c2 + b2)
    if denom == 0:
        return 0.0, 1.0
    return 3 * c2 * b2 / denom, (c2 * c2 + 2 * b2 * b2) / denom


def round_probabilities(beta_abs: float, gamma_abs: float, n: int) -> Tuple[float, float]:
    """(P_no, P_ne) for round ``n`` >= 2 with x = |beta|^(2^n), y = |gamma|^(2^n).

    P_no = 3xy / (2x + y)^2 and P_ne = (2x^2 + y^2) / (2x + y)^2.
    """
    if n < 2:
        raise ValueError("round formulas start at n = 2")
    if beta_abs == 0 and gamma_abs == 0:
        return 0.0, 0.0
    if beta_abs == 0:
        return 0.0, 1.0
    if gamma_abs == 0:
        return 0.0, 0.5
    log_t = 2 ** n * (math.log(gamma_abs) - math.log(beta_abs))
    if log_t > 0:
        s = math.exp(-log_t)  # x / y
        d = (2 * s + 1) ** 2
        return 3 * s / d, (2 * s * s + 1) / d
    t = math.exp(log_t)  # y / x
    d = (2 + t) ** 2
    return 3 * t / d, (2 + t * t) / d


def chain_totals(xi: float, p1o_prime: float, p1e_prime: float,
                 per_round: List[Tuple[float, float]]) -> Tuple[float, ...]:
    """Cumulative xi P'_1o + xi P'_1e P_2o + xi P'_1e P_2e P_3o + ... after each round."""
    totals = [xi * p1o_prime]
    carry = xi * p1e_prime
    for p_no, p_ne in per_round:
        totals.append(totals[-1] + carry * p_no)
        carry *= p_ne
    return tuple(totals)


def closed_form(w: WParams, n_rounds: int = 1) -> ProbabilityTable:
    if not 1 <= n_rounds <= MAX_ROUNDS:
        raise ValueError(
            f"n_rounds must be in [1, {MAX_ROUNDS}]; later rounds add less than the float "
            f"resolution of the total, truncate at {MAX_ROUNDS}"
        )
    a2, b2, c2 = w.weights
    p1o, p1e = step1_probabilities(b2, c2, a2)
    p1o_p, p1e_p = step2_probabilities(b2, c2)
    xi = min(p1o, p1e)
    per_round = [round_probabilities(abs(w.beta), abs(w.gamma), n) for n in range(2, n_rounds + 1)]
    totals = chain_totals(xi, p1o_p, p1e_p, per_round)
    return ProbabilityTable(p1o, p1e, p1o_p, p1e_p, tuple(per_round), totals[-1], xi, totals)


def balanced_alpha(beta_sq: float) -> WParams:
    """Real coefficients with the given |beta|^2 and P_1o = P_1e.

    With s = |beta|^2 + |gamma|^2 the balance condition reads
    2 s^2 + (b - 1) s - b = 0; the positive root is taken.
    """
    b = float(beta_sq)
    if not 0 < b <= 2 / 3 + 1e-15:
        raise ValueError(f"beta^2 = {b} is infeasible; need 0 < beta^2 <= 2/3")
    s = ((1 - b) + math.sqrt(b * b + 6 * b + 1)) / 4
    gamma_sq = max(s - b, 0.0)
    alpha_sq = 1 - s
    total = alpha_sq + b + gamma_sq
    return WParams(math.sqrt(alpha_sq / total), math.sqrt(b / total), math.sqrt(gamma_sq / total))
