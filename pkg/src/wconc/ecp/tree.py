"""Success probabilities read off the exact branch trees.

Each factor of the chain is obtained by enumerating the corresponding stage
on explicit state vectors and passing the produced resource on to the next
stage.  The result is an oracle for :mod:`wconc.ecp.closed_form` that shares
none of its algebra.
"""
from __future__ import annotations

from .closed_form import MAX_ROUNDS, ProbabilityTable, chain_totals
from .protocol import Fate, fate_probabilities, recycle_round, step1, step2
from .states import Resource, WParams, make_w_input


def _first_output(branches, fate):
    for b in branches:
        if b.fate is fate and b.probability > 0:
            return b.outputs
    return None


def exact_table(w: WParams, n_rounds: int = 1) -> ProbabilityTable:
    """Ideal-mode probability table from branch enumeration.

    Stops feeding later rounds once a stage produces no recyclable output;
    the remaining rounds then contribute zero.
    """
    if not 1 <= n_rounds <= MAX_ROUNDS:
        raise ValueError(f"n_rounds must be in [1, {MAX_ROUNDS}]")
    source = Resource(make_w_input(w))
    b1 = step1(source, source)
    f1 = fate_probabilities(b1)
    p1o, p1e = f1[Fate.THREE_PHOTON], f1[Fate.TWO_PHOTON]
    three = _first_output(b1, Fate.THREE_PHOTON)
    two = _first_output(b1, Fate.TWO_PHOTON)
    if three is None or two is None:
        p1o_p, p1e_p, carry = 0.0, 0.0, None
    else:
        b2 = step2(three[0], two[0])
        f2 = fate_probabilities(b2)
        p1o_p, p1e_p = f2[Fate.W_STATE], f2[Fate.THREE_PHOTON]
        carry = _first_output(b2, Fate.THREE_PHOTON)
    per_round = []
    for _ in range(2, n_rounds + 1):
        if carry is None:
            per_round.append((0.0, 0.0))
            continue
        br = recycle_round(carry[0], carry[0])
        fr = fate_probabilities(br)
        per_round.append((fr[Fate.W_STATE], fr[Fate.THREE_PHOTON]))
        carry = _first_output(br, Fate.THREE_PHOTON)
    xi = min(p1o, p1e)
    totals = chain_totals(xi, p1o_p, p1e_p, per_round)
    return ProbabilityTable(p1o, p1e, p1o_p, p1e_p, tuple(per_round), totals[-1], xi, totals)
