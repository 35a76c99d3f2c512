"""Ensemble runs of the full protocol with per-round bookkeeping.

Round 1 consumes ``n_pairs`` pairs of input states.  Step 1 turns each pair
into a three-photon resource (odd path), a two-photon pair (even path), a
discard or a loss.  Step 2 then pairs one three-photon with one two-photon
resource per attempt; whichever type runs out first bounds the number of
attempts and the rest is reported as unpaired surplus.  Round n >= 2 pairs
the generation n-1 resources two at a time.

Ledger partition
----------------
Round 1 counts step-1 pairs.  An odd-path pair takes the fate of its
three-photon resource in step 2 (success, recycled3, loss, or discarded when
left unpaired); every even-path pair counts as recycled2.  Later rounds count
resource pairs directly.  ``empirical_p`` is successes / consumed, which
estimates the one-round total in round 1 and P_no afterwards.

Engines
-------
``"table"``
    Ideal mode only.  Every stage has a fixed branch table on the canonical
    generation forms, so fates are drawn in bulk with one uniform per
    trajectory and stage.
``"statevector"``
    Carries explicit states through :mod:`wconc.ecp.protocol`, with one
    generator per trajectory seeded from (seed, stage, index).  Works in
    lossy mode as well.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..cavity import IDEAL, InteractionMode
from ..pcg import select_branch
from ..statevec import StateVector
from .closed_form import MAX_ROUNDS
from .protocol import Fate, fate_probabilities, recycle_round, step1, step2
from .states import Resource, WParams, generation_form, make_w_input, two_photon_form

PAIRINGS = ("one", "both")
ENGINES = ("table", "statevector")
MAX_STATEVECTOR_ROUNDS = 5  # recycled generations up to 4

_STEP1_FATES = (Fate.THREE_PHOTON, Fate.TWO_PHOTON, Fate.DISCARDED, Fate.LOST)
_STEP2_FATES = (Fate.W_STATE, Fate.THREE_PHOTON, Fate.LOST)
_ROUND_FATES = (Fate.W_STATE, Fate.THREE_PHOTON, Fate.DISCARDED, Fate.LOST)


@dataclass
class RoundLedger:
    round_index: int
    consumed: float = 0
    successes: float = 0
    recycled_three_photon: float = 0
    recycled_two_photon: float = 0
    discarded: float = 0
    losses: float = 0
    unpaired_three_photon: float = 0
    unpaired_two_photon: float = 0
    empirical_probabilities: Dict[str, float] = field(default_factory=dict)

    @property
    def empirical_p(self) -> float:
        return self.successes / self.consumed if self.consumed else 0.0

    def partition_gap(self) -> float:
        """consumed minus the sum of the fate counts (zero by construction)."""
        return self.consumed - (self.successes + self.recycled_three_photon
                                + self.recycled_two_photon + self.discarded + self.losses)


@dataclass
class ResourcePool:
    """Resources waiting for a partner; states are kept by the statevector engine only."""

    generation: int
    three_photon_states: List[StateVector] = field(default_factory=list)
    two_photon_states: List[StateVector] = field(default_factory=list)
    n_three: int = 0
    n_two: int = 0


@dataclass
class EnsembleRun:
    ledgers: List[RoundLedger]
    pools: List[ResourcePool]
    w_outputs: List[StateVector]


def _ratio(num, den) -> float:
    return float(num) / float(den) if den else 0.0


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _validate(n_pairs, n_rounds, mode, pairing, engine):
    if n_pairs < 2:
        raise ValueError("n_pairs must be >= 2")
    if not 1 <= n_rounds <= MAX_ROUNDS:
        raise ValueError(f"n_rounds must be in [1, {MAX_ROUNDS}]")
    if pairing not in PAIRINGS:
        raise ValueError(f"pairing must be one of {PAIRINGS}")
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    if engine == "table" and not mode.is_ideal:
        raise ValueError("the table engine is exact only in ideal mode; use engine='statevector'")
    if engine == "statevector" and n_rounds > MAX_STATEVECTOR_ROUNDS:
        raise ValueError(f"the statevector engine runs at most {MAX_STATEVECTOR_ROUNDS} rounds")


# -- branch tables ------------------------------------------------------------

@dataclass(frozen=True)
class _Tables:
    step1: np.ndarray
    step2: np.ndarray
    rounds: Dict[int, np.ndarray]
    w_outputs: tuple


def _fate_vector(branches, fates) -> np.ndarray:
    probs = fate_probabilities(branches)
    return np.array([probs[f] for f in fates])


def _w_states(branches):
    return [b.outputs[0].state for b in branches if b.fate is Fate.W_STATE]


def _branch_tables(w: WParams, n_rounds: int) -> _Tables:
    src = Resource(make_w_input(w))
    b1 = step1(src, src)
    t1 = _fate_vector(b1, _STEP1_FATES)
    outputs = []
    if t1[0] > 0 and t1[1] > 0:
        b2 = step2(Resource(generation_form(w, 0)), Resource(two_photon_form(w.beta, w.gamma)))
        t2 = _fate_vector(b2, _STEP2_FATES)
        outputs += _w_states(b2)
    else:
        t2 = np.array([0.0, 1.0, 0.0])
    rounds = {}
    for n in range(2, n_rounds + 1):
        if abs(w.beta) == 0 and abs(w.gamma) == 0:
            rounds[n] = np.array([0.0, 0.0, 1.0, 0.0])
            continue
        res = Resource(generation_form(w, n - 1), n - 1)
        br = recycle_round(res, res)
        rounds[n] = _fate_vector(br, _ROUND_FATES)
        outputs += _w_states(br)
    return _Tables(t1, t2, rounds, tuple(outputs))


def _counts(table: np.ndarray, n: int, rng: Optional[np.random.Generator]) -> np.ndarray:
    """Fate counts for ``n`` trajectories; expectations when ``rng`` is None."""
    if rng is None:
        return table * n
    k = select_branch(table, rng.random(n))
    k = np.minimum(k, len(table) - 1)  # rounding shortfall of the cumulative sum
    return np.bincount(k, minlength=len(table))


# -- engines ------------------------------------------------------------------

def _round_one_ledger(n_pairs, n3, n2_pairs, pairing, step2_counts, d1, l1, attempts):
    pool2 = n2_pairs * (2 if pairing == "both" else 1)
    w_count, g1, l2 = step2_counts
    led = RoundLedger(
        round_index=1,
        consumed=n_pairs,
        successes=w_count,
        recycled_three_photon=g1,
        recycled_two_photon=n2_pairs,
        discarded=d1 + (n3 - attempts),
        losses=l1 + l2,
        unpaired_three_photon=n3 - attempts,
        unpaired_two_photon=pool2 - attempts,
    )
    led.empirical_probabilities = {
        "p1o": _ratio(n3, n_pairs),
        "p1e": _ratio(n2_pairs, n_pairs),
        "xi_one": _ratio(min(n3, n2_pairs), n_pairs),
        "xi_both": _ratio(min(n3, 2 * n2_pairs), n_pairs),
        "p1o_prime": _ratio(w_count, attempts),
        "p1e_prime": _ratio(g1, attempts),
        "total": _ratio(w_count, n_pairs),
    }
    return led


def _later_ledger(n, pool_size, counts, expected):
    pairs = pool_size / 2 if expected else pool_size // 2
    w_count, gn, disc, loss = counts
    led = RoundLedger(
        round_index=n, consumed=pairs, successes=w_count, recycled_three_photon=gn,
        discarded=disc, losses=loss, unpaired_three_photon=pool_size - 2 * pairs,
    )
    led.empirical_probabilities = {"p_no": _ratio(w_count, pairs), "p_ne": _ratio(gn, pairs)}
    return led


def _run_table(w, n_pairs, n_rounds, seed, pairing, expected) -> EnsembleRun:
    tables = _branch_tables(w, n_rounds)
    rng = lambda stage: None if expected else _stream(seed, stage)  # noqa: E731
    n3, n2_pairs, d1, l1 = _counts(tables.step1, n_pairs, rng(1))
    pool2 = n2_pairs * (2 if pairing == "both" else 1)
    attempts = min(n3, pool2)
    c2 = _counts(tables.step2, attempts, rng(2)) if attempts else np.zeros(3)
    ledgers = [_round_one_ledger(n_pairs, n3, n2_pairs, pairing, c2, d1, l1, attempts)]
    pools = [ResourcePool(0, n_three=n3, n_two=pool2)]
    carry = c2[1]
    for n in range(2, n_rounds + 1):
        pools.append(ResourcePool(n - 1, n_three=carry))
        pairs = carry / 2 if expected else carry // 2
        cn = _counts(tables.rounds[n], pairs, rng(n + 1)) if pairs else np.zeros(4)
        ledgers.append(_later_ledger(n, carry, cn, expected))
        carry = cn[1]
    return EnsembleRun(_normalize_counts(ledgers, expected), pools, list(tables.w_outputs))


def _normalize_counts(ledgers, expected):
    cast = float if expected else int
    for led in ledgers:
        for name in ("consumed", "successes", "recycled_three_photon", "recycled_two_photon",
                     "discarded", "losses", "unpaired_three_photon", "unpaired_two_photon"):
            setattr(led, name, cast(getattr(led, name)))
    return ledgers


def _run_statevector(w, n_pairs, n_rounds, mode, seed, pairing) -> EnsembleRun:
    src = Resource(make_w_input(w))
    threes, twos, n2_pairs = [], [], 0
    d1 = l1 = 0
    for i in range(n_pairs):
        b = step1(src, src, mode, rng=_stream(seed, 1, i))
        if b.fate is Fate.THREE_PHOTON:
            threes.append(b.outputs[0])
        elif b.fate is Fate.TWO_PHOTON:
            n2_pairs += 1
            twos.extend(b.outputs if pairing == "both" else b.outputs[:1])
        elif b.fate is Fate.DISCARDED:
            d1 += 1
        else:
            l1 += 1
    attempts = min(len(threes), len(twos))
    w_out, carry = [], []
    l2 = 0
    for j in range(attempts):
        b = step2(threes[j], twos[j], mode, rng=_stream(seed, 2, j))
        if b.fate is Fate.W_STATE:
            w_out.append(b.outputs[0].state)
        elif b.fate is Fate.THREE_PHOTON:
            carry.append(b.outputs[0])
        else:
            l2 += 1
    ledgers = [_round_one_ledger(n_pairs, len(threes), n2_pairs, pairing,
                                 (len(w_out), len(carry), l2), d1, l1, attempts)]
    pools = [ResourcePool(0, [r.state for r in threes], [r.state for r in twos],
                          len(threes), len(twos))]
    for n in range(2, n_rounds + 1):
        pools.append(ResourcePool(n - 1, [r.state for r in carry], n_three=len(carry)))
        counts = {f: 0 for f in _ROUND_FATES}
        nxt = []
        for j in range(len(carry) // 2):
            b = recycle_round(carry[2 * j], carry[2 * j + 1], mode, rng=_stream(seed, n + 1, j))
            counts[b.fate] += 1
            if b.fate is Fate.W_STATE:
                w_out.append(b.outputs[0].state)
            elif b.fate is Fate.THREE_PHOTON:
                nxt.append(b.outputs[0])
        ledgers.append(_later_ledger(n, len(carry), [counts[f] for f in _ROUND_FATES], False))
        carry = nxt
    return EnsembleRun(ledgers, pools, w_out)


def simulate(w: WParams, n_pairs: int, n_rounds: int = 1, mode: InteractionMode = IDEAL,
             seed: int = 0, pairing: str = "one", engine: str = "table",
             enumerate: bool = False) -> EnsembleRun:
    """Run the pipeline and keep pools and produced W states alongside the ledgers.

    ``enumerate=True`` replaces sampled counts with their expectations
    (floats), which makes every ledger ratio an exact probability.
    ``pairing`` chooses whether an even-path pair contributes one or both of
    its two-photon states to the step-2 pool.
    """
    _validate(n_pairs, n_rounds, mode, pairing, "table" if enumerate else engine)
    if enumerate or engine == "table":
        return _run_table(w, n_pairs, n_rounds, seed, pairing, expected=enumerate)
    return _run_statevector(w, n_pairs, n_rounds, mode, seed, pairing)


def run_ensemble(w: WParams, n_pairs: int, n_rounds: int = 1, mode: InteractionMode = IDEAL,
                 seed: int = 0, pairing: str = "one", engine: str = "table",
                 enumerate: bool = False) -> List[RoundLedger]:
    """Per-round ledgers of one ensemble run; see :func:`simulate`."""
    return simulate(w, n_pairs, n_rounds, mode, seed, pairing, engine, enumerate).ledgers


def chain_estimate(ledgers: Sequence[RoundLedger]) -> List[float]:
    """Cumulative totals rebuilt from the empirical factors of each round.

    Mirrors xi P'_1o + xi P'_1e P_2o + ..., so that it can be set against
    :func:`wconc.ecp.closed_form.closed_form` totals.
    """
    first = ledgers[0].empirical_probabilities
    xi = min(first["p1o"], first["p1e"])
    totals = [xi * first["p1o_prime"]]
    carry = xi * first["p1e_prime"]
    for led in ledgers[1:]:
        e = led.empirical_probabilities
        totals.append(totals[-1] + carry * e["p_no"])
        carry *= e["p_ne"]
    return totals
