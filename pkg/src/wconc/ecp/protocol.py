"""Protocol stages as branch trees over explicit state vectors.

Every stage can run in two ways.  Enumeration returns each leaf with its exact
probability.  Sampling walks a single path, drawing each measurement from the
generator through :func:`wconc.statevec.measure`.

Stages
------
step1
    PCG on the c photons of two copies.  Odd parity, then a1 = R, yields a
    three-photon resource nu(b|RRL> + b|RLR> + c|LRR>).  Even parity, then
    c0 c1 = RR, yields two two-photon resources (b|RL> + c|LR>).
step2
    PCG on a three-photon resource's a photon and a two-photon resource's a
    photon.  Odd parity yields |W+>, even parity the next-generation resource.
recycle_round
    Round n >= 2 on two generation n-1 resources.  PCG on the a photons; odd
    parity continues as step1 with the a and c roles exchanged and ends in
    |W+>.  Even parity is followed by a PCG on the c photons; even again
    leaves the partner pair in matching terms, and reading out the partner in
    the Hadamard basis yields the generation-n resource.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..cavity import IDEAL, InteractionMode
from ..pcg import Parity, parity_check_enumerate, select_branch
from ..statevec import (
    HADAMARD,
    SIGMA_Z,
    Basis,
    StateVector,
    apply_single,
    factorize,
    measure,
    project,
    tensor,
)
from .states import THREE, TWO, Resource

# Branches whose conditional probability falls below this are exact zeros
# up to rounding.
ZERO_PROB = 1e-24


class GenerationMismatch(ValueError):
    pass


class Fate(Enum):
    THREE_PHOTON = "three_photon"
    TWO_PHOTON = "two_photon"
    W_STATE = "w_state"
    DISCARDED = "discarded"
    LOST = "lost"


@dataclass(frozen=True)
class Branch:
    """One leaf of a stage.

    ``outputs`` holds the produced resources (one W or three-photon state,
    or two two-photon states).  ``record`` lists the classical outcomes and
    corrections along the path.
    """

    fate: Fate
    probability: float
    outputs: Tuple[Resource, ...] = ()
    record: Tuple[str, ...] = field(default=())


class _Walker:
    """Enumerates all outcomes when ``rng`` is None, else samples one."""

    def __init__(self, rng: Optional[np.random.Generator] = None):
        self.rng = rng

    @property
    def sampling(self) -> bool:
        return self.rng is not None

    def split(self, state: StateVector, q: str, basis: Basis) -> Iterator[Tuple[int, float, StateVector]]:
        """Yield (outcome, conditional probability, normalized post-state)."""
        if self.sampling:
            rec, post = measure(state, q, basis, self.rng.random())
            yield rec.outcome, rec.probability, post
            return
        total = state.norm_sq()
        for k in (0, 1):
            branch = project(state, q, basis, k)
            p = branch.norm_sq() / total
            if p > ZERO_PROB:
                yield k, p, branch.normalized()

    def gate(self, state: StateVector, p1: str, p2: str, mode: InteractionMode):
        """Yield (parity or None for loss, conditional probability, post-state).

        The spin left behind by the gate is read in z to unravel the trace
        over it; in ideal mode only the spin value the probe infers occurs.
        """
        results = parity_check_enumerate(state, p1, p2, mode)
        loss = 0.0 if mode.is_ideal else max(0.0, 1.0 - results[0].retained_norm)
        if self.sampling:
            k = int(select_branch([r.probability for r in results], self.rng.random()))
            if mode.is_ideal:
                k = min(k, len(results) - 1)  # cumulative sum may fall short by rounding
            chosen = [results[k]] if k < len(results) else []
            if not chosen:
                yield None, loss, None
                return
        else:
            chosen = results
            if loss > ZERO_PROB:
                yield None, loss, None
        for r in chosen:
            if r.probability <= ZERO_PROB:
                continue
            for s, ps, post in self.split(r.heralded, "spin", Basis.SPIN_Z):
                yield r.parity, r.probability * ps, post


def _check_generation(first: Resource, second: Resource) -> int:
    if first.generation != second.generation:
        raise GenerationMismatch(
            f"resources come from generations {first.generation} and {second.generation}"
        )
    return first.generation


def _hadamard(state: StateVector, *labels: str) -> StateVector:
    for q in labels:
        state = apply_single(state, q, HADAMARD)
    return state


def _sigma_z(state: StateVector, label: str) -> StateVector:
    return apply_single(state, label, SIGMA_Z)


def _three(state: StateVector, labels: Sequence[str], generation: int) -> Resource:
    ordered = state.reordered(labels).relabeled(dict(zip(labels, THREE)))
    return Resource(ordered, generation)


def _letters(bits: Sequence[int]) -> str:
    return "".join("RL"[b] for b in bits)


def _prepare(first: Resource, second: Resource, names0: Sequence[str], names1: Sequence[str]) -> StateVector:
    s0 = first.state.relabeled(dict(zip(first.state.labels, names0)))
    s1 = second.state.relabeled(dict(zip(second.state.labels, names1)))
    return tensor(s0, s1)


def _finish(walker: _Walker, branches: List[Branch]):
    if walker.sampling:
        (branch,) = branches
        return branch
    return branches


def _readout_pair(walker, state, q1, q2):
    """Hadamard both qubits and read them in R/L; yields (bits, p, post)."""
    state = _hadamard(state, q1, q2)
    for k1, p1, s1 in walker.split(state, q1, Basis.RL):
        for k2, p2, s2 in walker.split(s1, q2, Basis.RL):
            yield (k1, k2), p1 * p2, s2


def step1(first: Resource, second: Resource, mode: InteractionMode = IDEAL,
          rng: Optional[np.random.Generator] = None) -> Union[List[Branch], Branch]:
    """First step on two copies of the same three-photon state.

    Returns every branch when ``rng`` is None, otherwise one sampled branch.
    """
    gen = _check_generation(first, second)
    walker = _Walker(rng)
    psi = _prepare(first, second, ("a0", "b0", "c0"), ("a1", "b1", "c1"))
    out: List[Branch] = []
    for parity, pg, s in walker.gate(psi, "c0", "c1", mode):
        if parity is None:
            out.append(Branch(Fate.LOST, pg, (), ("pcg:loss",)))
        elif parity is Parity.ODD:
            for ka, pa, sa in walker.split(s, "a1", Basis.RL):
                rec = ("pcg:odd", f"a1:{'RL'[ka]}")
                if ka == 1:
                    out.append(Branch(Fate.DISCARDED, pg * pa, (), rec))
                    continue
                for bits, pm, sm in _readout_pair(walker, sa, "b1", "c1"):
                    fixed = bits[0] != bits[1]
                    if fixed:
                        sm = _sigma_z(sm, "c0")
                    out.append(Branch(
                        Fate.THREE_PHOTON, pg * pa * pm,
                        (_three(sm, ("a0", "b0", "c0"), gen),),
                        rec + (f"b1c1:{_letters(bits)}",) + (("sz:c0",) if fixed else ()),
                    ))
        else:
            for k0, p0, s0 in walker.split(s, "c0", Basis.RL):
                for k1, p1, s1 in walker.split(s0, "c1", Basis.RL):
                    rec = ("pcg:even", f"c0c1:{_letters((k0, k1))}")
                    p = pg * p0 * p1
                    if (k0, k1) != (0, 0):
                        out.append(Branch(Fate.DISCARDED, p, (), rec))
                        continue
                    left, right = factorize(s1, ("a0", "b0"))
                    pairs = tuple(
                        Resource(x.normalized().reordered(names).relabeled(dict(zip(names, TWO))), gen)
                        for x, names in ((left, ("a0", "b0")), (right, ("a1", "b1")))
                    )
                    out.append(Branch(Fate.TWO_PHOTON, p, pairs, rec))
    return _finish(walker, out)


def step2(three: Resource, two: Resource, mode: InteractionMode = IDEAL,
          rng: Optional[np.random.Generator] = None) -> Union[List[Branch], Branch]:
    """Second step on a three-photon and a two-photon resource of one generation."""
    gen = _check_generation(three, two)
    if three.n_photons != 3 or two.n_photons != 2:
        raise ValueError("step2 takes a three-photon and a two-photon resource")
    walker = _Walker(rng)
    psi = _prepare(three, two, ("a0", "b0", "c0"), ("abar", "bbar"))
    out: List[Branch] = []
    for parity, pg, s in walker.gate(psi, "a0", "abar", mode):
        if parity is None:
            out.append(Branch(Fate.LOST, pg, (), ("pcg:loss",)))
            continue
        for bits, pm, sm in _readout_pair(walker, s, "abar", "bbar"):
            same = bits[0] == bits[1]
            # odd gate: W+ on equal readouts; even gate: resource on unequal readouts
            fixed = (not same) if parity is Parity.ODD else same
            if fixed:
                sm = _sigma_z(sm, "a0")
            rec = (f"pcg:{parity.value}", f"abar bbar:{_letters(bits)}") + (("sz:a0",) if fixed else ())
            if parity is Parity.ODD:
                out.append(Branch(Fate.W_STATE, pg * pm, (_three(sm, ("a0", "b0", "c0"), gen),), rec))
            else:
                out.append(Branch(Fate.THREE_PHOTON, pg * pm, (_three(sm, ("a0", "b0", "c0"), gen + 1),), rec))
    return _finish(walker, out)


def recycle_round(first: Resource, second: Resource, mode: InteractionMode = IDEAL,
                  rng: Optional[np.random.Generator] = None) -> Union[List[Branch], Branch]:
    """Round n >= 2 on two recycled three-photon resources of generation n - 1."""
    gen = _check_generation(first, second)
    walker = _Walker(rng)
    psi = _prepare(first, second, ("a0", "b0", "c0"), ("a1", "b1", "c1"))
    out: List[Branch] = []
    for parity, pg, s in walker.gate(psi, "a0", "a1", mode):
        if parity is None:
            out.append(Branch(Fate.LOST, pg, (), ("pcg-a:loss",)))
        elif parity is Parity.ODD:
            # step1 with the a and c roles exchanged
            for kc, pc, sc in walker.split(s, "c1", Basis.RL):
                rec = ("pcg-a:odd", f"c1:{'RL'[kc]}")
                if kc == 1:
                    out.append(Branch(Fate.DISCARDED, pg * pc, (), rec))
                    continue
                for bits, pm, sm in _readout_pair(walker, sc, "b1", "a1"):
                    fixed = bits[0] != bits[1]
                    if fixed:
                        sm = _sigma_z(sm, "a0")
                    out.append(Branch(
                        Fate.W_STATE, pg * pc * pm, (_three(sm, ("a0", "b0", "c0"), gen),),
                        rec + (f"b1a1:{_letters(bits)}",) + (("sz:a0",) if fixed else ()),
                    ))
        else:
            for parity2, pg2, s2 in walker.gate(s, "c0", "c1", mode):
                if parity2 is None:
                    out.append(Branch(Fate.LOST, pg * pg2, (), ("pcg-a:even", "pcg-c:loss")))
                    continue
                if parity2 is Parity.ODD:
                    out.append(Branch(Fate.DISCARDED, pg * pg2, (), ("pcg-a:even", "pcg-c:odd")))
                    continue
                s3 = _hadamard(s2, "a1", "b1", "c1")
                for ka, pa, sa in walker.split(s3, "a1", Basis.RL):
                    for kb, pb, sb in walker.split(sa, "b1", Basis.RL):
                        for kc, pc, sc in walker.split(sb, "c1", Basis.RL):
                            fixes = []
                            if kb == kc:
                                sc = _sigma_z(sc, "c0")
                                fixes.append("sz:c0")
                            if ka == kb:
                                sc = _sigma_z(sc, "a0")
                                fixes.append("sz:a0")
                            out.append(Branch(
                                Fate.THREE_PHOTON, pg * pg2 * pa * pb * pc,
                                (_three(sc, ("a0", "b0", "c0"), gen + 1),),
                                ("pcg-a:even", "pcg-c:even", f"a1b1c1:{_letters((ka, kb, kc))}", *fixes),
                            ))
    return _finish(walker, out)


def fate_probabilities(branches: Sequence[Branch]) -> dict:
    """Total probability per fate."""
    totals = {f: 0.0 for f in Fate}
    for b in branches:
        totals[b.fate] += b.probability
    return totals
