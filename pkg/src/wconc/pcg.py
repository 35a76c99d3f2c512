"""Parity-check gate on two photon polarizations mediated by one QD spin.

The gate adjoins a spin in (|up> + |down>)/sqrt2, reflects both signal photons,
applies a Hadamard to the spin, reflects a probe photon (|R> + |L>)/sqrt2 and
reads the probe in the +-45 deg basis.  With the reflection table of
:mod:`wconc.cavity` the spin ends in |down> for even parity and the probe in
(|L> - i|R>)/sqrt2; odd parity leaves |up> and (|L> + i|R>)/sqrt2.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from .cavity import IDEAL, CavityParams, InteractionMode, photon_spin_interact
from .statevec import (
    HADAMARD,
    SQRT1_2,
    Basis,
    QubitRef,
    RegisterError,
    StateVector,
    apply_single,
    fidelity,
    photon,
    project,
    single,
    spin,
    tensor,
)

SPIN_LABEL = "spin"
PROBE_LABEL = "probe"


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"


class ProbeState(Enum):
    PLUS45 = 0
    MINUS45 = 1


class SpinValue(Enum):
    UP = 0
    DOWN = 1


@dataclass(frozen=True)
class ParityOutcome:
    parity: Parity
    probe_state: ProbeState
    spin_outcome: SpinValue


EVEN = ParityOutcome(Parity.EVEN, ProbeState.MINUS45, SpinValue.DOWN)
ODD = ParityOutcome(Parity.ODD, ProbeState.PLUS45, SpinValue.UP)

# Branch phases picked up by the ideal gate; removed so that the collapsed
# states read a|RR> - b|LL> and a|RL> + b|LR>.
_BRANCH_PHASE = {Parity.EVEN: -1j, Parity.ODD: 1j}


@dataclass(frozen=True)
class GateResult:
    """One heralded branch of the gate.

    ``probability`` is the joint probability of this herald and of no photon
    loss; ``retained_norm`` is the overall survival probability of the run
    (1 in ideal mode).  ``collapsed`` is the normalized signal state after
    projecting the spin onto the value the probe infers; ``heralded`` keeps
    the spin attached and is unnormalized, so it also carries amplitude that
    the probe misattributes in lossy mode.
    """

    outcome: ParityOutcome
    probability: float
    collapsed: StateVector
    retained_norm: float
    heralded: StateVector

    @property
    def parity(self) -> Parity:
        return self.outcome.parity


@dataclass(frozen=True)
class GateLoss:
    """Photon-loss event returned by :func:`parity_check_sample`."""

    probability: float


@dataclass(frozen=True)
class GateMetrics:
    fidelity_even: float
    fidelity_odd: float
    efficiency: float


def _run_gate(state: StateVector, p1: QubitRef, p2: QubitRef, mode: InteractionMode) -> StateVector:
    for q in (p1, p2):
        state.qubit(photon(q) if isinstance(q, str) else q)
    if state.index(p1) == state.index(p2):
        raise RegisterError("parity check needs two distinct photons")
    for label in (SPIN_LABEL, PROBE_LABEL):
        if label in state.labels:
            raise RegisterError(f"label {label!r} is reserved for the gate ancillas")
    psi = tensor(state, single(spin(SPIN_LABEL), SQRT1_2, SQRT1_2),
                 single(photon(PROBE_LABEL), SQRT1_2, SQRT1_2))
    psi = photon_spin_interact(psi, p1, SPIN_LABEL, mode)
    psi = photon_spin_interact(psi, p2, SPIN_LABEL, mode)
    psi = apply_single(psi, SPIN_LABEL, HADAMARD)
    return photon_spin_interact(psi, PROBE_LABEL, SPIN_LABEL, mode)


def parity_check_enumerate(state: StateVector, p1: QubitRef, p2: QubitRef,
                           mode: InteractionMode = IDEAL) -> List[GateResult]:
    """Both heralded branches, Even first.

    Spectator qubits ride along untouched.  A branch with zero probability
    carries an all-zero ``collapsed`` state.
    """
    total = state.norm_sq()
    if total <= 0:
        raise ValueError("gate input has zero norm")
    psi = _run_gate(state, p1, p2, mode)
    results = []
    heralded = {}
    for outcome in (EVEN, ODD):
        heralded[outcome] = project(psi, PROBE_LABEL, Basis.DIAGONAL, outcome.probe_state.value)
    retained = sum(h.norm_sq() for h in heralded.values()) / total
    for outcome in (EVEN, ODD):
        h = heralded[outcome].scaled(np.conj(_BRANCH_PHASE[outcome.parity]))
        branch = project(h, SPIN_LABEL, Basis.SPIN_Z, outcome.spin_outcome.value)
        collapsed = branch.normalized() if branch.norm_sq() > 0 else branch
        results.append(GateResult(outcome, h.norm_sq() / total, collapsed, retained, h))
    return results


def select_branch(probabilities: Sequence[float], rand):
    """Index chosen by ``rand`` against cumulative probabilities.

    Index ``len(probabilities)`` means no listed branch was hit (photon loss).
    Works elementwise when ``rand`` is an array.
    """
    cum = np.cumsum(probabilities)
    return np.searchsorted(cum, rand, side="right")


def parity_check_sample(state: StateVector, p1: QubitRef, p2: QubitRef,
                        mode: InteractionMode = IDEAL, rand: float = 0.0):
    """One sampled run of the gate: a :class:`GateResult` or a :class:`GateLoss`."""
    if not 0.0 <= rand < 1.0:
        raise ValueError(f"rand must lie in [0, 1), got {rand}")
    results = parity_check_enumerate(state, p1, p2, mode)
    k = int(select_branch([r.probability for r in results], rand))
    if k == len(results):
        return GateLoss(1.0 - results[0].retained_norm)
    return results[k]


def canonical_input() -> StateVector:
    """(|R> + |L>)/sqrt2 on both signal photons "1" and "2"."""
    return tensor(single("1", SQRT1_2, SQRT1_2), single("2", SQRT1_2, SQRT1_2))


def gate_metrics(params: CavityParams, full_complex: bool = False,
                 state: Optional[StateVector] = None) -> GateMetrics:
    """Per-branch fidelity against the ideal gate, and photon survival probability.

    Fidelity compares the heralded states with the spin still attached, which
    equals the overlap of the ideal branch with the spin-traced mixed output.
    """
    state = canonical_input() if state is None else state
    labels = state.labels[:2]
    ideal = parity_check_enumerate(state, *labels, IDEAL)
    real = parity_check_enumerate(state, *labels, InteractionMode.lossy(params, full_complex))
    fids = []
    for i, r in zip(ideal, real):
        if i.heralded.norm_sq() == 0:
            fids.append(float("nan"))
        elif r.heralded.norm_sq() == 0:
            fids.append(0.0)
        else:
            fids.append(fidelity(r.heralded, i.heralded))
    efficiency = sum(r.probability for r in real) / sum(i.probability for i in ideal)
    return GateMetrics(fids[0], fids[1], efficiency)
