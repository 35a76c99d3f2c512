"""Input states, protocol resources and their canonical forms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..statevec import StateVector, from_terms

THREE = ("a", "b", "c")
TWO = ("a", "b")
NORM_TOL = 1e-12


@dataclass(frozen=True)
class WParams:
    """Coefficients of alpha|RRL> + beta|RLR> + gamma|LRR>."""

    alpha: complex
    beta: complex
    gamma: complex

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        total = abs(self.alpha) ** 2 + abs(self.beta) ** 2 + abs(self.gamma) ** 2
        if abs(total - 1) > NORM_TOL:
            raise ValueError(f"|alpha|^2 + |beta|^2 + |gamma|^2 must be 1, got {total!r}")

    @classmethod
    def from_weights(cls, alpha_sq: float, beta_sq: float, gamma_sq: float) -> "WParams":
        """Real non-negative coefficients from the squared moduli."""
        weights = (alpha_sq, beta_sq, gamma_sq)
        if min(weights) < 0:
            raise ValueError("weights must be non-negative")
        return cls(*(math.sqrt(w) for w in weights))

    @property
    def weights(self) -> tuple:
        return abs(self.alpha) ** 2, abs(self.beta) ** 2, abs(self.gamma) ** 2


def random_wparams(rng: np.random.Generator, complex_phases: bool = False) -> WParams:
    """Uniform point on the unit sphere of (|alpha|, |beta|, |gamma|)."""
    v = np.abs(rng.normal(size=3))
    v /= np.linalg.norm(v)
    if complex_phases:
        v = v * np.exp(2j * np.pi * rng.random(3))
    return WParams(*v)


def make_w_input(w: WParams, labels: Sequence[str] = THREE) -> StateVector:
    if len(labels) != 3:
        raise ValueError("need three photon labels")
    return from_terms({"RRL": w.alpha, "RLR": w.beta, "LRR": w.gamma}, labels)


def generation_coefficients(beta: complex, gamma: complex, generation: int) -> tuple:
    """(beta**(2**n), gamma**(2**n)) rescaled to unit weight 2|b|^2 + |c|^2.

    Uses the ratio gamma/beta so large generations do not underflow.
    """
    if generation < 0:
        raise ValueError("generation must be >= 0")
    power = 2 ** generation
    if beta == 0 and gamma == 0:
        raise ValueError("beta and gamma cannot both vanish")
    if beta == 0:
        return 0j, complex(gamma / abs(gamma)) ** power
    if gamma == 0:
        return complex(beta / abs(beta)) ** power / math.sqrt(2), 0j
    log_ratio = power * (math.log(abs(gamma)) - math.log(abs(beta)))
    phase_b = complex(beta / abs(beta)) ** power
    phase_c = complex(gamma / abs(gamma)) ** power
    if log_ratio > 0:
        s = math.exp(-log_ratio)  # |b| / |c|
        norm = math.sqrt(2 * s * s + 1)
        return phase_b * s / norm, phase_c / norm
    t = math.exp(log_ratio)  # |c| / |b|
    norm = math.sqrt(2 + t * t)
    return phase_b / norm, phase_c * t / norm


def three_photon_form(beta: complex, gamma: complex, labels: Sequence[str] = THREE) -> StateVector:
    """nu (beta|RRL> + beta|RLR> + gamma|LRR>), normalized."""
    s = from_terms({"RRL": beta, "RLR": beta, "LRR": gamma}, labels)
    return s.normalized()


def two_photon_form(beta: complex, gamma: complex, labels: Sequence[str] = TWO) -> StateVector:
    """(beta|RL> + gamma|LR>) / sqrt(|beta|^2 + |gamma|^2)."""
    return from_terms({"RL": beta, "LR": gamma}, labels).normalized()


def generation_form(w: WParams, generation: int, labels: Sequence[str] = THREE) -> StateVector:
    """Canonical three-photon resource carrying (beta**(2**n), gamma**(2**n))."""
    b, c = generation_coefficients(w.beta, w.gamma, generation)
    return three_photon_form(b, c, labels)


def w_plus(labels: Sequence[str] = THREE) -> StateVector:
    return from_terms({"RRL": 1, "RLR": 1, "LRR": 1}, labels).normalized()


@dataclass(frozen=True)
class Resource:
    """A protocol register tagged with the generation of its coefficients."""

    state: StateVector
    generation: int = 0

    @property
    def n_photons(self) -> int:
        return self.state.n_qubits
