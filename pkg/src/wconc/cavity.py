"""One-sided QD-cavity optics: reflection coefficients and the photon-spin map.

All rates and detunings are expressed in units of the cavity decay rate, so the
default ``kappa`` is 1.  The protocol operating point is ``omega - omega_c =
kappa/2`` with ``omega_x = omega_c``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .statevec import QubitKind, QubitRef, StateVector, apply_diagonal


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class CavityParams:
    """Physical parameters of one QD-cavity system (units of kappa)."""

    g: float
    kappa: float = 1.0
    kappa_s: float = 0.0
    gamma: float = 0.1
    omega_c: float = 0.0
    omega_x: float = 0.0
    omega: float = 0.5

    def __post_init__(self):
        if not self.kappa > 0:
            raise ParameterError(f"kappa must be > 0, got {self.kappa}")
        for name in ("g", "kappa_s", "gamma"):
            value = getattr(self, name)
            if not value >= 0:
                raise ParameterError(f"{name} must be >= 0, got {value}")
        for name in ("omega_c", "omega_x", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")

    @classmethod
    def from_ratios(cls, g_ratio: float, ks_ratio: float, gamma: float = 0.1,
                    detuning: float = 0.5) -> "CavityParams":
        """Parameters from ``g/(kappa + kappa_s)`` and ``kappa_s/kappa`` with kappa = 1."""
        if ks_ratio < 0 or g_ratio < 0:
            raise ParameterError("ratios must be non-negative")
        return cls(g=g_ratio * (1.0 + ks_ratio), kappa=1.0, kappa_s=ks_ratio,
                   gamma=gamma, omega_c=0.0, omega_x=0.0, omega=detuning)


@dataclass(frozen=True)
class ReflectionPair:
    r_hot: complex
    r_cold: complex
    phi_hot: float
    phi_cold: float


def _phase(z: complex) -> float:
    phi = cmath.phase(z)
    # cmath.phase returns [-pi, pi]; fold -pi onto pi.
    return math.pi if phi == -math.pi else phi


def reflection(params: CavityParams) -> ReflectionPair:
    """Hot- and cold-cavity reflection coefficients in the weak-excitation limit."""
    k, ks, g = params.kappa, params.kappa_s, params.g
    dipole = 1j * (params.omega_x - params.omega) + params.gamma / 2
    cav = 1j * (params.omega_c - params.omega) + k / 2 + ks / 2
    r_cold = (1j * (params.omega_c - params.omega) - k / 2 + ks / 2) / cav
    # Same as 1 - k*dipole/(dipole*cav + g^2); this form has Re(denominator) >= k/2.
    # A vanishing dipole term leaves r_hot = 1 for g > 0 and the cold value for g = 0.
    if dipole == 0:
        r_hot = r_cold if g == 0 else 1.0 + 0j
    else:
        r_hot = 1 - k / (cav + g * g / dipole)
    return ReflectionPair(complex(r_hot), complex(r_cold), _phase(r_hot), _phase(r_cold))


def faraday_rotation(params: CavityParams) -> float:
    """Polarization rotation angle (phi_cold - phi_hot) / 2, identical for both spin states."""
    r = reflection(params)
    return (r.phi_cold - r.phi_hot) / 2


# Interaction table indexed [photon bit, spin bit]; photon 0=R, 1=L; spin 0=up, 1=down.
# R-up and L-down see the cold cavity, L-up and R-down the hot one.
HOT = np.array([[False, True], [True, False]])
IDEAL_TABLE = np.where(HOT, 1.0 + 0j, 1j)


@dataclass(frozen=True)
class InteractionMode:
    """Ideal (lossless, exact pi/2 phase) or lossy reflection.

    In lossy mode each branch keeps the ideal phase and is scaled by ``|r_hot|``
    or ``|r_cold|``.  ``full_complex=True`` instead uses the complex
    conjugates of the coefficients, the time convention under which the ideal
    table is recovered as ``r_hot -> 1``, ``r_cold -> -i``.
    """

    params: Optional[CavityParams] = None
    full_complex: bool = False

    @classmethod
    def lossy(cls, params: CavityParams, full_complex: bool = False) -> "InteractionMode":
        return cls(params, full_complex)

    @property
    def is_ideal(self) -> bool:
        return self.params is None

    def table(self) -> np.ndarray:
        if self.params is None:
            return IDEAL_TABLE.copy()
        r = reflection(self.params)
        if self.full_complex:
            hot, cold = r.r_hot.conjugate(), r.r_cold.conjugate()
        else:
            hot, cold = abs(r.r_hot), 1j * abs(r.r_cold)
        return np.where(HOT, hot, cold).astype(complex)


IDEAL = InteractionMode()


def photon_spin_interact(state: StateVector, photon: QubitRef, spin: QubitRef,
                         mode: InteractionMode = IDEAL) -> StateVector:
    """Reflect ``photon`` off the cavity holding ``spin``."""
    p, s = state.qubit(photon), state.qubit(spin)
    if p.kind is not QubitKind.PHOTON or s.kind is not QubitKind.SPIN:
        raise ValueError(f"expected (photon, spin), got ({p.kind.value} {p.label!r}, {s.kind.value} {s.label!r})")
    return apply_diagonal(state, p, s, mode.table())
