"""Simulation of W-state entanglement concentration with QD-cavity parity checks."""
from .cavity import IDEAL, CavityParams, InteractionMode, ParameterError, faraday_rotation, reflection
from .pcg import Parity, gate_metrics, parity_check_enumerate, parity_check_sample
from .statevec import Basis, StateVector, fidelity, from_terms, measure, photon, spin, tensor

__version__ = "0.1.0"
