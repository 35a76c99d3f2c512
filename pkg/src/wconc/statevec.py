"""Dense pure-state engine over labelled two-level systems.

Photon polarization uses bit 0 = |R>, bit 1 = |L>; electron spin uses
bit 0 = |up>, bit 1 = |down>.  Amplitudes are stored big-endian: the first
qubit in the register is the most significant index.

All values are immutable; every operation returns a new state.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

NORM_EPS = 1e-9
SQRT1_2 = 1 / np.sqrt(2)


class RegisterError(ValueError):
    """Raised for unknown, duplicated or mismatched qubit labels."""


class QubitKind(Enum):
    PHOTON = "photon"
    SPIN = "spin"


@dataclass(frozen=True)
class QubitId:
    label: str
    kind: QubitKind = QubitKind.PHOTON

    def __str__(self) -> str:
        return self.label


def photon(label: str) -> QubitId:
    return QubitId(label, QubitKind.PHOTON)


def spin(label: str) -> QubitId:
    return QubitId(label, QubitKind.SPIN)


class Basis(Enum):
    RL = "RL"
    DIAGONAL = "diagonal"
    SPIN_Z = "spin-z"
    SPIN_X = "spin-x"


# Row k is the ket of outcome k, written in the computational basis.
# Diagonal: outcome 0 is +45 deg = (|L> + i|R>)/sqrt2, outcome 1 is -45 deg.
BASIS_KETS = {
    Basis.RL: np.eye(2, dtype=complex),
    Basis.SPIN_Z: np.eye(2, dtype=complex),
    Basis.DIAGONAL: np.array([[1j, 1], [-1j, 1]], dtype=complex) * SQRT1_2,
    Basis.SPIN_X: np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2,
}
_BASIS_KIND = {
    Basis.RL: QubitKind.PHOTON,
    Basis.DIAGONAL: QubitKind.PHOTON,
    Basis.SPIN_Z: QubitKind.SPIN,
    Basis.SPIN_X: QubitKind.SPIN,
}

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2
SIGMA_Z = np.diag([1, -1]).astype(complex)
IDENTITY = np.eye(2, dtype=complex)

_LETTERS = {QubitKind.PHOTON: "RL", QubitKind.SPIN: "ud"}

QubitRef = Union[QubitId, str]


@dataclass(frozen=True, eq=False)
class StateVector:
    """A labelled, possibly sub-normalized, pure state.

    Parameters
    ----------
    qubits : tuple of QubitId
        Register order; labels must be unique.
    amplitudes : np.ndarray
        Complex vector of length ``2 ** len(qubits)``.
    """

    qubits: tuple
    amplitudes: np.ndarray

    def __post_init__(self):
        qubits = tuple(self.qubits)
        labels = [q.label for q in qubits]
        if len(set(labels)) != len(labels):
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise RegisterError(f"duplicate qubit labels: {dupes}")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** len(qubits):
            raise ValueError(
                f"expected {2 ** len(qubits)} amplitudes for {len(qubits)} qubits, got {amps.size}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.flags.writeable = False
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def labels(self) -> tuple:
        return tuple(q.label for q in self.qubits)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))

    def qubit(self, ref: QubitRef) -> QubitId:
        return self.qubits[self.index(ref)]

    def index(self, ref: QubitRef) -> int:
        label = ref.label if isinstance(ref, QubitId) else ref
        for i, q in enumerate(self.qubits):
            if q.label == label:
                if isinstance(ref, QubitId) and ref.kind != q.kind:
                    raise RegisterError(f"qubit {label!r} is a {q.kind.value}, not a {ref.kind.value}")
                return i
        raise RegisterError(f"unknown qubit {label!r}; register is {list(self.labels)}")

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per qubit (read-only view)."""
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def with_tensor(self, t: np.ndarray, qubits: Sequence[QubitId] | None = None) -> "StateVector":
        return StateVector(tuple(self.qubits if qubits is None else qubits), np.asarray(t).reshape(-1))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize a zero-norm state")
        return StateVector(self.qubits, self.amplitudes / n)

    def scaled(self, factor: complex) -> "StateVector":
        return StateVector(self.qubits, self.amplitudes * factor)

    def amplitude(self, bits: Union[str, Sequence[int]]) -> complex:
        """Amplitude of one basis state, given as ``"RRL"``-style letters or bits."""
        if isinstance(bits, str):
            bits = [_letter_bit(ch) for ch in bits]
        if len(bits) != self.n_qubits:
            raise ValueError(f"need {self.n_qubits} bits, got {len(bits)}")
        return complex(self.tensor()[tuple(bits)])

    def reordered(self, order: Sequence[QubitRef]) -> "StateVector":
        """Same state with the register permuted to ``order``."""
        idx = [self.index(r) for r in order]
        if sorted(idx) != list(range(self.n_qubits)):
            raise RegisterError(f"order {list(order)} is not a permutation of {list(self.labels)}")
        t = np.transpose(self.tensor(), idx)
        return StateVector(tuple(self.qubits[i] for i in idx), t.reshape(-1))

    def relabeled(self, mapping: Mapping[str, str]) -> "StateVector":
        qubits = tuple(QubitId(mapping.get(q.label, q.label), q.kind) for q in self.qubits)
        return StateVector(qubits, self.amplitudes)

    def terms(self, atol: float = 1e-12) -> dict:
        """Nonzero amplitudes keyed by basis letters, e.g. ``{"RRL": 0.57+0j}``."""
        out = {}
        for idx in zip(*np.nonzero(np.abs(self.tensor()) > atol)):
            key = "".join(_LETTERS[q.kind][b] for q, b in zip(self.qubits, idx))
            out[key] = complex(self.tensor()[idx])
        return out

    def __repr__(self) -> str:
        body = " + ".join(f"({a:.4g})|{k}>" for k, a in self.terms(1e-9).items()) or "0"
        return f"StateVector[{','.join(self.labels)}]: {body}"


def _letter_bit(ch: str) -> int:
    if ch in "Ru0":
        return 0
    if ch in "Ld1":
        return 1
    raise ValueError(f"unknown basis letter {ch!r}")


def _as_qubits(labels: Iterable[QubitRef]) -> tuple:
    return tuple(q if isinstance(q, QubitId) else photon(q) for q in labels)


def zero_state(labels: Iterable[QubitRef]) -> StateVector:
    qubits = _as_qubits(labels)
    return StateVector(qubits, np.zeros(2 ** len(qubits), dtype=complex))


def from_terms(terms: Mapping[str, complex], labels: Iterable[QubitRef]) -> StateVector:
    """Build a state from ``{"RRL": amp, ...}``; plain string labels are photons."""
    qubits = _as_qubits(labels)
    t = np.zeros((2,) * len(qubits), dtype=complex)
    for key, amp in terms.items():
        if len(key) != len(qubits):
            raise ValueError(f"term {key!r} does not match register of {len(qubits)} qubits")
        t[tuple(_letter_bit(ch) for ch in key)] += amp
    return StateVector(qubits, t.reshape(-1))


def single(q: QubitRef, amp0: complex, amp1: complex) -> StateVector:
    return StateVector(_as_qubits([q]), np.array([amp0, amp1], dtype=complex))


def tensor(a: StateVector, *others: StateVector) -> StateVector:
    """Kronecker product; qubits of ``a`` come first."""
    out = a
    for b in others:
        clash = set(out.labels) & set(b.labels)
        if clash:
            raise RegisterError(f"label collision in tensor product: {sorted(clash)}")
        out = StateVector(out.qubits + b.qubits, np.kron(out.amplitudes, b.amplitudes))
    return out


def apply_single(state: StateVector, q: QubitRef, m) -> StateVector:
    """Apply a 2x2 matrix to one qubit."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"single-qubit operator must be 2x2, got shape {m.shape}")
    i = state.index(q)
    t = np.tensordot(m, state.tensor(), axes=([1], [i]))
    return state.with_tensor(np.moveaxis(t, 0, i))


def apply_diagonal(state: StateVector, q1: QubitRef, q2: QubitRef, coef) -> StateVector:
    """Multiply each amplitude by ``coef[bit(q1), bit(q2)]``."""
    coef = np.asarray(coef, dtype=complex)
    if coef.shape != (2, 2):
        raise ValueError("coefficient table must be 2x2")
    i, j = state.index(q1), state.index(q2)
    if i == j:
        raise RegisterError("diagonal two-qubit operator needs two distinct qubits")
    shape = [1] * state.n_qubits
    shape[i] = shape[j] = 2
    c = coef if i < j else coef.T
    return state.with_tensor(state.tensor() * c.reshape(shape))


def _check_basis(q: QubitId, basis: Basis) -> None:
    if _BASIS_KIND[basis] is not q.kind:
        raise RegisterError(f"basis {basis.value} does not apply to {q.kind.value} qubit {q.label!r}")


def project(state: StateVector, q: QubitRef, basis: Basis, outcome: int) -> StateVector:
    """Unnormalized branch ``<outcome|_q psi`` with ``q`` removed from the register."""
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    i = state.index(q)
    _check_basis(state.qubits[i], basis)
    bra = BASIS_KETS[basis][outcome].conj()
    t = np.tensordot(bra, state.tensor(), axes=([0], [i]))
    rest = state.qubits[:i] + state.qubits[i + 1:]
    return StateVector(rest, np.asarray(t).reshape(-1))


@dataclass(frozen=True)
class MeasurementRecord:
    qubit: QubitId
    basis: Basis
    outcome: int
    probability: float


def outcome_probabilities(state: StateVector, q: QubitRef, basis: Basis) -> tuple:
    total = state.norm_sq()
    if total <= 0:
        raise ValueError("cannot measure a zero-norm state")
    p0 = project(state, q, basis, 0).norm_sq() / total
    p1 = project(state, q, basis, 1).norm_sq() / total
    return p0, p1


def measure(state: StateVector, q: QubitRef, basis: Basis, rand: float):
    """Destructive projective measurement driven by an explicit uniform draw.

    Outcome 0 is selected iff ``rand < p0``.  The measured qubit is removed
    and the surviving branch is renormalized.

    Returns
    -------
    (MeasurementRecord, StateVector)
    """
    if not 0.0 <= rand < 1.0:
        raise ValueError(f"rand must lie in [0, 1), got {rand}")
    qid = state.qubit(q)
    p0, p1 = outcome_probabilities(state, q, basis)
    outcome = 0 if rand < p0 else 1
    prob = p0 if outcome == 0 else p1
    post = project(state, q, basis, outcome).normalized()
    return MeasurementRecord(qid, basis, outcome, prob), post


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b> after aligning ``b`` to ``a``'s register order."""
    if sorted(a.labels) != sorted(b.labels):
        raise RegisterError(f"registers differ: {list(a.labels)} vs {list(b.labels)}")
    b = b.reordered(a.labels)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    """Phase-insensitive overlap ``|<a|b>|^2 / (|a|^2 |b|^2)``."""
    na, nb = a.norm_sq(), b.norm_sq()
    if na == 0 or nb == 0:
        raise ValueError("fidelity undefined for a zero-norm state")
    return abs(inner(a, b)) ** 2 / (na * nb)


def factorize(state: StateVector, first: Sequence[QubitRef], atol: float = 1e-9):
    """Split a product state into (state on ``first``, state on the rest).

    The norm is carried by the first factor.  Raises ``ValueError`` when the
    state is entangled across the cut.
    """
    first_idx = [state.index(r) for r in first]
    rest_idx = [i for i in range(state.n_qubits) if i not in first_idx]
    t = np.transpose(state.tensor(), first_idx + rest_idx)
    mat = t.reshape(2 ** len(first_idx), 2 ** len(rest_idx))
    u, s, vh = np.linalg.svd(mat)
    if s.size > 1 and s[1] > atol * max(s[0], 1.0):
        raise ValueError(f"state is entangled across the cut (second singular value {s[1]:.3g})")
    left = StateVector(tuple(state.qubits[i] for i in first_idx), u[:, 0] * s[0])
    right = StateVector(tuple(state.qubits[i] for i in rest_idx), vh[0])
    return left, right
