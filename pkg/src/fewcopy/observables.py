"""Binary (projector-valued) observables and their local measurement settings."""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, IncompatibleSupports, NotAProjector
from .pauli import PauliString, PureState, State, clamp_probability, expectation

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
# Rotations taking the +1 eigenvector of each Pauli to |0>.
BASIS_ROTATION = {
    "Z": np.eye(2, dtype=complex),
    "X": _H,
    "Y": _H @ np.diag([1, -1j]),
}


@dataclass(frozen=True, eq=False)
class BinaryObservable:
    """A projector M; ``factors`` is set when M = prod (1 + G)/2 over commuting G."""

    n: int
    matrix: np.ndarray = field(repr=False)
    factors: tuple[PauliString, ...] | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        dim = 2**self.n
        if m.shape != (dim, dim):
            raise DimensionMismatch(f"expected {dim}x{dim} projector, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise NotAProjector("matrix is not Hermitian")
        if np.max(np.abs(m @ m - m)) > 1e-9:
            raise NotAProjector("M^2 != M")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_factors(cls, factors: Sequence[PauliString]) -> "BinaryObservable":
        factors = tuple(factors)
        if not factors:
            raise ValueError("need at least one factor (use the identity string for M = 1)")
        return cls(factors[0].n, _factor_projector(factors), factors)

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "BinaryObservable":
        dim = m.shape[0]
        n = int(round(np.log2(dim)))
        if 2**n != dim:
            raise DimensionMismatch(f"dimension {dim} is not a power of two")
        return cls(n, m)

    @property
    def local_setting(self) -> "LocalSetting | None":
        if self.factors is None:
            return None
        try:
            return local_setting_of(self)
        except IncompatibleSupports:
            return None


@functools.lru_cache(maxsize=1024)
def _factor_projector(factors: tuple[PauliString, ...]) -> np.ndarray:
    for i, a in enumerate(factors):
        for b in factors[i + 1:]:
            if not a.commutes_with(b):
                raise NotAProjector(f"factors {a} and {b} do not commute")
    dim = 2 ** factors[0].n
    m = np.eye(dim, dtype=complex)
    for g in factors:
        m = m @ ((np.eye(dim) + g.matrix()) / 2)
    m.setflags(write=False)
    return m


def success_probability(state: State, m: BinaryObservable) -> float:
    """Tr(M rho), clamped to [0, 1]."""
    if state.n != m.n:
        raise DimensionMismatch(f"state has {state.n} qubits, observable {m.n}")
    return clamp_probability(expectation(state, m.matrix))


@dataclass(frozen=True)
class LocalSetting:
    """Per-qubit Pauli bases plus, for each factor, the qubits whose +-1 outcomes
    multiply (times the factor's sign) to that factor's value."""

    bases: str
    parities: tuple[tuple[tuple[int, ...], int], ...]

    def succeeds(self, bits: Sequence[int]) -> bool:
        """True iff every parity evaluates to +1 for outcome bits (0 means +1)."""
        for qubits, sign in self.parities:
            parity = sum(bits[q] for q in qubits) % 2
            if sign * (-1) ** parity != 1:
                return False
        return True


def local_setting_of(m: BinaryObservable) -> LocalSetting:
    if m.factors is None:
        raise IncompatibleSupports("observable has no factor-list representation")
    bases = [""] * m.n
    for g in m.factors:
        for q, c in enumerate(g.letters):
            if c == "I":
                continue
            if bases[q] and bases[q] != c:
                raise IncompatibleSupports(f"qubit {q} needs both {bases[q]} and {c}")
            bases[q] = c
    # qubits no factor touches are read out in Z and ignored
    return LocalSetting(
        "".join(b or "Z" for b in bases),
        tuple((g.support, g.phase) for g in m.factors),
    )


def local_outcome_distribution(state: State, bases: str) -> np.ndarray:
    """Born probabilities of all 2^n outcome bit strings when measuring each qubit in ``bases``."""
    if len(bases) != state.n:
        raise DimensionMismatch(f"{len(bases)} bases for {state.n} qubits")
    u = np.ones((1, 1), dtype=complex)
    for b in bases:
        u = np.kron(u, BASIS_ROTATION[b])
    if isinstance(state, PureState):
        probs = np.abs(u @ state.amplitudes) ** 2
    else:
        probs = np.einsum("ij,jk,ik->i", u, state.matrix, u.conj()).real
    return probs


def local_success_probability(state: State, setting: LocalSetting) -> float:
    """Probability that all parity rules hold, summed over the local-outcome lattice."""
    probs = local_outcome_distribution(state, setting.bases)
    n = state.n
    idx = np.arange(2**n)
    ok = np.ones(idx.size, dtype=bool)
    for qubits, sign in setting.parities:
        parity = np.zeros(idx.size, dtype=int)
        for q in qubits:
            parity ^= (idx >> (n - 1 - q)) & 1
        ok &= sign * (1 - 2 * parity) == 1
    return float(probs[ok].sum())
