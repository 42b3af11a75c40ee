"""Signed Pauli strings, dense qubit states and expectation values.

Qubit 0 is the leftmost letter of a Pauli string and the most significant bit
of an amplitude index, so ``"ZIIIII"`` acts on the first tensor factor.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidState,
    NonRealPhase,
    OutOfRange,
    PauliParseError,
)

MAX_QUBITS = 12
PROB_TOL = 1e-9

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SINGLE_QUBIT = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}

# (a, b) -> (c, k) with a*b = i**k * c
_PRODUCT = {}
for _a in "IXYZ":
    _PRODUCT[("I", _a)] = (_a, 0)
    _PRODUCT[(_a, "I")] = (_a, 0)
    _PRODUCT[(_a, _a)] = ("I", 0)
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PRODUCT[(_a, _b)] = (_c, 1)
    _PRODUCT[(_b, _a)] = (_c, 3)


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli word with a real sign, e.g. ``-YYXIZI``."""

    letters: str
    phase: int = 1

    def __post_init__(self):
        if self.phase not in (1, -1):
            raise NonRealPhase(f"phase must be +1 or -1, got {self.phase!r}")
        bad = [c for c in self.letters if c not in "IXYZ"]
        if bad:
            raise PauliParseError(f"invalid Pauli letter {bad[0]!r} in {self.letters!r}")
        if not self.letters:
            raise PauliParseError("a Pauli string needs at least one qubit")

    @property
    def n(self) -> int:
        return len(self.letters)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse ``"+ZZIIII"``/``"-YYXIZI"``/``"XX"`` (sign optional)."""
        s = text.strip()
        phase = 1
        if s and s[0] in "+-":
            phase = -1 if s[0] == "-" else 1
            s = s[1:]
        for pos, c in enumerate(s):
            if c not in "IXYZ":
                raise PauliParseError(
                    f"invalid Pauli letter {c!r} at position {pos} in {text!r}"
                )
        return cls(s, phase)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls("I" * n, 1)

    @classmethod
    def from_sparse(cls, n: int, ops: dict[int, str], phase: int = 1) -> "PauliString":
        """Build from ``{qubit_index: letter}`` with 0-based indices."""
        letters = ["I"] * n
        for q, c in ops.items():
            letters[q] = c
        return cls("".join(letters), phase)

    def __str__(self) -> str:
        return ("+" if self.phase == 1 else "-") + self.letters

    def __neg__(self) -> "PauliString":
        return PauliString(self.letters, -self.phase)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.letters) if c != "I")

    def is_identity(self) -> bool:
        return self.phase == 1 and set(self.letters) == {"I"}

    def commutes_with(self, other: "PauliString") -> bool:
        _check_n(self.n, other.n)
        anti = sum(
            1 for a, b in zip(self.letters, other.letters) if a != "I" and b != "I" and a != b
        )
        return anti % 2 == 0

    def matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix (read-only, cached per letter word)."""
        m = _letters_matrix(self.letters)
        return m if self.phase == 1 else -m


@functools.lru_cache(maxsize=4096)
def _letters_matrix(letters: str) -> np.ndarray:
    if len(letters) > MAX_QUBITS:
        raise DimensionMismatch(f"dense representation capped at {MAX_QUBITS} qubits")
    m = np.ones((1, 1), dtype=complex)
    for c in letters:
        m = np.kron(m, SINGLE_QUBIT[c])
    m.setflags(write=False)
    return m


def _check_n(a: int, b: int) -> None:
    if a != b:
        raise DimensionMismatch(f"qubit counts differ: {a} vs {b}")


def pauli_multiply(a: PauliString, b: PauliString) -> PauliString:
    """Operator product ``a @ b``; raises NonRealPhase if the result carries +-i."""
    _check_n(a.n, b.n)
    power = (0 if a.phase == 1 else 2) + (0 if b.phase == 1 else 2)
    out = []
    for x, y in zip(a.letters, b.letters):
        c, k = _PRODUCT[(x, y)]
        out.append(c)
        power += k
    power %= 4
    if power % 2:
        raise NonRealPhase(f"{a} * {b} has an imaginary phase")
    return PauliString("".join(out), 1 if power == 0 else -1)


@dataclass(frozen=True)
class HermitianOperator:
    """Real linear combination of Pauli strings; signs are folded into coefficients."""

    n: int
    terms: tuple[tuple[float, PauliString], ...] = ()

    def __post_init__(self):
        merged: dict[str, float] = {}
        for coef, p in self.terms:
            coef = float(coef)
            if not np.isfinite(coef):
                raise ValueError(f"non-finite coefficient {coef}")
            _check_n(self.n, p.n)
            merged[p.letters] = merged.get(p.letters, 0.0) + coef * p.phase
        object.__setattr__(
            self, "terms", tuple((c, PauliString(w)) for w, c in merged.items() if c != 0.0)
        )

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[float, PauliString | str]]) -> "HermitianOperator":
        parsed = [(c, PauliString.parse(p) if isinstance(p, str) else p) for c, p in terms]
        if not parsed:
            raise ValueError("cannot infer qubit count from an empty term list")
        return cls(parsed[0][1].n, tuple(parsed))

    def matrix(self) -> np.ndarray:
        dim = 2**self.n
        m = np.zeros((dim, dim), dtype=complex)
        for coef, p in self.terms:
            m += coef * p.matrix()
        return m


@dataclass(frozen=True, eq=False)
class PureState:
    n: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if self.n > MAX_QUBITS:
            raise DimensionMismatch(f"dense representation capped at {MAX_QUBITS} qubits")
        if amp.size != 2**self.n:
            raise DimensionMismatch(f"expected {2**self.n} amplitudes, got {amp.size}")
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > 1e-10:
            raise InvalidState(f"state not normalized (norm^2 = {norm})")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def density(self) -> "MixedState":
        return MixedState(self.n, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class MixedState:
    n: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=complex)
        dim = 2**self.n
        if self.n > MAX_QUBITS:
            raise DimensionMismatch(f"dense representation capped at {MAX_QUBITS} qubits")
        if rho.shape != (dim, dim):
            raise DimensionMismatch(f"expected {dim}x{dim} density matrix, got {rho.shape}")
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise InvalidState(f"trace is {np.trace(rho).real}, not 1")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise InvalidState("density matrix is not Hermitian")
        if np.linalg.eigvalsh(rho).min() < -1e-9:
            raise InvalidState("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    def density(self) -> "MixedState":
        return self

    @classmethod
    def maximally_mixed(cls, n: int) -> "MixedState":
        dim = 2**n
        return cls(n, np.eye(dim, dtype=complex) / dim)


State = Union[PureState, MixedState]


def operator_matrix(op) -> np.ndarray:
    if isinstance(op, np.ndarray):
        return op
    return op.matrix()


def expectation(state: State, op: HermitianOperator | PauliString | np.ndarray) -> float:
    """Tr(op rho) for a Hermitian operator; the imaginary part must vanish."""
    m = operator_matrix(op)
    dim = 2**state.n
    if m.shape != (dim, dim):
        raise DimensionMismatch(f"operator shape {m.shape} does not match {state.n} qubits")
    if isinstance(state, PureState):
        psi = state.amplitudes
        val = np.vdot(psi, m @ psi)
    else:
        val = np.einsum("ij,ji->", m, state.matrix)
    if abs(val.imag) > 1e-9:
        raise ValueError(f"expectation has imaginary part {val.imag:g}; operator not Hermitian?")
    return float(val.real)


def clamp_probability(p: float) -> float:
    if p < -PROB_TOL or p > 1 + PROB_TOL:
        raise OutOfRange(f"probability {p} outside [0, 1]")
    return min(1.0, max(0.0, p))


def born_sample(p, rng: np.random.Generator):
    """Bernoulli(p) draw. Works elementwise on arrays of probabilities."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1) or np.any(np.isnan(arr)):
        raise OutOfRange(f"probability outside [0, 1]: {p}")
    bits = (rng.random(arr.shape) < arr).astype(np.int8)
    return int(bits) if bits.ndim == 0 else bits


def fidelity(state: State, target: PureState) -> float:
    """<target| rho |target>."""
    psi = target.amplitudes
    if isinstance(state, PureState):
        return float(abs(np.vdot(psi, state.amplitudes)) ** 2)
    return float(np.vdot(psi, state.matrix @ psi).real)
