"""Turning entanglement witnesses into weighted sets of binary observables."""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyDecomposition, NotAGroup
from .observables import BinaryObservable, success_probability
from .pauli import HermitianOperator, PauliString, State, pauli_multiply
from .states import generators6, stabilizer_group

EIGEN_CUTOFF = 1e-10
CLUSTER_TOL = 1e-8

PROVENANCES = ("translated", "builtin-W1", "builtin-W2", "graph-witness")
# Sets whose weighted success equals (1 + F)/2 for the stabilized target state.
UNIFORM_STABILIZER = ("graph-witness", "builtin-W2")


@dataclass(frozen=True)
class WitnessSpec:
    """Witness W = g_s 1 - sum_k W_k.

    ``threshold_class`` says which bound g_s is: ``"full"`` (fully separable)
    or ``"bisep"`` (biseparable).
    """

    n: int
    g_s: float
    local_terms: tuple[HermitianOperator, ...]
    g_e: float | None = None
    p_s_bisep: float | None = None
    threshold_class: str = "full"

    def __post_init__(self):
        if not self.local_terms:
            raise ValueError("a witness needs at least one local term")
        for t in self.local_terms:
            if t.n != self.n:
                raise DimensionMismatch(f"term acts on {t.n} qubits, witness on {self.n}")
        if self.threshold_class not in ("full", "bisep"):
            raise ValueError(f"threshold_class must be 'full' or 'bisep', got {self.threshold_class!r}")


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    observables: tuple[BinaryObservable, ...]
    weights: np.ndarray = field(repr=False)
    p_s_full: float
    p_e: float | None = None
    p_s_bisep: float | None = None
    provenance: str = "translated"
    tau: float | None = None
    shift: float | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if len(w) != len(self.observables) or not self.observables:
            raise ValueError("need one positive weight per observable")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        if len({m.n for m in self.observables}) != 1:
            raise DimensionMismatch("observables act on different qubit counts")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if not 0 <= self.p_s_full <= 1:
            raise ValueError(f"p_s_full = {self.p_s_full} outside [0, 1]")
        if self.p_s_bisep is not None and not self.p_s_full <= self.p_s_bisep + 1e-12:
            raise ValueError("p_s_full must not exceed p_s_bisep")
        if self.p_e is not None:
            top = self.p_s_bisep if self.p_s_bisep is not None else self.p_s_full
            if not top < self.p_e <= 1 + 1e-12:
                raise ValueError(f"need p_s < p_e <= 1, got p_s = {top}, p_e = {self.p_e}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.observables[0].n

    def __len__(self) -> int:
        return len(self.observables)

    def bound(self, which: str) -> float | None:
        return {"full": self.p_s_full, "bisep": self.p_s_bisep}[which]

    def weighted_operator(self) -> np.ndarray:
        """sum_k eps_k M_k as a dense matrix."""
        return np.einsum("k,kij->ij", self.weights, np.stack([m.matrix for m in self.observables]))

    def success_probabilities(self, state: State) -> np.ndarray:
        return np.array([success_probability(state, m) for m in self.observables])

    def mean_success(self, state: State) -> float:
        return float(self.weights @ self.success_probabilities(state))

    def replace(self, **changes) -> "MeasurementSet":
        fields = dict(
            observables=self.observables, weights=self.weights, p_s_full=self.p_s_full,
            p_e=self.p_e, p_s_bisep=self.p_s_bisep, provenance=self.provenance,
            tau=self.tau, shift=self.shift,
        )
        fields.update(changes)
        return MeasurementSet(**fields)


def _eigen_projectors(m: np.ndarray) -> list[tuple[float, np.ndarray]]:
    """Group eigenvectors by (clustered) eigenvalue; drop eigenvalues <= cutoff."""
    vals, vecs = np.linalg.eigh(m)
    out = []
    start = 0
    while start < len(vals):
        stop = start + 1
        while stop < len(vals) and vals[stop] - vals[start] < CLUSTER_TOL:
            stop += 1
        lam = float(vals[start:stop].mean())
        if lam > EIGEN_CUTOFF:
            v = vecs[:, start:stop]
            p = v @ v.conj().T
            out.append((lam, (p + p.conj().T) / 2))
        start = stop
    return out


def translate(w: WitnessSpec) -> MeasurementSet:
    """Spectral translation of a witness into weighted binary observables.

    A single shift a >= 0 makes every W_k + a*1 positive semidefinite; each
    shifted term is split into eigen-projectors weighted by eigenvalue / tau.
    """
    mats = [t.matrix() for t in w.local_terms]
    lam_min = min(float(np.linalg.eigvalsh(m)[0]) for m in mats)
    a = max(0.0, -lam_min)
    if a < EIGEN_CUTOFF:
        a = 0.0
    dim = 2**w.n
    observables, lams = [], []
    for m in mats:
        for lam, proj in _eigen_projectors(m + a * np.eye(dim)):
            lams.append(lam)
            observables.append(BinaryObservable(w.n, proj))
    if not observables:
        raise EmptyDecomposition("every shifted term vanishes")
    lams = np.array(lams)
    tau = float(lams.sum())
    q = len(w.local_terms)
    p_s = (w.g_s + a * q) / tau
    p_e = None if w.g_e is None else (w.g_e + a * q) / tau
    p_bisep = w.p_s_bisep
    if w.threshold_class == "bisep":
        # a biseparable threshold also bounds every fully separable state
        p_bisep = p_s
    return MeasurementSet(
        observables=tuple(observables),
        weights=_normalized(lams / tau),
        p_s_full=p_s,
        p_e=p_e,
        p_s_bisep=p_bisep,
        provenance="translated",
        tau=tau,
        shift=a,
    )


def _normalized(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    w = w / w.sum()
    # push the rounding residue into the largest weight so the sum is exact
    w[np.argmax(w)] += 1.0 - w.sum()
    return w


def projector_terms(factors: Sequence[PauliString], coefficient: float = 1.0) -> HermitianOperator:
    """Pauli expansion of ``coefficient * prod (1 + G)/2``."""
    factors = list(factors)
    n = factors[0].n
    k = len(factors)
    terms = []
    for subset in itertools.product((0, 1), repeat=k):
        p = PauliString.identity(n)
        for bit, g in zip(subset, factors):
            if bit:
                p = pauli_multiply(p, g)
        terms.append((coefficient / 2**k, p))
    return HermitianOperator(n, tuple(terms))


def _is_group(stabilizers: Sequence[PauliString]) -> bool:
    keys = {(s.letters, s.phase) for s in stabilizers}
    if len(keys) != len(stabilizers):
        return False
    if (("I" * stabilizers[0].n), 1) not in keys:
        return False
    try:
        for a in stabilizers:
            for b in stabilizers:
                c = pauli_multiply(a, b)
                if (c.letters, c.phase) not in keys:
                    return False
    except Exception:
        return False
    return True


def graph_witness(
    stabilizers: Sequence[PauliString],
    p_s_full: float | None = None,
    provenance: str = "graph-witness",
) -> MeasurementSet:
    """Uniformly weighted M_k = (1 + S_k)/2 over a full stabilizer group.

    When ``p_s_full`` is not supplied the biseparable bound 3/4 is used, which
    is valid (if loose) for fully separable states too.
    """
    stabilizers = list(stabilizers)
    if not stabilizers or len(stabilizers) != 2 ** stabilizers[0].n or not _is_group(stabilizers):
        raise NotAGroup("expected a closed stabilizer group of size 2^n containing the identity")
    L = len(stabilizers)
    return MeasurementSet(
        observables=tuple(BinaryObservable.from_factors([s]) for s in stabilizers),
        weights=np.full(L, 1.0 / L),
        p_s_full=0.75 if p_s_full is None else p_s_full,
        p_e=1.0,
        p_s_bisep=0.75,
        provenance=provenance,
    )


@functools.lru_cache(maxsize=None)
def builtin_w1() -> MeasurementSet:
    """Two-setting set {prod_{1,3,5}(1+G)/2, prod_{2,4,6}(1+G)/2}."""
    g = generators6()
    m1 = BinaryObservable.from_factors([g[0], g[2], g[4]])
    m2 = BinaryObservable.from_factors([g[1], g[3], g[5]])
    return MeasurementSet(
        observables=(m1, m2),
        weights=np.array([0.5, 0.5]),
        p_s_full=9 / 16,
        p_e=1.0,
        p_s_bisep=3 / 4,
        provenance="builtin-W1",
        tau=4.0,
        shift=0.0,
    )


@functools.lru_cache(maxsize=None)
def builtin_w2() -> MeasurementSet:
    """All 64 stabilizers of the six-qubit cluster state."""
    return graph_witness(stabilizer_group(generators6()), p_s_full=5 / 8, provenance="builtin-W2")


def w1_witness_spec() -> WitnessSpec:
    """W1 in witness form: g_s = 3 (biseparable), O = 2 M1 + 2 M2."""
    g = generators6()
    return WitnessSpec(
        n=6,
        g_s=3.0,
        local_terms=(
            projector_terms([g[0], g[2], g[4]], 2.0),
            projector_terms([g[1], g[3], g[5]], 2.0),
        ),
        g_e=4.0,
        threshold_class="bisep",
    )
