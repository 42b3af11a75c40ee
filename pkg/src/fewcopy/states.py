"""Graph and cluster states, stabilizer groups, and per-round state sources."""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DependentGenerators,
    DimensionMismatch,
    NonCommutingGenerators,
    OutOfRange,
    ScheduleExhausted,
)
from .pauli import MAX_QUBITS, MixedState, PauliString, PureState, State, pauli_multiply


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        norm = set()
        for e in self.edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge {(u, v)} outside [0, {self.n})")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    def neighbours(self, v: int) -> list[int]:
        return sorted({b if a == v else a for a, b in self.edges if v in (a, b)})

    def generators(self) -> list[PauliString]:
        """Canonical stabilizer generators X_v prod_{u in N(v)} Z_u."""
        gens = []
        for v in range(self.n):
            ops = {u: "Z" for u in self.neighbours(v)}
            ops[v] = "X"
            gens.append(PauliString.from_sparse(self.n, ops))
        return gens


# Two vertical bars 0-1-2 and 3-4-5 joined at their middles.
H_GRAPH = Graph(6, frozenset({(0, 1), (1, 2), (3, 4), (4, 5), (1, 4)}))


def _bit(index: np.ndarray, q: int, n: int) -> np.ndarray:
    return (index >> (n - 1 - q)) & 1


def graph_state(g: Graph) -> PureState:
    """CZ on every edge applied to |+>^n."""
    if g.n > MAX_QUBITS:
        raise DimensionMismatch(f"dense representation capped at {MAX_QUBITS} qubits")
    idx = np.arange(2**g.n)
    sign = np.ones(idx.size)
    for u, v in g.edges:
        sign[(_bit(idx, u, g.n) & _bit(idx, v, g.n)) == 1] *= -1
    return PureState(g.n, sign / np.sqrt(idx.size))


@functools.lru_cache(maxsize=None)
def cluster6() -> PureState:
    """(|000000> + |000111> + |111000> - |111111>)/2 with H -> 0, V -> 1."""
    amp = np.zeros(64, dtype=complex)
    amp[0b000000] = 0.5
    amp[0b000111] = 0.5
    amp[0b111000] = 0.5
    amp[0b111111] = -0.5
    return PureState(6, amp)


def generators6() -> list[PauliString]:
    """Generators G1..G6 of the six-qubit cluster state."""
    return [
        PauliString("ZZIIII"),
        PauliString("XXXIZI"),
        PauliString("IZZIII"),
        PauliString("IIIZZI"),
        PauliString("IZIXXX"),
        PauliString("IIIIZZ"),
    ]


def stabilizer_group(gens: Sequence[PauliString], n: int | None = None) -> list[PauliString]:
    """All 2^k subset products; element ``m`` is the product of gens whose bit is set in m.

    ``n`` is only needed when ``gens`` is empty.
    """
    gens = list(gens)
    if not gens:
        if n is None:
            raise ValueError("pass n for an empty generator list")
        return [PauliString.identity(n)]
    for a, b in itertools.combinations(gens, 2):
        if not a.commutes_with(b):
            raise NonCommutingGenerators(f"{a} and {b} anticommute")
    group = [PauliString.identity(gens[0].n)]
    for g in gens:
        group = group + [pauli_multiply(s, g) for s in group]
    words = {s.letters for s in group}
    if len(words) != len(group):
        raise DependentGenerators("generators are not independent")
    return group


def product_state(blochs: Sequence[Sequence[float]]) -> PureState:
    """Tensor product of single-qubit pure states given by unit Bloch vectors."""
    amp = np.ones(1, dtype=complex)
    for b in blochs:
        amp = np.kron(amp, bloch_to_ket(b))
    return PureState(len(blochs), amp)


def bloch_to_ket(b: Sequence[float]) -> np.ndarray:
    x, y, z = (float(c) for c in b)
    r = np.sqrt(x * x + y * y + z * z)
    if r == 0:
        raise ValueError("Bloch vector of a pure state cannot be zero")
    x, y, z = x / r, y / r, z / r
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.arctan2(y, x)
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def ket_to_bloch(v: np.ndarray) -> list[float]:
    a, b = v / np.linalg.norm(v)
    return [2 * float((np.conj(a) * b).real), 2 * float((np.conj(a) * b).imag),
            float(abs(a) ** 2 - abs(b) ** 2)]


def basis_state(bits: str) -> PureState:
    amp = np.zeros(2 ** len(bits), dtype=complex)
    amp[int(bits, 2)] = 1.0
    return PureState(len(bits), amp)


def white_noise(state: State, visibility: float) -> MixedState:
    """v |psi><psi| + (1 - v) 1/2^n."""
    if not 0.0 <= visibility <= 1.0:
        raise OutOfRange(f"visibility {visibility} outside [0, 1]")
    dim = 2**state.n
    rho = visibility * state.density().matrix + (1 - visibility) * np.eye(dim) / dim
    return MixedState(state.n, rho)


def dephase(state: State, rate: float) -> MixedState:
    """Independent Z-dephasing rho -> (1-p) rho + p Z rho Z on every qubit."""
    if not 0.0 <= rate <= 1.0:
        raise OutOfRange(f"dephasing rate {rate} outside [0, 1]")
    rho = state.density().matrix
    idx = np.arange(rho.shape[0])
    flips = np.vectorize(lambda k: bin(k).count("1"))(idx[:, None] ^ idx[None, :])
    return MixedState(state.n, rho * (1 - 2 * rate) ** flips)


def build_state(spec: dict[str, Any]) -> State:
    """Construct a named state from a JSON-style description.

    Recognised names: cluster6, h-graph, graph (n, edges), basis (bits),
    plus (n), product (bloch), maximally-mixed (n). Optional ``visibility``
    and ``dephasing`` keys apply white noise / dephasing on top.
    """
    try:
        name = spec["name"]
    except (KeyError, TypeError):
        raise ConfigError(f"state spec needs a 'name' field: {spec!r}") from None
    try:
        if name == "cluster6":
            st: State = cluster6()
        elif name == "h-graph":
            st = graph_state(H_GRAPH)
        elif name == "graph":
            st = graph_state(Graph(int(spec["n"]), frozenset(tuple(e) for e in spec["edges"])))
        elif name == "basis":
            st = basis_state(str(spec["bits"]))
        elif name == "plus":
            st = product_state([[1, 0, 0]] * int(spec["n"]))
        elif name == "product":
            st = product_state(spec["bloch"])
        elif name == "maximally-mixed":
            st = MixedState.maximally_mixed(int(spec["n"]))
        else:
            raise ConfigError(f"unknown state name {name!r}")
    except KeyError as exc:
        raise ConfigError(f"state {name!r} is missing field {exc.args[0]!r}") from None
    if "visibility" in spec:
        st = white_noise(st, float(spec["visibility"]))
    if "dephasing" in spec:
        st = dephase(st, float(spec["dephasing"]))
    return st


SOURCE_KINDS = ("constant", "white-noise", "local-dephasing", "drift-schedule")


@dataclass(frozen=True, eq=False)
class StateSource:
    """Yields the state of each protocol round.

    ``states`` holds the distinct states the source can emit; for every kind
    except ``drift-schedule`` it has one entry.
    """

    kind: str
    states: tuple[MixedState, ...]
    cycle: bool = False
    config: dict | None = None

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ConfigError(f"unknown source kind {self.kind!r}")
        if not self.states:
            raise ConfigError("a source needs at least one state")
        ns = {s.n for s in self.states}
        if len(ns) != 1:
            raise DimensionMismatch(f"schedule mixes qubit counts {sorted(ns)}")

    @property
    def n(self) -> int:
        return self.states[0].n

    @classmethod
    def constant(cls, state: State) -> "StateSource":
        return cls("constant", (state.density(),))

    @classmethod
    def white_noise(cls, state: State, visibility: float) -> "StateSource":
        return cls("white-noise", (white_noise(state, visibility),))

    @classmethod
    def local_dephasing(cls, state: State, rate: float) -> "StateSource":
        return cls("local-dephasing", (dephase(state, rate),))

    @classmethod
    def drift(cls, states: Sequence[State], cycle: bool = False) -> "StateSource":
        return cls("drift-schedule", tuple(s.density() for s in states), cycle)

    @classmethod
    def from_config(cls, cfg: dict[str, Any]) -> "StateSource":
        """Build from e.g. ``{"kind": "white-noise", "state": {"name": "cluster6"}, "visibility": 0.746}``."""
        kind = cfg.get("kind")
        try:
            if kind == "constant":
                src = cls.constant(build_state(cfg["state"]))
            elif kind == "white-noise":
                src = cls.white_noise(build_state(cfg["state"]), float(cfg["visibility"]))
            elif kind == "local-dephasing":
                src = cls.local_dephasing(build_state(cfg["state"]), float(cfg["rate"]))
            elif kind == "drift-schedule":
                src = cls.drift([build_state(s) for s in cfg["states"]], bool(cfg.get("cycle", False)))
            else:
                raise ConfigError(f"unknown source kind {kind!r}; expected one of {SOURCE_KINDS}")
        except KeyError as exc:
            raise ConfigError(f"source {kind!r} is missing field {exc.args[0]!r}") from None
        return cls(src.kind, src.states, src.cycle, dict(cfg))

    def state_index(self, round: int) -> int:
        if round < 0:
            raise OutOfRange(f"round must be non-negative, got {round}")
        if self.kind != "drift-schedule":
            return 0
        if self.cycle:
            return round % len(self.states)
        if round >= len(self.states):
            raise ScheduleExhausted(f"schedule has {len(self.states)} states, round {round} requested")
        return round

    def describe(self) -> dict:
        if self.config is not None:
            return self.config
        return {"kind": self.kind, "n_states": len(self.states), "cycle": self.cycle}


def next_state(src: StateSource, round: int) -> MixedState:
    return src.states[src.state_index(round)]
