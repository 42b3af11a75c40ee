"""Running the random-setting detection protocol and analysing its outcomes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import EmptyRecord, MismatchedSet, WrongProvenance
from .pauli import State, born_sample
from .stats import confidence_min, kl_divergence
from .states import StateSource
from .witness import UNIFORM_STABILIZER, MeasurementSet


@dataclass(frozen=True, eq=False)
class OutcomeRecord:
    set_id: str
    settings: np.ndarray = field(repr=False)
    outcomes: np.ndarray = field(repr=False)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.array(self.settings, dtype=np.int64).reshape(-1)
        o = np.array(self.outcomes, dtype=np.int8).reshape(-1)
        if s.shape != o.shape:
            raise ValueError("settings and outcomes differ in length")
        if s.size and s.min() < 0:
            raise ValueError("negative setting index")
        if o.size and not np.isin(o, (0, 1)).all():
            raise ValueError("outcomes must be 0 or 1")
        s.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "settings", s)
        object.__setattr__(self, "outcomes", o)

    @property
    def N(self) -> int:
        return int(self.outcomes.size)

    @property
    def S(self) -> int:
        return int(self.outcomes.sum())

    @property
    def rounds(self) -> list[tuple[int, int]]:
        return list(zip(self.settings.tolist(), self.outcomes.tolist()))

    def header(self) -> dict:
        return {"format": io.FORMAT, "type": "outcome-record", "set_id": self.set_id,
                "n_rounds": self.N, **self.metadata}

    def to_jsonl(self) -> str:
        return io.record_lines(self.header(), self.settings, self.outcomes)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str, where: str = "record") -> "OutcomeRecord":
        header, settings, outcomes = io.parse_record_lines(text, where)
        meta = {k: v for k, v in header.items() if k not in ("format", "type", "set_id", "n_rounds")}
        if "n_rounds" in header and header["n_rounds"] != len(outcomes):
            raise io.ConfigError(f"{where}: header says {header['n_rounds']} rounds, found {len(outcomes)}")
        return cls(header.get("set_id", ""), settings, outcomes, meta)

    @classmethod
    def load(cls, path: str | Path) -> "OutcomeRecord":
        return cls.from_jsonl(Path(path).read_text(), str(path))


@dataclass(frozen=True)
class VerificationReport:
    N: int
    S: int
    p_obs: float
    delta_full: float
    confidence_full: float
    conclusive_full: bool
    delta_bisep: float | None
    confidence_bisep: float | None
    conclusive_bisep: bool | None
    curve: tuple[tuple[int, int, float, float | None], ...] = field(repr=False)
    fidelity: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        return {
            "format": io.FORMAT,
            "type": "verification-report",
            "N": self.N,
            "S": self.S,
            "p_obs": self.p_obs,
            "delta_full": self.delta_full,
            "confidence_full": self.confidence_full,
            "conclusive_full": self.conclusive_full,
            "delta_bisep": self.delta_bisep,
            "confidence_bisep": self.confidence_bisep,
            "conclusive_bisep": self.conclusive_bisep,
            "fidelity": None if self.fidelity is None
            else {"estimate": self.fidelity[0], "sigma": self.fidelity[1]},
        }


def _probability_table(src: StateSource, mset: MeasurementSet) -> np.ndarray:
    """Success probability of every setting on every distinct source state."""
    return np.stack([mset.success_probabilities(st) for st in src.states])


def _as_source(src: StateSource | State) -> StateSource:
    return src if isinstance(src, StateSource) else StateSource.constant(src)


def run_protocol(src: StateSource | State, mset: MeasurementSet, N: int,
                 rng: np.random.Generator, metadata: dict | None = None) -> OutcomeRecord:
    """Draw N settings with probabilities eps_k and measure one fresh copy per round."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    src = _as_source(src)
    state_idx = np.array([src.state_index(t) for t in range(N)])
    table = _probability_table(src, mset)
    settings = rng.choice(len(mset), size=N, p=mset.weights)
    outcomes = born_sample(table[state_idx, settings], rng)
    return OutcomeRecord(io.set_id(mset), settings, outcomes, dict(metadata or {}))


def _check_record(record: OutcomeRecord, mset: MeasurementSet) -> None:
    if record.set_id != io.set_id(mset):
        raise MismatchedSet(f"record belongs to set {record.set_id!r}, not {io.set_id(mset)!r}")
    if record.N and record.settings.max() >= len(mset):
        raise MismatchedSet(f"setting index {record.settings.max()} outside set of size {len(mset)}")


def analyze(record: OutcomeRecord, mset: MeasurementSet, p_s_full: float | None = None) -> VerificationReport:
    """Deviation from the separable bound(s) and the confidence curve.

    ``p_s_full`` overrides the set's full-separability bound (e.g. a numerical estimate).
    """
    _check_record(record, mset)
    if record.N == 0:
        raise EmptyRecord("cannot analyse a record with no rounds")
    p_full = mset.p_s_full if p_s_full is None else p_s_full
    p_bis = mset.p_s_bisep
    S_prefix = np.cumsum(record.outcomes, dtype=np.int64)
    curve = []
    for i, s in enumerate(S_prefix.tolist()):
        n = i + 1
        c_full = confidence_min(s / n - p_full, p_full, n)
        c_bis = None if p_bis is None else confidence_min(s / n - p_bis, p_bis, n)
        curve.append((n, s, c_full, c_bis))
    N, S = record.N, record.S
    p_obs = S / N
    d_full = p_obs - p_full
    d_bis = None if p_bis is None else p_obs - p_bis
    fid = None
    if mset.provenance in UNIFORM_STABILIZER:
        fid = estimate_fidelity(record)
    return VerificationReport(
        N=N,
        S=S,
        p_obs=p_obs,
        delta_full=d_full,
        confidence_full=curve[-1][2],
        conclusive_full=d_full > 0,
        delta_bisep=d_bis,
        confidence_bisep=curve[-1][3],
        conclusive_bisep=None if d_bis is None else d_bis > 0,
        curve=tuple(curve),
        fidelity=fid,
    )


def estimate_fidelity(record: OutcomeRecord) -> tuple[float, float]:
    """Fidelity with the stabilized state from the mean success (1 + F)/2.

    The error bar is the first-order binomial standard error.
    """
    provenance = record.set_id.split(":", 1)[0]
    if provenance not in UNIFORM_STABILIZER:
        raise WrongProvenance(f"fidelity needs a uniform stabilizer set, record is from {provenance!r}")
    if record.N == 0:
        raise EmptyRecord("cannot estimate fidelity from an empty record")
    p = record.S / record.N
    return 2 * p - 1, 2 * math.sqrt(p * (1 - p) / record.N)


@dataclass(frozen=True)
class FalsePositiveResult:
    rate: float
    bound: float
    sigma: float
    trials: int

    @property
    def within_bound(self) -> bool:
        return self.rate <= self.bound + 3 * self.sigma


def false_positive_trial(sep_state: StateSource | State, mset: MeasurementSet, N: int,
                         delta_star: float, trials: int, rng: np.random.Generator,
                         p_s: float | None = None, chunk: int = 20000) -> FalsePositiveResult:
    """Fraction of independent protocol runs on a separable source with delta >= delta_star.

    ``rate`` should stay below exp(-N D(p_s + delta* || p_s)) up to sampling noise;
    ``sigma`` is the binomial standard error of ``rate``.
    """
    src = _as_source(sep_state)
    p_s = mset.p_s_full if p_s is None else p_s
    state_idx = np.array([src.state_index(t) for t in range(N)])
    table = _probability_table(src, mset)
    # S >= N (p_s + delta*), guarding the float boundary
    threshold = math.ceil(N * (p_s + delta_star) - 1e-9)
    hits = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        settings = rng.choice(len(mset), size=(m, N), p=mset.weights)
        probs = table[state_idx[None, :], settings]
        S = (rng.random((m, N)) < probs).sum(axis=1)
        hits += int((S >= threshold).sum())
        done += m
    x = min(p_s + delta_star, 1.0)
    bound = math.exp(-N * kl_divergence(x, p_s))
    rate = hits / trials
    return FalsePositiveResult(rate, bound, math.sqrt(rate * (1 - rate) / trials), trials)
