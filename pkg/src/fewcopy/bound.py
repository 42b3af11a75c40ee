"""See-saw estimate of the largest weighted success probability over product states."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .states import ket_to_bloch, product_state
from .witness import MeasurementSet

DEFAULT_RESTARTS = 256
DEFAULT_TOL = 1e-9
MAX_SWEEPS = 500


@dataclass
class BoundResult:
    value: float
    argmax: list[list[float]]
    restarts_used: int
    converged: bool
    history: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "format": 1,
            "type": "bound-result",
            "value": self.value,
            "argmax_bloch": self.argmax,
            "restarts_used": self.restarts_used,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundResult":
        return cls(float(d["value"]), [list(map(float, b)) for b in d["argmax_bloch"]],
                   int(d["restarts_used"]), bool(d["converged"]))

    def state(self):
        return product_state(self.argmax)


def _random_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def _embed(kets: list[np.ndarray], j: int) -> np.ndarray:
    """2^n x 2 matrix: the product of all kets except qubit j, which stays open."""
    m = np.ones((1, 1), dtype=complex)
    for i, k in enumerate(kets):
        m = np.kron(m, np.eye(2) if i == j else k[:, None])
    return m


def _product_ket(kets: list[np.ndarray]) -> np.ndarray:
    v = np.ones(1, dtype=complex)
    for k in kets:
        v = np.kron(v, k)
    return v


def seesaw_run(op: np.ndarray, n: int, rng: np.random.Generator, tol: float = DEFAULT_TOL,
               max_sweeps: int = MAX_SWEEPS):
    """One ascent from a Haar-random product state.

    Returns (value, kets, converged, per-sweep values).
    """
    kets = [_random_qubit(rng) for _ in range(n)]
    v = _product_ket(kets)
    values = [float(np.vdot(v, op @ v).real)]
    converged = False
    for _ in range(max_sweeps):
        for j in range(n):
            phi = _embed(kets, j)
            eff = phi.conj().T @ op @ phi
            w, vecs = np.linalg.eigh((eff + eff.conj().T) / 2)
            kets[j] = vecs[:, -1]
        v = _product_ket(kets)
        values.append(float(np.vdot(v, op @ v).real))
        if values[-1] - values[-2] < tol:
            converged = True
            break
    return values[-1], kets, converged, values


def fullsep_bound(mset: MeasurementSet, restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL,
                  rng: np.random.Generator | int | None = None,
                  max_sweeps: int = MAX_SWEEPS) -> BoundResult:
    """Best value of sum_k eps_k <phi|M_k|phi> found over pure product states.

    This is a lower estimate of the separable maximum. Restart ``i`` is seeded
    with ``[master, i]`` so a larger restart count only adds runs.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if isinstance(rng, np.random.Generator):
        master = int(rng.integers(2**63))
    elif rng is None:
        master = int(np.random.SeedSequence().entropy % 2**63)
    else:
        master = int(rng)
    op = mset.weighted_operator()
    best = None
    for i in range(restarts):
        val, kets, conv, hist = seesaw_run(op, mset.n, np.random.default_rng([master, i]), tol, max_sweeps)
        if best is None or val > best[0]:
            best = (val, kets, conv, hist)
    val, kets, conv, hist = best
    return BoundResult(
        value=float(min(max(val, 0.0), 1.0)),
        argmax=[ket_to_bloch(k) for k in kets],
        restarts_used=restarts,
        converged=conv,
        history=hist,
    )
