"""Kullback-Leibler confidence bounds and copy-count estimates (natural log)."""
from __future__ import annotations

import math

from .errors import DomainError


def _xlogy_ratio(x: float, y: float) -> float:
    # x * ln(x / y) with the 0 * ln 0 = 0 convention
    return 0.0 if x == 0 else x * math.log(x / y)


def kl_divergence(x: float, y: float) -> float:
    """Relative entropy D(x||y) between Bernoulli(x) and Bernoulli(y)."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x = {x} outside [0, 1]")
    if not 0.0 < y < 1.0:
        raise DomainError(f"y = {y} must lie strictly inside (0, 1)")
    d = _xlogy_ratio(x, y) + _xlogy_ratio(1.0 - x, 1.0 - y)
    return max(d, 0.0)


def confidence_min(delta: float, p_s: float, N: int) -> float:
    """Lower bound 1 - exp(-N D(p_s + delta || p_s)) on the detection confidence.

    Returns 0.0 when ``delta <= 0`` (the run is inconclusive); see
    :func:`is_conclusive`.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if p_s + delta > 1 + 1e-12:
        raise DomainError(f"p_s + delta = {p_s + delta} exceeds 1")
    if delta <= 0:
        return 0.0
    x = min(p_s + delta, 1.0)
    return -math.expm1(-N * kl_divergence(x, p_s))


def is_conclusive(delta: float) -> bool:
    return delta > 0


def n_max(C0: float, p_s: float, p_e: float) -> float:
    """Copies needed on average to reach confidence C0 for the target state."""
    if not 0.0 <= C0 < 1.0:
        raise DomainError(f"C0 = {C0} outside [0, 1)")
    if not 0.0 < p_s < p_e <= 1.0:
        raise DomainError(f"need 0 < p_s < p_e <= 1, got p_s = {p_s}, p_e = {p_e}")
    return -math.log1p(-C0) / kl_divergence(p_e, p_s)


def rate_K(p_s: float, delta0: float, mode: str = "exact", alpha_n: float | None = None) -> float:
    """Logarithmic growth rate K of the copy count.

    ``exact`` is 1/D(p_s + delta0 || p_s); ``exponential-ps`` approximates it by
    1/(alpha n) when p_s = exp(-alpha n); ``small-gap`` by 2 p_s (1 - p_s) / delta0^2.
    """
    if mode == "exact":
        if not 0.0 < p_s < p_s + delta0 <= 1.0 + 1e-12:
            raise DomainError(f"need 0 < p_s < p_s + delta0 <= 1, got {p_s}, {delta0}")
        return 1.0 / kl_divergence(min(p_s + delta0, 1.0), p_s)
    if mode == "exponential-ps":
        if alpha_n is None or alpha_n <= 0:
            raise DomainError("exponential-ps needs alpha_n > 0")
        return 1.0 / alpha_n
    if mode == "small-gap":
        if delta0 <= 0:
            raise DomainError("small-gap needs delta0 > 0")
        return 2.0 * p_s * (1.0 - p_s) / delta0**2
    raise DomainError(f"unknown mode {mode!r}")
