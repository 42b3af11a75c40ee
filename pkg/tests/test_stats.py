import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fewcopy.errors import DomainError
from fewcopy.stats import confidence_min, is_conclusive, kl_divergence, n_max, rate_K


def binomial_tail(N: int, p: float, k: int) -> float:
    """Exact P(S >= k) for S ~ Binomial(N, p) by direct summation."""
    return math.fsum(math.comb(N, j) * p**j * (1 - p) ** (N - j) for j in range(max(k, 0), N + 1))


def test_kl_values():
    assert kl_divergence(1, 0.75) == pytest.approx(math.log(4 / 3), rel=1e-15)
    assert 1 / kl_divergence(1, 0.75) == pytest.approx(3.476059, abs=1e-6)
    assert kl_divergence(0.6, 0.6) == 0.0
    # mpmath (30 digits): 0.0482384472788578...
    assert kl_divergence(0.875, 0.75) == pytest.approx(0.0482384472788578, rel=1e-12)


def test_kl_boundary_limits():
    assert kl_divergence(0, 0.3) == pytest.approx(math.log(1 / 0.7))
    assert kl_divergence(1, 0.3) == pytest.approx(math.log(1 / 0.3))
    for y in (0.0, 1.0):
        with pytest.raises(DomainError):
            kl_divergence(0.5, y)


@given(st.floats(0, 1), st.floats(0.001, 0.999))
def test_kl_nonnegative(x, y):
    assert kl_divergence(x, y) >= 0


def test_confidence_examples():
    assert confidence_min(0.25, 0.75, 16) == pytest.approx(1 - 0.75**16, abs=1e-15)
    assert confidence_min(0.25, 0.75, 16) == pytest.approx(0.98997, abs=1e-5)
    assert confidence_min(19 / 20 - 5 / 8, 5 / 8, 20) == pytest.approx(0.997369531578884, abs=1e-12)
    assert confidence_min(0.0, 0.6, 10) == 0.0 and not is_conclusive(0.0)
    assert confidence_min(-0.1, 0.6, 10) == 0.0
    with pytest.raises(DomainError):
        confidence_min(0.5, 0.75, 3)
    with pytest.raises(DomainError):
        confidence_min(0.1, 0.5, 0)


def test_confidence_monotone_on_grid():
    for p_s in (0.3, 0.5625, 0.625, 0.75):
        for delta in np.linspace(0.01, 1 - p_s, 7):
            values = [confidence_min(delta, p_s, N) for N in range(1, 80)]
            assert all(b >= a for a, b in zip(values, values[1:]))
        for N in (1, 10, 50):
            values = [confidence_min(d, p_s, N) for d in np.linspace(0.001, 1 - p_s, 30)]
            assert all(b >= a for a, b in zip(values, values[1:]))


def test_n_max_examples():
    assert n_max(0.99, 0.75, 1) == pytest.approx(16.0078455593, abs=1e-9)
    assert n_max(0, 0.75, 1) == 0
    assert n_max(0.99, 5 / 8, 1) == pytest.approx(9.79815877886, abs=1e-9)
    with pytest.raises(DomainError):
        n_max(0.99, 0.8, 0.7)


def test_rate_modes():
    assert rate_K(0.75, 0.25) == pytest.approx(3.476059, abs=1e-6)
    assert rate_K(0.2, 0.0, "exponential-ps", alpha_n=10) == pytest.approx(0.1)
    exact = rate_K(0.5, 1e-3)
    approx = rate_K(0.5, 1e-3, "small-gap")
    assert abs(approx / exact - 1) < 0.01
    with pytest.raises(DomainError):
        rate_K(0.5, 0.1, "exponential-ps")
    with pytest.raises(DomainError):
        rate_K(0.5, 0.1, "nope")


@pytest.mark.parametrize("p_s", [0.3, 0.5, 9 / 16, 5 / 8, 0.75, 0.9])
def test_chernoff_bound_dominates_exact_tail(p_s):
    for N in range(1, 61):
        for delta in np.linspace(0.01, 1 - p_s, 6):
            k = math.ceil(N * (p_s + delta) - 1e-12)
            assert binomial_tail(N, p_s, k) <= math.exp(-N * kl_divergence(min(p_s + delta, 1), p_s)) * (1 + 1e-12)
