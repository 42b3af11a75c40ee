import numpy as np
import pytest

from fewcopy.errors import IncompatibleSupports, NotAProjector
from fewcopy.observables import (
    BinaryObservable,
    local_setting_of,
    local_success_probability,
    success_probability,
)
from fewcopy.pauli import MixedState, PauliString, PureState
from fewcopy.states import basis_state, cluster6, generators6
from fewcopy.witness import builtin_w1, builtin_w2


def random_pure(n, rng):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return PureState(n, v / np.linalg.norm(v))


def test_projector_checks():
    with pytest.raises(NotAProjector):
        BinaryObservable(1, np.diag([1.0, 0.5]))
    with pytest.raises(NotAProjector):
        BinaryObservable.from_factors([PauliString("X"), PauliString("Z")])


def test_w1_and_w2_success_probabilities():
    for mset in (builtin_w1(), builtin_w2()):
        for m in mset.observables:
            assert success_probability(cluster6(), m) == pytest.approx(1.0)
            assert np.max(np.abs(m.matrix @ m.matrix - m.matrix)) < 1e-9
            assert np.max(np.abs(m.matrix - m.matrix.conj().T)) < 1e-12
    assert success_probability(basis_state("000000"), builtin_w1().observables[0]) == pytest.approx(0.5)


def test_maximally_mixed_gives_half_on_nontrivial_stabilizers():
    rho = MixedState.maximally_mixed(6)
    for m in builtin_w2().observables:
        expected = 1.0 if m.factors[0].is_identity() else 0.5
        assert success_probability(rho, m) == pytest.approx(expected, abs=1e-12)


def test_pure_and_mixed_paths_agree():
    rng = np.random.default_rng(5)
    psi = random_pure(6, rng)
    for m in builtin_w1().observables:
        direct = float(np.vdot(psi.amplitudes, m.matrix @ psi.amplitudes).real)
        assert success_probability(psi, m) == pytest.approx(direct, abs=1e-12)
        assert success_probability(psi, m) == pytest.approx(success_probability(psi.density(), m), abs=1e-12)


def test_local_setting_of_w1():
    m1, m2 = builtin_w1().observables
    s1 = local_setting_of(m1)
    assert s1.bases == "ZZZXXX"
    assert s1.parities == (((0, 1), 1), ((1, 2), 1), ((1, 3, 4, 5), 1))
    assert local_setting_of(m2).bases == "XXXZZZ"


def test_local_setting_single_stabilizer():
    s = local_setting_of(BinaryObservable.from_factors([PauliString("ZZIIII")]))
    assert s.bases[:2] == "ZZ"
    assert s.parities == (((0, 1), 1),)


def test_incompatible_supports():
    m = BinaryObservable.from_factors([PauliString("XX"), PauliString("ZZ")])
    with pytest.raises(IncompatibleSupports):
        local_setting_of(m)
    assert m.local_setting is None


def test_negative_sign_parity():
    m = BinaryObservable.from_factors([PauliString("YY", -1)])
    s = local_setting_of(m)
    assert s.succeeds([0, 1]) and not s.succeeds([0, 0])


def test_local_path_matches_projector_on_random_states():
    rng = np.random.default_rng(8)
    mset = builtin_w2()
    for _ in range(5):
        psi = random_pure(6, rng)
        for m in mset.observables[::7]:
            assert local_success_probability(psi, local_setting_of(m)) == pytest.approx(
                success_probability(psi, m), abs=1e-12
            )
