import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import random_state

from qutrit_herald.fock import (
    Pol,
    PureState,
    annihilate,
    basis_state,
    bell_pair,
    create,
    fidelity,
    from_json,
    inner,
    max_entangled,
    permute_modes,
    qutrit_amplitudes,
    qutrit_matrix,
    remove_mode,
    tensor,
    to_json,
    total_photons,
    two_qutrit_state,
    vacuum,
)


def test_vacuum():
    assert dict(vacuum(1).amplitudes) == {((0, 0),): 1}
    assert vacuum(4).norm() == 1
    assert total_photons(vacuum(2)) == {0: 1.0}
    with pytest.raises(ValueError):
        vacuum(0)


def test_create_ladder():
    one = create(vacuum(1), 0, Pol.H)
    assert dict(one.amplitudes) == {((1, 0),): 1}
    two = create(one, 0, Pol.H)
    assert two[((2, 0),)] == pytest.approx(math.sqrt(2))
    assert inner(two / math.sqrt(2), basis_state([(2, 0)])) == pytest.approx(1)
    out = create(basis_state([(1, 1)]), 0, Pol.V)
    assert dict(out.amplitudes) == {((1, 2),): pytest.approx(math.sqrt(2))}


def test_annihilate_create_is_n_plus_one(rng):
    for _ in range(20):
        m, n = (int(x) for x in rng.integers(0, 5, 2))
        ket = basis_state([(m, n), (1, 2)])
        for pol, count in ((Pol.H, m), (Pol.V, n)):
            back = annihilate(create(ket, 0, pol), 0, pol)
            assert back[ket.sorted_items()[0][0]] == pytest.approx(count + 1)
            assert len(back) == 1


def test_basis_states_orthonormal():
    assert inner(basis_state([(1, 1)]), basis_state([(1, 1)])) == 1
    assert inner(basis_state([(2, 0)]), basis_state([(0, 2)])) == 0
    assert dict(basis_state([(2, 0)]).amplitudes) == {((2, 0),): 1}


def test_inner_mode_mismatch():
    with pytest.raises(ValueError):
        inner(vacuum(1), vacuum(2))


def test_max_entangled_overlap_with_first_term():
    psi3 = max_entangled(3)
    assert inner(psi3, basis_state([(2, 0), (2, 0)])) == pytest.approx(1 / math.sqrt(3))
    assert psi3.is_normalized()


def test_tensor_examples():
    assert dict(tensor(vacuum(1), vacuum(1)).amplitudes) == dict(vacuum(2).amplitudes)
    pairs = tensor(bell_pair(), bell_pair())
    assert len(pairs) == 4
    assert all(a == pytest.approx(0.5) for _, a in pairs.items())


def test_fidelity_phase_invariant():
    x = max_entangled(3)
    assert fidelity(x, np.exp(0.7j) * x) == pytest.approx(1, abs=1e-15)
    assert fidelity(basis_state([(2, 0)]), basis_state([(0, 2)])) == 0
    with pytest.raises(ValueError):
        fidelity(2 * x, x)


def test_total_photons():
    assert total_photons(max_entangled(3)) == {4: pytest.approx(1.0)}
    assert total_photons(bell_pair()) == {2: pytest.approx(1.0)}


def test_pruning_drops_tiny_amplitudes():
    s = PureState({((1, 0),): 1.0, ((0, 1),): 1e-15}, 1)
    assert len(s) == 1
    cancelled = basis_state([(1, 0)]) - basis_state([(1, 0)])
    assert cancelled.is_zero()


def test_immutable():
    s = vacuum(1)
    with pytest.raises(TypeError):
        s.amplitudes[((1, 0),)] = 1.0


def test_json_round_trip(rng):
    s = random_state(rng, 3)
    doc = to_json(s)
    keys = [tuple(map(tuple, e["mode_occupations"])) for e in doc]
    assert keys == sorted(keys)
    back = from_json(doc)
    assert back.n_modes == 3
    assert dict(back.amplitudes) == dict(s.amplitudes)


def test_qutrit_views():
    s = two_qutrit_state(0.6, 0, 0.8)
    amps = qutrit_amplitudes(s)
    assert (amps.a0, amps.a1, amps.a2) == (0.6, 0, 0.8)
    assert qutrit_matrix(s)[2, 2] == 0.8
    with pytest.raises(ValueError):
        qutrit_matrix(bell_pair())


def test_remove_and_permute():
    s = tensor(bell_pair(), vacuum(1))
    assert dict(remove_mode(s, 2).amplitudes) == dict(bell_pair().amplitudes)
    with pytest.raises(ValueError):
        remove_mode(s, 0)
    swapped = permute_modes(tensor(basis_state([(1, 0)]), basis_state([(0, 2)])), [1, 0])
    assert dict(swapped.amplitudes) == {((0, 2), (1, 0)): 1}


complex_amp = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), complex_amp, complex_amp)
def test_sesquilinearity(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    a, b, c = (random_state(rng, 2, 4, 6) for _ in range(3))
    lhs = inner(alpha * a + beta * b, c)
    rhs = alpha.conjugate() * inner(a, c) + beta.conjugate() * inner(b, c)
    assert abs(lhs - rhs) < 1e-12 * (1 + abs(alpha) + abs(beta))
    assert inner(a, b) == pytest.approx(inner(b, a).conjugate(), abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_tensor_associative_and_norms(seed):
    rng = np.random.default_rng(seed)
    a, b, c = random_state(rng, 1), random_state(rng, 2), random_state(rng, 1)
    left, right = tensor(tensor(a, b), c), tensor(a, tensor(b, c))
    assert dict(left.amplitudes).keys() == dict(right.amplitudes).keys()
    for k, v in left.items():
        assert abs(v - right[k]) < 1e-14
    x = 1.7 * a
    assert abs(x.norm_sq() - inner(x, x).real) < 1e-14
    assert tensor(x, b).norm() == pytest.approx(x.norm() * b.norm(), rel=1e-14)
