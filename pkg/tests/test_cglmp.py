import math

import numpy as np
import pytest

from qutrit_herald.cglmp import (
    QUANTUM_MAX,
    JointProbTable,
    QutritSetting,
    SettingsQuartet,
    b_value,
    b_values,
    b_values_general,
    fig4_quartet,
    i3,
    i3_fig4,
    i3_general,
    joint_probs,
    joint_probs_fock,
    optimize12,
    prob_shift,
    sweep_fig4,
    u_tot,
    unitary_from_params,
)
from qutrit_herald.fock import basis_state, bell_pair, max_entangled, two_qutrit_state

R2 = math.sqrt(2)
IDENTITY = QutritSetting(0.0, 0.0, 0.0)


def random_setting(rng) -> QutritSetting:
    return QutritSetting(*rng.uniform(-math.pi, math.pi, 3))


def random_quartet(rng) -> SettingsQuartet:
    return SettingsQuartet.from_vector(rng.uniform(-math.pi, math.pi, 12))


def test_u_tot_examples():
    np.testing.assert_allclose(
        u_tot(QutritSetting(math.pi / 4, 0, 0)).matrix,
        0.5 * np.array([[1, R2, 1], [-R2, 0, R2], [1, -R2, 1]]),
        atol=1e-15,
    )
    np.testing.assert_allclose(u_tot(IDENTITY).matrix, np.eye(3), atol=1e-15)
    m = u_tot(QutritSetting(math.pi / 4, 0.9, 0)).matrix
    np.testing.assert_allclose(np.abs(m[:, 0]), [0.5, R2 / 2, 0.5], atol=1e-15)
    assert u_tot(QutritSetting(0.3, 1.0, -2.0)).is_unitary()


def test_identity_settings_are_correlated():
    t = joint_probs(None, IDENTITY, IDENTITY)
    np.testing.assert_allclose(t.p, np.eye(3) / 3, atol=1e-15)
    assert prob_shift(t, 0) == pytest.approx(1)
    assert prob_shift(t, 1) == pytest.approx(0)


def test_tables_and_marginals(rng):
    for _ in range(50):
        t = joint_probs(None, random_setting(rng), random_setting(rng))
        assert np.all(t.p >= 0)
        assert abs(t.p.sum() - 1) < 1e-12
        np.testing.assert_allclose(t.p.sum(axis=0), 1 / 3, atol=1e-12)
        np.testing.assert_allclose(t.p.sum(axis=1), 1 / 3, atol=1e-12)
        shifts = [prob_shift(t, k, d) for k in range(3) for d in ("B=A+k", "A=B+k")]
        assert sum(shifts) == pytest.approx(2, abs=1e-12)


def test_prob_shift_directions():
    p = np.zeros((3, 3))
    p[0, 1] = 1.0  # A=0, B=1
    t = JointProbTable(p)
    assert prob_shift(t, 1, "B=A+k") == 1
    assert prob_shift(t, 2, "A=B+k") == 1
    with pytest.raises(ValueError):
        prob_shift(t, 1, "sideways")
    with pytest.raises(ValueError):
        JointProbTable(np.zeros((2, 2)))


def test_dual_path_agreement(rng):
    states = [None, two_qutrit_state(0.6, 0.0, 0.8), two_qutrit_state(2 / 3, 1j / 3, 2 / 3)]
    for k in range(100):
        sa, sb = random_setting(rng), random_setting(rng)
        state = states[k % 3]
        np.testing.assert_allclose(
            joint_probs(state, sa, sb).p, joint_probs_fock(state, sa, sb).p, atol=1e-10
        )


def test_state_outside_subspace_rejected():
    with pytest.raises(ValueError):
        joint_probs(bell_pair(), IDENTITY, IDENTITY)


def test_phase_covariance(rng):
    for _ in range(20):
        sa, sb = random_setting(rng), random_setting(rng)
        shift = rng.uniform(-math.pi, math.pi)
        moved = QutritSetting(sa.theta, sa.dh + shift, sa.dv + shift)
        np.testing.assert_allclose(
            joint_probs(None, sa, sb).p, joint_probs(None, moved, sb).p, atol=1e-12
        )


def test_b1_minimum_setting():
    q = SettingsQuartet(
        A1=QutritSetting(math.pi / 4, 0, 0),
        A2=IDENTITY,
        B1=QutritSetting(math.pi / 4, 2 * math.acos(1 / math.sqrt(3)), 0),
        B2=IDENTITY,
    )
    assert abs(b_value(1, q) + 1 / 3) < 1e-10
    with pytest.raises(ValueError):
        b_value(5, q)


def test_identity_quartet_values():
    q = SettingsQuartet(IDENTITY, IDENTITY, IDENTITY, IDENTITY)
    np.testing.assert_allclose(b_values(q), [1, -1, 1, 1], atol=1e-15)
    assert i3(q) == pytest.approx(2)


def test_b_values_bounded(rng):
    for _ in range(200):
        b = b_values(random_quartet(rng))
        assert np.all(b >= -1 - 1e-12) and np.all(b <= 1 + 1e-12)
        assert b.sum() <= QUANTUM_MAX + 1e-6


def test_product_state_respects_local_bound(rng):
    product = basis_state([(2, 0), (2, 0)])
    for _ in range(500):
        q = random_quartet(rng)
        assert i3(q, product) <= 2 + 1e-9
        blocks = [unitary_from_params(rng.normal(size=9)) for _ in range(4)]
        assert i3_general(product, *blocks) <= 2 + 1e-9


def test_general_matches_restricted(rng):
    for _ in range(20):
        q = random_quartet(rng)
        blocks = [u_tot(s) for s in (q.A1, q.A2, q.B1, q.B2)]
        assert abs(i3_general(None, *blocks) - i3(q)) < 1e-12
        np.testing.assert_allclose(b_values_general(None, *blocks), b_values(q), atol=1e-12)


def test_general_rejects_non_unitary():
    with pytest.raises(ValueError):
        i3_general(None, np.eye(3), np.eye(3), np.eye(3), 2 * np.eye(3))
    with pytest.raises(ValueError):
        i3_general(None, np.eye(2), np.eye(3), np.eye(3), np.eye(3))


def test_unitary_from_params_is_unitary(rng):
    for _ in range(20):
        u = unitary_from_params(rng.normal(size=9))
        np.testing.assert_allclose(u @ u.conj().T, np.eye(3), atol=1e-12)


def test_sweep_family_matches_scalar_path(rng):
    for x, y in rng.uniform(0, math.pi, (20, 2)):
        assert abs(float(i3_fig4(x, y)) - i3(fig4_quartet(x, y))) < 1e-12


def test_sweep_small_grid():
    res = sweep_fig4(steps=5)
    assert res.values.shape == (5, 5)
    rows = list(res.rows())
    assert len(rows) == 25
    assert rows[0][:2] == (0.0, 0.0)
    assert res.values[0, 0] == pytest.approx(i3(fig4_quartet(0.0, 0.0)), abs=1e-12)
    assert res.max_value == pytest.approx(res.values.max())
    with pytest.raises(ValueError):
        sweep_fig4(steps=1)


def test_sweep_periodicity(rng):
    x, y = rng.uniform(0, math.pi, (2, 30))
    base = i3_fig4(x, y)
    np.testing.assert_allclose(i3_fig4(x + 2 * math.pi, y), base, atol=1e-12)
    np.testing.assert_allclose(i3_fig4(x, y + 2 * math.pi), base, atol=1e-12)


def test_optimize12_deterministic_and_non_degrading():
    a = optimize12(multistart=2, seed=7)
    b = optimize12(multistart=2, seed=7)
    assert a.i3 == b.i3
    np.testing.assert_array_equal(a.quartet.to_vector(), b.quartet.to_vector())
    start = fig4_quartet(0.45067, 0.45067).to_vector()
    res = optimize12(multistart=1, starts=[start])
    assert res.i3 >= i3(fig4_quartet(0.45067, 0.45067)) - 1e-12
    with pytest.raises(ValueError):
        optimize12(multistart=0)


def test_quartet_round_trip(rng):
    q = random_quartet(rng)
    assert SettingsQuartet.from_vector(q.to_vector()) == q
    d = q.to_dict()
    assert set(d) == {"A1", "A2", "B1", "B2"}
    assert set(d["A1"]) == {"theta", "dH", "dV"}


def test_quantum_max_value():
    assert QUANTUM_MAX == pytest.approx(2.87293, abs=1e-5)
    assert i3(fig4_quartet(0.0, 0.0), max_entangled(3)) <= QUANTUM_MAX
