import numpy as np
import pytest

from conftest import admissible_states
from kovtop.errors import BlowupError, ParameterError
from kovtop.flows import (euler_top3, generalized_euler,
                          generalized_kovalevskaya, integrate_reference,
                          kovalevskaya3, verify_hyperelliptic_relation)
from kovtop.invariants import (cross_ratio_integrals, flow_power_integrals,
                               kov_poly_integrals)


def test_kovalevskaya3_rhs_examples():
    f = kovalevskaya3()
    np.testing.assert_allclose(f([1.0, 2.0, 3.0]), [4.0, 4.0, 0.0])
    np.testing.assert_allclose(f([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0])
    np.testing.assert_allclose(f([1.0, 1.0, 1.0]), [1.0, 1.0, 1.0])


def test_generalized_kovalevskaya_examples():
    f = generalized_kovalevskaya(4, 2.0)
    np.testing.assert_allclose(f([1.0, 1.0, 1.0, 1.0]), [2.0, 2.0, 2.0, 2.0])
    np.testing.assert_allclose(f([0.0, 0.0, 0.0, 0.0]), np.zeros(4))


def test_generalized_matches_kov3():
    f3 = kovalevskaya3()
    g = generalized_kovalevskaya(3, 2.0)
    for y in admissible_states(10, 3, seed=1):
        np.testing.assert_allclose(g(y), f3(y), rtol=1e-14)


def test_alpha_equal_N_rejected():
    with pytest.raises(ParameterError):
        generalized_kovalevskaya(4, 4.0)


def test_euler_top_examples():
    f = euler_top3()
    np.testing.assert_allclose(f([1.0, 2.0, 3.0]), [6.0, 3.0, 2.0])
    np.testing.assert_allclose(f([0.7, 0.0, 0.0]), [0.0, 0.0, 0.0])
    np.testing.assert_allclose(f([1.0, 1.0, 1.0]), [1.0, 1.0, 1.0])


def test_generalized_euler_examples():
    f = generalized_euler(4)
    np.testing.assert_allclose(f([1.0, 2.0, 3.0, 4.0]), [24.0, 12.0, 8.0, 6.0])
    np.testing.assert_allclose(f([0.0, 0.0, 1.5, 2.5]), np.zeros(4))
    f3 = generalized_euler(3)
    e3 = euler_top3()
    for x in admissible_states(5, 3, seed=2):
        np.testing.assert_allclose(f3(x), e3(x))


def test_rk4_diagonal_closed_form():
    # on the diagonal the flow is dy/dt = y^2, so y(t) = 1/(1 - t)
    traj = integrate_reference(kovalevskaya3(), [1.0, 1.0, 1.0], 0.5, 1e-3)
    np.testing.assert_allclose(traj.states[-1], [2.0, 2.0, 2.0], atol=1e-9)


def test_rk4_zero_time():
    traj = integrate_reference(euler_top3(), [1.0, 2.0, 3.0], 0.0, 1e-3)
    assert traj.steps == 0
    np.testing.assert_array_equal(traj.states[0], [1.0, 2.0, 3.0])


def test_rk4_requires_divisible_step():
    with pytest.raises(ParameterError):
        integrate_reference(euler_top3(), [1.0, 2.0, 3.0], 0.5, 0.15)


def test_euler_E_drift_small():
    # this flow blows up near t = 0.51 from (1,2,3); 0.3 stays well inside
    traj = integrate_reference(euler_top3(), [1.0, 2.0, 3.0], 0.3, 1e-3)
    E12 = traj.states[:, 0] ** 2 - traj.states[:, 1] ** 2
    assert np.max(np.abs(E12 - E12[0])) / abs(E12[0]) < 1e-9


def test_blowup_raises_with_time():
    with pytest.raises(BlowupError) as err:
        integrate_reference(euler_top3(), [1.0, 2.0, 3.0], 1.0, 1e-3)
    assert 0.4 < err.value.last_time < 0.6


def test_kov3_integrals_conserved_along_flow():
    for y0 in admissible_states(5, 3, seed=3, low=0.05, high=0.3):
        traj = integrate_reference(kovalevskaya3(), y0, 1.0, 1e-3)
        for inv in kov_poly_integrals():
            vals = inv.values(traj.states)
            drift = np.max(np.abs(vals - vals[0])) / max(1.0, abs(vals[0]))
            assert drift < 1e-8, (inv.name, drift)


@pytest.mark.parametrize("N,alpha", [(3, 2.0), (4, 2.0), (4, 1.3), (5, 0.5)])
def test_power_integrals_conserved_along_flow(N, alpha):
    flow = generalized_kovalevskaya(N, alpha)
    # keep the finite-time pole beyond t = 1: weak damping needs smaller starts
    high = 0.3 if alpha >= 1 else 0.15
    for y0 in admissible_states(3, N, seed=4, low=0.03, high=high, min_sep=5e-3):
        traj = integrate_reference(flow, y0, 1.0, 1e-3)
        for inv in flow_power_integrals(N, alpha):
            vals = inv.values(traj.states)
            drift = np.max(np.abs(vals - vals[0])) / max(1.0, abs(vals[0]))
            assert drift < 1e-8, (inv.name, drift)


def test_generalized_euler_conserves_square_differences():
    flow = generalized_euler(4)
    traj = integrate_reference(flow, [0.21, 0.13, 0.27, 0.09], 1.0, 1e-3)
    X = traj.states
    for i in range(4):
        for j in range(i + 1, 4):
            E = X[:, i] ** 2 - X[:, j] ** 2
            assert np.max(np.abs(E - E[0])) < 1e-8 * max(1.0, abs(E[0]))


def test_cross_ratios_survive_custom_symmetric_s():
    # s = e_2(y): the ratio family must still be conserved
    coeffs = [0.0, 1.0, 0.0, 0.0]
    flow = generalized_kovalevskaya(4, 2.0, s_coeffs=coeffs)
    for y0 in admissible_states(3, 4, seed=5, low=0.05, high=0.3):
        traj = integrate_reference(flow, y0, 1.0, 1e-3)
        for inv in cross_ratio_integrals(4):
            vals = inv.values(traj.states)
            drift = np.max(np.abs(vals - vals[0])) / max(1.0, abs(vals[0]))
            assert drift < 1e-8, (inv.name, drift)


def test_H_decay_law_any_symmetric_s():
    # d/dt log|H_ij| = -s along the flow, for s = e_1 + 0.5*e_2
    coeffs = [1.0, 0.5, 0.0, 0.0]
    flow = generalized_kovalevskaya(4, 2.0, s_coeffs=coeffs)
    dt = 1e-3
    traj = integrate_reference(flow, [0.11, 0.23, 0.17, 0.29], 0.5, dt)
    Y = traj.states
    H = (Y[:, 0] - Y[:, 1]) / (Y[:, 0] * Y[:, 1])
    logH = np.log(np.abs(H))
    dlog = (logH[2:] - logH[:-2]) / (2.0 * dt)
    from kovtop.core import all_elementary_symmetric
    e = all_elementary_symmetric(Y[1:-1])
    s = e[:, 1] + 0.5 * e[:, 2]
    assert np.max(np.abs(dlog + s)) < 1e-5


def test_hyperelliptic_relation_n3():
    traj = integrate_reference(generalized_euler(3), [1.0, 2.0, 3.0], 0.5, 1e-3)
    assert verify_hyperelliptic_relation(3, traj) < 1e-8


def test_hyperelliptic_relation_n4():
    # from (1,2,3,4) this flow blows up near t = 0.086
    traj = integrate_reference(generalized_euler(4), [1.0, 2.0, 3.0, 4.0], 0.05, 1e-3)
    assert verify_hyperelliptic_relation(4, traj) < 1e-8


def test_hyperelliptic_relation_equilibrium():
    traj = integrate_reference(generalized_euler(4), [0.0, 0.0, 1.5, 2.5], 0.1, 1e-3)
    assert verify_hyperelliptic_relation(4, traj) < 1e-12
