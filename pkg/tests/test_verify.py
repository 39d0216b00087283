import random

import numpy as np
import pytest

from twoloop.errors import DomainError, SingularDenominator
from twoloop.verify import (
    EvalContext,
    act,
    check_ehat_anomaly,
    check_period_s1,
    check_weight,
    cocycle_det,
    eval_series,
    generators,
    is_symplectic,
    omega_at,
    residual_scaling,
    tau_valuation,
)
from twoloop.elliptic import delta_cusp, eisenstein_hat
from twoloop.sewing import period_matrix


def test_generators_are_symplectic():
    gens = generators()
    assert set(gens) == {"S1", "S2", "T1", "T2", "U", "V"}
    for name, g in gens.items():
        assert is_symplectic(g), name


def test_s1_squared_is_reflection():
    g = generators()
    assert np.array_equal(g["S1"] @ g["S1"], g["V"])
    assert np.array_equal(g["S2"] @ g["S2"], -g["V"])


def test_random_words_stay_symplectic():
    gens = list(generators().values())
    rng = random.Random(7)
    for _ in range(50):
        word = np.eye(4, dtype=np.int64)
        for _ in range(rng.randint(1, 6)):
            word = word @ rng.choice(gens)
        assert is_symplectic(word)


def test_act_matches_translation_laws():
    gens = generators()
    omega = np.array([[0.3 + 1.2j, 0.05j], [0.05j, 1.7j]])
    t1 = act(gens["T1"], omega)
    assert abs(t1[0, 0] - (omega[0, 0] + 1)) < 1e-14
    assert abs(t1[1, 1] - omega[1, 1]) < 1e-14
    u = act(gens["U"], omega)
    assert abs(u[0, 1] - (omega[0, 1] + 1)) < 1e-14
    v = act(gens["V"], omega)
    assert abs(v[0, 1] + omega[0, 1]) < 1e-14
    s1 = act(gens["S1"], omega)
    assert abs(s1[0, 0] + 1 / omega[0, 0]) < 1e-14
    assert abs(s1[0, 1] + omega[0, 1] / omega[0, 0]) < 1e-14
    assert abs(s1[1, 1] - (omega[1, 1] - omega[0, 1] ** 2 / omega[0, 0])) < 1e-14


def test_act_is_group_action():
    gens = list(generators().values())
    rng = random.Random(11)
    omega = np.array([[0.2 + 1.1j, 0.1 + 0.04j], [0.1 + 0.04j, -0.3 + 1.5j]])
    for _ in range(20):
        g1 = rng.choice(gens) @ rng.choice(gens)
        g2 = rng.choice(gens)
        lhs = act(g1 @ g2, omega)
        rhs = act(g1, act(g2, omega))
        assert np.abs(lhs - rhs).max() < 1e-12


def test_det_im_transformation():
    gens = generators()
    omega = np.array([[0.2 + 1.1j, 0.1 + 0.04j], [0.1 + 0.04j, -0.3 + 1.5j]])
    for name in ("S1", "S2", "U", "T1"):
        g = gens[name]
        moved = act(g, omega)
        lhs = np.linalg.det(moved.imag)
        rhs = np.linalg.det(omega.imag) / abs(cocycle_det(g, omega)) ** 2
        assert abs(lhs - rhs) < 1e-12, name


def test_act_singular_denominator():
    gens = generators()
    omega = np.array([[1e-20 + 0j, 0], [0, 1j]])
    with pytest.raises(SingularDenominator):
        act(gens["S1"], omega)


def test_eval_constant_and_leading():
    one = delta_cusp(6)
    # at large Im(tau), Delta ~ q
    tau = 6j
    val = eval_series(one, tau_valuation(tau))
    q = complex(np.exp(2j * np.pi * tau))
    assert abs(val - q) / abs(q) < 1e-6


def test_eval_ehat2_fixed_point():
    # at tau = i the anomaly forces Ehat_2(e^-2pi) = -1/(4 pi)
    e2 = eisenstein_hat(2, 40).series
    val = eval_series(e2, tau_valuation(1j))
    assert abs(val - (-1 / (4 * np.pi))) < 1e-12


def test_ehat_anomaly_points():
    for tau in (0.2 + 1.1j, 1j, 2j):
        res = check_ehat_anomaly(tau, 40)
        assert res.passed, (tau, res.residual, res.bound)
        assert res.residual < 1e-9
    # S-dual pair evaluated both ways
    res = check_ehat_anomaly(0.5j, 40)
    assert res.residual < 1e-9


def test_period_s1_covariance():
    ctx = EvalContext(0.3 + 1.2j, 1.7j, 0.05)
    res = check_period_s1(ctx, q_order=12, eps_order=6)
    assert res.passed, (res.residual, res.bound)
    assert res.residual < 1e-6


def test_period_s1_eps_zero_diagonal():
    ctx = EvalContext(0.3 + 1.2j, 1.7j, 0.0)
    sew = period_matrix(8, 4)
    omega = omega_at(sew, ctx)
    assert abs(omega[0, 1]) < 1e-15
    assert abs(omega[0, 0] - ctx.tau1) < 1e-15


def test_eps_reflection_flips_omega12():
    sew = period_matrix(8, 5)
    ctx = EvalContext(0.3 + 1.2j, 1.7j, 0.05)
    flip = EvalContext(0.3 + 1.2j, 1.7j, -0.05)
    om, om2 = omega_at(sew, ctx), omega_at(sew, flip)
    assert abs(om2[0, 1] + om[0, 1]) < 1e-15
    assert abs(om2[0, 0] - om[0, 0]) < 1e-15
    assert abs(om2[1, 1] - om[1, 1]) < 1e-15


def test_weight_z24_translations_and_reflection():
    ctx = EvalContext(0.3 + 1.2j, 1.7j, 0.03)
    for gamma in ("T1", "T2", "V"):
        res = check_weight("z24", gamma, ctx, q_order=12, eps_order=4)
        assert res.passed, (gamma, res.residual)
        assert res.residual < 1e-12


def test_weight_z24_s1_conjecture():
    ctx = EvalContext(0.3 + 1.2j, 1.7j, 0.03)
    res = check_weight("z24", "S1", ctx, q_order=16, eps_order=6)
    assert res.passed, (res.residual, res.bound)
    assert res.residual < 1e-5


def test_weight_g2_s1_conjecture():
    ctx = EvalContext(0.3 + 1.2j, 1.7j, 0.03)
    res = check_weight("g2", "S1", ctx, q_order=12, eps_order=6)
    assert res.passed, (res.residual, res.bound)
    assert res.residual < 1e-5


def test_weight_delta10_s1():
    ctx = EvalContext(0.3 + 1.2j, 1.7j, 0.05)
    res = check_weight("delta10-sewing", "S1", ctx, q_order=8, eps_order=6)
    assert res.passed, (res.residual, res.bound)


def test_residual_scaling_is_eps4():
    ctx = EvalContext(0.3 + 1.2j, 1.7j, 0.03)
    ratio, big, small = residual_scaling("z24", ctx, q_order=16, eps_order=6)
    assert big.passed and small.passed
    assert 10 < ratio < 24, ratio


@pytest.mark.parametrize("form,weight", [("E4", 4), ("E6", 6), ("Delta", 12), ("DE4", 6)])
def test_elliptic_weight_laws_numeric(form, weight):
    # f(-1/tau) = tau^k f(tau) for declared-weight forms; the covariant
    # derivative of the weight-4 series must transform with weight 6
    from twoloop.elliptic import covariant_derivative, eisenstein

    order = 40
    series = {
        "E4": lambda: eisenstein(4, order).series,
        "E6": lambda: eisenstein(6, order).series,
        "Delta": lambda: delta_cusp(order),
        "DE4": lambda: covariant_derivative(eisenstein(4, order)).series,
    }[form]()
    tau = 0.2 + 1.1j
    lhs = eval_series(series, tau_valuation(-1 / tau))
    rhs = tau**weight * eval_series(series, tau_valuation(tau))
    assert abs(lhs - rhs) / abs(rhs) < 1e-9


def test_context_validation():
    with pytest.raises(DomainError):
        EvalContext(0.3 - 1.2j, 1.7j, 0.0)
    with pytest.raises(DomainError):
        EvalContext(1j, 1j, 1.5)
