from fractions import Fraction

import pytest

from twoloop.elliptic import eisenstein_hat
from twoloop.errors import DomainError, FractionalExponentUnsupported
from twoloop.series import (
    GaussRat,
    MultiSeries,
    VarSpec,
    coeff,
    equal_on_joint_validity,
    mul,
    scalar_mul,
)
from twoloop.sewing import (
    a_matrix,
    fourier_params,
    fourier_to_sewing,
    period_matrix,
    required_m_max,
)

F = Fraction


def E2(var, order=4):
    return eisenstein_hat(2, order, var).series.body


def test_a_matrix_low_entries():
    a = a_matrix(3, 4, "q")
    a11 = a.entry(1, 1)
    assert coeff(a11, {"q": 0, "eps": 1}) == GaussRat(F(-1, 12))
    assert coeff(a11, {"q": 1, "eps": 1}) == GaussRat(2)
    # A_12 = 3 eps^2 Ehat_4, A_21 = eps^2 Ehat_4: A is not symmetric
    a12 = a.entry(1, 2)
    a21 = a.entry(2, 1)
    e4 = eisenstein_hat(4, 3, "q").series.body
    ok, why = equal_on_joint_validity(a12, mul(scalar_mul(3, e4),
                                               MultiSeries((a12.spec("eps"),), {(F(2),): 1})))
    assert ok, why
    assert coeff(a21, {"q": 0, "eps": 2}) == GaussRat(F(1, 720))
    assert coeff(a12, {"q": 0, "eps": 2}) == GaussRat(F(3, 720))


def test_period_matrix_printed_orders():
    sew = period_matrix(3, 5)
    # w11 = eps^2 Ehat_2(q2) + O(eps^4)
    assert coeff(sew.w11, {"q1": 0, "q2": 0, "eps": 2}) == GaussRat(F(-1, 12))
    assert coeff(sew.w11, {"q1": 0, "q2": 1, "eps": 2}) == GaussRat(2)
    assert coeff(sew.w11, {"q1": 1, "q2": 0, "eps": 2}) == GaussRat(0)
    # w12 = -eps (1 + Ehat_2(q1) Ehat_2(q2) eps^2) + O(eps^5)
    assert coeff(sew.w12, {"q1": 0, "q2": 0, "eps": 1}) == GaussRat(-1)
    assert coeff(sew.w12, {"q1": 0, "q2": 0, "eps": 3}) == GaussRat(-F(1, 144))
    assert coeff(sew.w12, {"q1": 1, "q2": 0, "eps": 3}) == GaussRat(F(2, 12))
    assert coeff(sew.w12, {"q1": 1, "q2": 1, "eps": 3}) == GaussRat(-4)


def test_period_matrix_swap_symmetry():
    sew = period_matrix(3, 6)
    swapped = sew.w11.rename_vars({"q1": "q2", "q2": "q1"})
    ok, why = equal_on_joint_validity(swapped, sew.w22)
    assert ok, why
    w12_swapped = sew.w12.rename_vars({"q1": "q2", "q2": "q1"})
    ok, why = equal_on_joint_validity(w12_swapped, sew.w12)
    assert ok, why


def test_period_matrix_eps_parity():
    sew = period_matrix(2, 6)
    i11 = sew.w11.var_index("eps")
    assert all(k[i11] % 2 == 0 for k in sew.w11.terms)
    assert all(k[sew.w22.var_index("eps")] % 2 == 0 for k in sew.w22.terms)
    assert all(k[sew.w12.var_index("eps")] % 2 == 1 for k in sew.w12.terms)


def test_neumann_truncation_stability():
    base = period_matrix(2, 6)
    bigger = period_matrix(2, 6, m_max=required_m_max(6) + 1)
    for w, wb in ((base.w11, bigger.w11), (base.w12, bigger.w12), (base.w22, bigger.w22)):
        ok, why = equal_on_joint_validity(w, wb)
        assert ok, why


def test_period_matrix_requires_eps_order():
    with pytest.raises(DomainError):
        period_matrix(2, 0)


def test_fourier_params_printed_orders():
    params = fourier_params(period_matrix(3, 5))
    qhat = params.qhat
    assert qhat.prefactor == {"q1": 1}
    # q = q1 (1 + eps^2 Ehat_2(q2)) + O(eps^4)
    assert qhat.coeff({"q1": 1, "q2": 0, "eps": 2}) == GaussRat(F(-1, 12))
    assert qhat.coeff({"q1": 1, "q2": 1, "eps": 2}) == GaussRat(2)
    assert qhat.coeff({"q1": 1, "q2": 0, "eps": 0}) == GaussRat(1)
    assert qhat.coeff({"q1": 1, "q2": 0, "eps": 1}) == GaussRat(0)
    # u has leading term exactly eps^2 with coefficient 1
    uhat = params.uhat
    assert uhat.prefactor == {"eps": 2}
    assert uhat.coeff({"eps": 2}) == GaussRat(1)
    assert uhat.coeff({"eps": 3}) == GaussRat(0)
    # eps^4 coefficient of u at q1^0 q2^0: 1/12 + 2*(1/144) = 7/72
    assert uhat.coeff({"eps": 4}) == GaussRat(F(7, 72))
    assert uhat.coeff({"eps": 4, "q1": 1}) == GaussRat(2 * 2 * F(-1, 12))
    # r at eps = 0 is 1
    assert params.rhat.coeff({}) == GaussRat(1)


def test_substitute_q_squared_example():
    # q^2 |-> q1^2 (1 + 2 eps^2 Ehat_2(q2)) + O(eps^4)
    from twoloop.series import substitute

    params = fourier_params(period_matrix(3, 3))
    f = MultiSeries((VarSpec("q", 1, F(0), F(5), F(5)),), {(F(2),): 1})
    out = substitute(f, "q", params.qhat)
    assert out.coeff({"q1": 2, "q2": 0, "eps": 0}) == GaussRat(1)
    assert out.coeff({"q1": 2, "q2": 0, "eps": 2}) == GaussRat(2 * F(-1, 12))
    assert out.coeff({"q1": 2, "q2": 1, "eps": 2}) == GaussRat(4)
    assert out.coeff({"q1": 1, "q2": 0, "eps": 0}) == GaussRat(0)


def test_fourier_to_sewing_single_u():
    params = fourier_params(period_matrix(2, 4))
    u = MultiSeries((VarSpec("u"),), {(F(1),): 1})
    out = fourier_to_sewing(u, params)
    ok, why = equal_on_joint_validity(out, params.uhat)
    assert ok, why


def test_fourier_to_sewing_rejects_fractional():
    params = fourier_params(period_matrix(2, 2))
    frac = MultiSeries((VarSpec("q", den=2, order=F(3)),), {(F(1, 2),): 1})
    with pytest.raises(FractionalExponentUnsupported):
        fourier_to_sewing(frac, params)


def test_r_form_and_u_form_substitution_agree():
    # the r-route exercises negative powers of exp(w12); it must agree with
    # the u-route on the V-symmetric lattice theta series
    from twoloop.lattice import builtin_lattice, theta_g2
    from twoloop.series import r_to_u

    th = theta_g2(builtin_lattice("E8"), 2, 2)
    params = fourier_params(period_matrix(2, 2))
    via_r = fourier_to_sewing(th, params)
    via_u = fourier_to_sewing(r_to_u(th), params)
    ok, why = equal_on_joint_validity(via_r, via_u)
    assert ok, why


def test_delta10_factorization_beyond_printed_order():
    # the theta-product data at box 5 (never printed in any table) must
    # still factorize exactly as eps^2 Delta(q1) Delta(q2) (1 - 10
    # Ehat2(q1) Ehat2(q2) eps^2 + O(eps^4)) through the sewing map
    from twoloop.elliptic import delta_cusp, eisenstein_hat
    from twoloop.series import PrefSeries
    from twoloop.siegel import delta10

    order = 5
    d = delta10(order, order)
    params = fourier_params(period_matrix(order, 5))
    lhs = fourier_to_sewing(d.fourier_u, params)
    e1 = eisenstein_hat(2, order, "q1").series
    e2 = eisenstein_hat(2, order, "q2").series
    eps2 = MultiSeries((VarSpec("eps", 1, F(0), F(4), F(4)),), {(F(2),): 1})
    bracket = PrefSeries.coerce(1).add(e1.mul(e2).scalar(-10).mul(PrefSeries(eps2)))
    rhs = (delta_cusp(order, "q1").mul(delta_cusp(order, "q2"))
           .mul(bracket).shift("eps", 2))
    ok, why = equal_on_joint_validity(lhs, rhs)
    assert ok, why
    # the comparison really does cover the box of q-exponents up to 4
    assert lhs.body.spec("q1").valid + lhs.prefactor.get("q1", 0) == 5


def test_fourier_to_sewing_validity_caps():
    params = fourier_params(period_matrix(4, 4))
    q = VarSpec("q", 1, F(0), F(10), F(2))  # valid to q^2 exclusive only
    f = MultiSeries((q,), {(F(0),): 1, (F(1),): 5})
    out = fourier_to_sewing(f, params)
    assert out.coeff({"q1": 1}) == GaussRat(5)
    from twoloop.errors import UnknownCoefficient
    with pytest.raises(UnknownCoefficient):
        out.coeff({"q1": 2})
