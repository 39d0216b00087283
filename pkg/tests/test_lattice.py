from fractions import Fraction

import pytest

from twoloop.elliptic import eisenstein
from twoloop.errors import DomainError, NotPositiveDefinite, OddLattice
from twoloop.lattice import (
    Lattice,
    builtin_lattice,
    enumerate_shells,
    leech_theta,
    theta_g1,
    theta_g2,
)
from twoloop.series import (
    GaussRat,
    coeff,
    equal_on_joint_validity,
    limit_var_zero,
    mul,
    r_to_u,
    set_var_one,
)

F = Fraction


def test_e8_gram_is_valid():
    e8 = builtin_lattice("E8")
    assert e8.is_even
    assert e8.is_unimodular
    assert e8.determinant() == 1
    assert e8.is_positive_definite()


def test_e8_shell_counts():
    table = enumerate_shells(builtin_lattice("E8"), 6)
    assert table.count(0) == 1
    assert table.count(2) == 240
    assert table.count(4) == 2160
    assert table.count(6) == 6720
    # counts for positive norms are even (alpha -> -alpha symmetry)
    for norm, vecs in table.shells.items():
        if norm:
            assert len(vecs) % 2 == 0


def test_enumerate_rejects_indefinite():
    bad = Lattice("bad", 2, ((2, 3), (3, 2)))
    with pytest.raises(NotPositiveDefinite):
        enumerate_shells(bad, 2)


def test_theta_g1_e8_equals_e4():
    th = theta_g1(builtin_lattice("E8"), 4)
    e4 = eisenstein(4, 4).series.body
    ok, why = equal_on_joint_validity(th, e4)
    assert ok, why


def test_theta_g1_rejects_odd():
    odd = Lattice("Z", 1, ((1,),))
    with pytest.raises(OddLattice):
        theta_g1(odd, 3)


def test_theta_g1_direct_sum_factorizes():
    e8 = builtin_lattice("E8")
    th1 = theta_g1(e8, 3)
    th2 = theta_g1(e8.direct_sum(e8), 3)
    ok, why = equal_on_joint_validity(th2, mul(th1, th1))
    assert ok, why


def test_theta_g2_e8_key_coefficients():
    th = theta_g2(builtin_lattice("E8"), 3, 3)
    assert coeff(th, {"q": 0, "r": 0, "s": 0}) == GaussRat(1)
    # alpha = beta over the 240 roots
    assert coeff(th, {"q": 1, "r": 2, "s": 1}) == GaussRat(240)
    u = r_to_u(th)
    assert coeff(u, {"q": 1, "s": 1, "u": 1}) == GaussRat(14400)  # 240^2/4
    assert coeff(u, {"q": 1, "s": 1, "u": 2}) == GaussRat(240)


def test_theta_g2_support_condition():
    th = theta_g2(builtin_lattice("E8"), 3, 3)
    for (a, b, c), coefficient in th.iter_terms():
        assert a >= 0 and c >= 0
        assert b * b <= 4 * a * c, (a, b, c)


def test_theta_g2_degenerations():
    e8 = builtin_lattice("E8")
    th = theta_g2(e8, 3, 3)
    g1 = theta_g1(e8, 3)
    lim = limit_var_zero(th, "q")
    ok, why = equal_on_joint_validity(lim, g1.rename_vars({"q": "s"}))
    assert ok, why
    at_one = set_var_one(th, "r")
    prod = mul(g1, g1.rename_vars({"q": "s"}))
    ok, why = equal_on_joint_validity(at_one, prod)
    assert ok, why


def test_theta_g2_thread_count_invariance(monkeypatch):
    import twoloop.lattice as lat

    lat.enumerate_shells.cache_clear()
    monkeypatch.setenv("TWO_LOOP_THREADS", "4")
    threaded = theta_g2(builtin_lattice("E8"), 3, 3)
    monkeypatch.setenv("TWO_LOOP_THREADS", "1")
    serial = theta_g2(builtin_lattice("E8"), 3, 3)
    assert threaded.terms == serial.terms


def test_leech_theta_values():
    th = leech_theta(3)
    assert coeff(th, {"q": 0}) == GaussRat(1)
    assert coeff(th, {"q": 1}) == GaussRat(0)
    assert coeff(th, {"q": 2}) == GaussRat(196560)


def test_even_non_unimodular_lattice():
    # the D4 root lattice: even, determinant 4, 24 roots; theta series are
    # computable for any even positive definite lattice
    d4 = Lattice("D4", 4, (
        (2, -1, 0, 0),
        (-1, 2, -1, -1),
        (0, -1, 2, 0),
        (0, -1, 0, 2),
    ))
    assert d4.is_even
    assert not d4.is_unimodular
    assert d4.determinant() == 4
    table = enumerate_shells(d4, 4)
    assert table.count(2) == 24
    th = theta_g1(d4, 3)
    assert coeff(th, {"q": 1}) == GaussRat(24)
    assert coeff(th, {"q": 2}) == GaussRat(24)


def test_lattice_json_roundtrip(tmp_path):
    e8 = builtin_lattice("E8")
    p = tmp_path / "e8.json"
    p.write_text(__import__("json").dumps(e8.to_json_dict()))
    back = Lattice.from_file(str(p))
    assert back == e8


def test_builtin_e8x3():
    lat = builtin_lattice("E8x3")
    assert lat.rank == 24
    assert lat.is_unimodular


def test_unknown_builtin():
    with pytest.raises(DomainError):
        builtin_lattice("Leech")
