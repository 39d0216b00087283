"""The torus-sewing description of a genus-two surface.

Two tori with nome parameters q1, q2 are joined through a cylinder with
sewing parameter eps.  The entries of the genus-two period matrix are exact
series in these parameters, built from the matrix

    A_mn(q) = eps^(m+n-1) * binom(2m+2n-3, 2m-1) * Ehat_{2m+2n-2}(q)

through a Neumann series for (1 - A(q1)A(q2))^[-1].  Everything is stored
with the 2*pi*i normalization stripped:

    w11 = 2*pi*i*(Omega_11 - tau1),   w12 = 2*pi*i*Omega_12,
    w22 = 2*pi*i*(Omega_22 - tau2),

so every stored coefficient is rational.  The Fourier variables of Siegel
modular forms are then

    q = q1*exp(w11),  s = q2*exp(w22),  r = exp(w12),  u = r + 1/r - 2,

and :func:`fourier_to_sewing` rewrites a Fourier expansion as a series in
(q1, q2, eps) by substitution.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .elliptic import eisenstein_hat
from .errors import DomainError
from .series import (
    MultiSeries,
    PrefSeries,
    VarSpec,
    add,
    exp_series,
    mul,
    negate,
    scalar_mul,
    shift_var,
    substitute,
)

F = Fraction

QVAR1, QVAR2, EPSVAR = "q1", "q2", "eps"


def _eps_spec(eps_order: int) -> VarSpec:
    return VarSpec(EPSVAR, 1, F(0), F(eps_order + 1), F(eps_order + 1))


@dataclass(frozen=True)
class AMatrixTrunc:
    """Truncation of the sewing matrix A: entries for m, n <= m_max."""

    qvar: str
    q_order: int
    eps_order: int
    m_max: int
    entries: tuple[tuple[MultiSeries, ...], ...]

    def entry(self, m: int, n: int) -> MultiSeries:
        """A_mn for 1-based indices m, n."""
        return self.entries[m - 1][n - 1]


def required_m_max(eps_order: int) -> int:
    """Smallest matrix truncation that provably cannot affect coefficients
    up to eps^eps_order: dropped entries enter at eps^(2*m_max+2)."""
    return (eps_order + 2) // 2


def a_matrix(q_order: int, eps_order: int, qvar: str = "q",
             m_max: int | None = None) -> AMatrixTrunc:
    """The sewing matrix with entries as series in (qvar, eps)."""
    if m_max is None:
        m_max = required_m_max(eps_order)
    qs = VarSpec(qvar, 1, F(0), F(q_order), F(q_order))
    es = _eps_spec(eps_order)
    rows = []
    for m in range(1, m_max + 1):
        row = []
        for n in range(1, m_max + 1):
            grade = m + n - 1
            if grade > eps_order:
                row.append(MultiSeries.zero((qs, es)))
                continue
            ehat = eisenstein_hat(2 * m + 2 * n - 2, q_order, qvar).series.body
            entry = scalar_mul(comb(2 * m + 2 * n - 3, 2 * m - 1), ehat)
            entry = mul(entry, MultiSeries((es,), {(F(grade),): 1}))
            row.append(entry)
        rows.append(tuple(row))
    return AMatrixTrunc(qvar, q_order, eps_order, m_max, tuple(rows))


def _mat_mul(a, b, zero):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = zero
            for k in range(n):
                if a[i][k].is_zero() or b[k][j].is_zero():
                    continue
                acc = add(acc, mul(a[i][k], b[k][j]))
            row.append(acc)
        out.append(row)
    return out


@dataclass(frozen=True)
class SewingExpansion:
    """Period matrix entries (2*pi*i normalized, base point subtracted) as
    series in (q1, q2, eps)."""

    w11: MultiSeries
    w12: MultiSeries
    w22: MultiSeries
    q_order: int
    eps_order: int


@lru_cache(maxsize=None)
def period_matrix(q_order: int, eps_order: int,
                  m_max: int | None = None) -> SewingExpansion:
    """Exact expansion of the period matrix from the sewing construction.

    w11 = eps*(A(q2)(1 - A(q1)A(q2))^-1)_11, w12 = -eps*((1-A(q1)A(q2))^-1)_11,
    and w22 is w11 with the tori swapped.
    """
    if eps_order < 1:
        raise DomainError("eps_order must be at least 1")
    a1 = a_matrix(q_order, eps_order, QVAR1, m_max)
    a2 = a_matrix(q_order, eps_order, QVAR2, m_max)
    m = a1.m_max
    zero = MultiSeries.zero(())

    def neumann(first, second):
        """first * (1 - second*first)^-1 = sum_k first*(second*first)^k."""
        b = _mat_mul(second, first, zero)
        total = [row[:] for row in first]
        power = first
        while True:
            power = _mat_mul(power, b, zero)
            if all(e.is_zero() for row in power for e in row):
                break
            total = [[add(x, y) for x, y in zip(r1, r2)] for r1, r2 in zip(total, power)]
        return total

    A1 = [list(r) for r in a1.entries]
    A2 = [list(r) for r in a2.entries]
    eps = MultiSeries((_eps_spec(eps_order),), {(F(1),): 1})

    geo2 = neumann(A2, A1)        # A(q2) * (1 - A(q1)A(q2))^-1
    w11 = mul(eps, geo2[0][0])

    geo1 = neumann(A1, A2)        # A(q1) * (1 - A(q2)A(q1))^-1
    w22 = mul(eps, geo1[0][0])

    b = _mat_mul(A1, A2, zero)
    inv00 = MultiSeries.constant(1, ())
    power = None
    while True:
        power = b if power is None else _mat_mul(b, power, zero)
        if all(e.is_zero() for row in power for e in row):
            break
        inv00 = add(inv00, power[0][0])
    w12 = negate(mul(eps, inv00))
    return SewingExpansion(w11, w12, w22, q_order, eps_order)


@dataclass(frozen=True)
class FourierParams:
    """The Fourier variables as series in the pinching parameters."""

    qhat: PrefSeries
    shat: PrefSeries
    rhat: PrefSeries
    uhat: PrefSeries
    sewing: SewingExpansion


def fourier_params(sewing: SewingExpansion) -> FourierParams:
    """q = q1 exp(w11), s = q2 exp(w22), r = exp(w12), u = r + 1/r - 2."""
    qhat = PrefSeries(exp_series(sewing.w11), {QVAR1: F(1)})
    shat = PrefSeries(exp_series(sewing.w22), {QVAR2: F(1)})
    ehat_plus = exp_series(sewing.w12)
    ehat_minus = exp_series(negate(sewing.w12))
    rhat = PrefSeries(ehat_plus)
    u = add(ehat_plus, ehat_minus)
    u = add(u, MultiSeries.constant(-2, ()))
    # every term of w12 carries one power of eps, so u = 2(cosh(w12) - 1)
    # has eps-degree >= 2 throughout (not just in the stored range)
    u = u.with_min_floor(EPSVAR, F(2))
    uhat = PrefSeries(shift_var(u, EPSVAR, -2), {EPSVAR: F(2)})
    return FourierParams(qhat, shat, rhat, uhat, sewing)


def fourier_to_sewing(f: MultiSeries, params: FourierParams | SewingExpansion,
                      qvar: str = "q", svar: str = "s", rvar: str = "r",
                      uvar: str = "u") -> PrefSeries:
    """Rewrite a Fourier expansion in (q, s, r) or (q, s, u) as a series in
    the pinching parameters (q1, q2, eps)."""
    if isinstance(params, SewingExpansion):
        params = fourier_params(params)
    out = PrefSeries(f)
    if f.has_var(qvar):
        out = _subst_pref(out, qvar, params.qhat)
    if out.body.has_var(svar):
        out = _subst_pref(out, svar, params.shat)
    if out.body.has_var(uvar):
        out = _subst_pref(out, uvar, params.uhat)
    if out.body.has_var(rvar):
        out = _subst_pref(out, rvar, params.rhat)
    return out


def _subst_pref(p: PrefSeries, var: str, g: PrefSeries) -> PrefSeries:
    out = substitute(p.body, var, g)
    for n, e in p.prefactor.items():
        out = out.shift(n, e)
    return out
