"""Genus-two Siegel modular forms as exact Fourier expansions.

The ten even half-integral characteristic theta series generate everything
computed here: the weight-10 cusp form (2^-12 times the product of their
squares), the weight-12 form (a quarter of the sum of their 24th powers),
and a validated weight-4 candidate (a quarter of the sum of their 8th
powers).  The genus-two Eisenstein series of weights 4 and 6 are ingested
from their reference Fourier data, which is only known on the box of q- and
s-exponents <= 1; the validity machinery of :mod:`twoloop.series` keeps that
limitation attached to every derived quantity.

V-symmetric forms are canonically stored as polynomials in u = r + 1/r - 2;
the r-form is retained for the q -> 0 style degenerations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .elliptic import (
    EllipticForm,
    covariant_derivative,
    eisenstein,
    eisenstein_hat,
)
from .errors import DomainError, InternalError, NotAUnit, ValidationFailed
from .series import (
    UNBOUNDED,
    GaussRat,
    MultiSeries,
    PrefSeries,
    VarSpec,
    add,
    coeff,
    equal_on_joint_validity,
    mul,
    pow_int,
    r_to_u,
    scalar_mul,
)

F = Fraction
HALF = F(1, 2)

QVAR, RVAR, SVAR, UVAR = "q", "r", "s", "u"


@dataclass(frozen=True)
class Characteristic:
    """Half-integral theta characteristic [a; b], entries in {0, 1/2}."""

    a: tuple[Fraction, Fraction]
    b: tuple[Fraction, Fraction]

    def __post_init__(self):
        for x in self.a + self.b:
            if x not in (F(0), HALF):
                raise DomainError(f"characteristic entry {x} not in {{0, 1/2}}")

    @property
    def is_even(self) -> bool:
        parity = 4 * (self.a[0] * self.b[0] + self.a[1] * self.b[1])
        return parity % 2 == 0

    def label(self) -> str:
        fmt = lambda x: "0" if x == 0 else "1/2"  # noqa: E731
        return (f"[{fmt(self.a[0])},{fmt(self.a[1])};"
                f"{fmt(self.b[0])},{fmt(self.b[1])}]")


def all_characteristics() -> tuple[Characteristic, ...]:
    vals = (F(0), HALF)
    return tuple(
        Characteristic((a1, a2), (b1, b2))
        for a1 in vals for a2 in vals for b1 in vals for b2 in vals
    )


def even_characteristics() -> tuple[Characteristic, ...]:
    evens = tuple(c for c in all_characteristics() if c.is_even)
    if len(evens) != 10:
        raise InternalError(f"expected 10 even characteristics, got {len(evens)}")
    return evens


@dataclass(frozen=True)
class SiegelForm:
    """A Siegel modular form given by (truncated) Fourier data.

    ``fourier`` is the expansion in (q, r, s); ``fourier_u`` the V-symmetric
    rewriting in (q, s, u) when it exists.  ``group_full`` marks forms for
    the full symplectic modular group (as opposed to theta series with a
    multiplier system).
    """

    label: str
    weight: Fraction
    fourier: MultiSeries | None
    fourier_u: MultiSeries | None = None
    group_full: bool = True
    odd: bool = False

    def coeff_r(self, a, b, c) -> GaussRat:
        if self.fourier is None:
            raise DomainError(f"{self.label} has no r-form stored")
        return coeff(self.fourier, {QVAR: a, RVAR: b, SVAR: c})

    def coeff_u(self, a, c, j) -> GaussRat:
        if self.fourier_u is None:
            raise DomainError(f"{self.label} has no u-form stored")
        return coeff(self.fourier_u, {QVAR: a, SVAR: c, UVAR: j})


def _phase_quarter(x: Fraction) -> GaussRat:
    r = x % 1
    if r == 0:
        return GaussRat(1)
    if r == F(1, 4):
        return GaussRat(0, 1)
    if r == HALF:
        return GaussRat(-1)
    if r == F(3, 4):
        return GaussRat(0, -1)
    raise InternalError(f"theta phase exponent {x} off the quarter grid")


@lru_cache(maxsize=None)
def theta_char(char: Characteristic, q_order: int, s_order: int) -> SiegelForm:
    """Theta series with characteristic: the lattice sum over n in Z^2 of

        q^((n1+a1)^2/2) * r^((n1+a1)(n2+a2)) * s^((n2+a2)^2/2)
          * exp(2*pi*i*((n1+a1)b1 + (n2+a2)b2)).

    Odd characteristics cancel in pairs and return the zero form, flagged.
    """
    a1, a2 = char.a
    b1, b2 = char.b
    terms: dict[tuple[Fraction, ...], GaussRat] = {}
    n1 = 0
    while True:
        hit1 = False
        for m1 in (n1, -n1 - 1):
            x = m1 + a1
            eq = x * x / 2
            if eq >= q_order:
                continue
            hit1 = True
            n2 = 0
            while True:
                hit2 = False
                for m2 in (n2, -n2 - 1):
                    y = m2 + a2
                    es = y * y / 2
                    if es >= s_order:
                        continue
                    hit2 = True
                    key = (eq, x * y, es)
                    c = _phase_quarter(x * b1 + y * b2)
                    prev = terms.get(key)
                    s = c if prev is None else prev + c
                    if s.is_zero():
                        terms.pop(key, None)
                    else:
                        terms[key] = s
                if not hit2:
                    break
                n2 += 1
        if not hit1:
            break
        n1 += 1
    rmin = min((k[1] for k in terms), default=F(0))
    vars = (
        VarSpec(QVAR, 8, F(0), F(q_order), F(q_order)),
        VarSpec(RVAR, 4, min(rmin, F(0)), UNBOUNDED, UNBOUNDED),
        VarSpec(SVAR, 8, F(0), F(s_order), F(s_order)),
    )
    ms = MultiSeries(vars, terms)
    return SiegelForm(
        label=f"Theta{char.label()}",
        weight=HALF,
        fourier=ms,
        group_full=False,
        odd=not char.is_even,
    )


def _assert_real_integral(ms: MultiSeries, what: str) -> MultiSeries:
    for exps, c in ms.iter_terms():
        if c.im:
            raise InternalError(
                f"{what}: residual imaginary part {c!r} at {exps} "
                "(theta phases should cancel exactly)"
            )
        if any(e.denominator != 1 for e in exps):
            raise InternalError(f"{what}: fractional exponent {exps} survived")
    return ms.simplify_dens()


def assert_support_condition(ms: MultiSeries, uform: bool) -> None:
    """Fourier support of a full modular group Siegel form: the coefficient
    of q^a r^b s^c can be nonzero only if a, c >= 0 and b^2 <= 4ac."""
    for exps, _ in ms.iter_terms():
        if uform:
            a, c, j = exps[ms.var_index(QVAR)], exps[ms.var_index(SVAR)], exps[ms.var_index(UVAR)]
            b = j
        else:
            a, b, c = exps[ms.var_index(QVAR)], exps[ms.var_index(RVAR)], exps[ms.var_index(SVAR)]
        if a < 0 or c < 0 or b * b > 4 * a * c:
            raise InternalError(f"support condition violated at {exps}")


@lru_cache(maxsize=None)
def delta10(q_order: int = 3, s_order: int = 3) -> SiegelForm:
    """The weight-10 cusp form: 2^-12 times the product of the squares of
    the ten even theta series."""
    if q_order < 2 or s_order < 2:
        raise DomainError("delta10 needs orders >= 2")
    prod = None
    for char in even_characteristics():
        sq = theta_char(char, q_order, s_order).fourier
        sq = mul(sq, sq)
        prod = sq if prod is None else mul(prod, sq)
    prod = scalar_mul(F(1, 2**12), prod)
    rform = _assert_real_integral(prod, "Delta_10")
    assert_support_condition(rform, uform=False)
    uform = r_to_u(rform, RVAR, UVAR)
    assert_support_condition(uform, uform=True)
    return SiegelForm("Delta_10", F(10), rform, uform)


@lru_cache(maxsize=None)
def f12_siegel(q_order: int = 2, s_order: int = 2) -> SiegelForm:
    """The weight-12 form: a quarter of the sum of the 24th powers of the
    ten even theta series."""
    if q_order < 2 or s_order < 2:
        raise DomainError("f12 needs orders >= 2")
    total = None
    for char in even_characteristics():
        p = pow_int(theta_char(char, q_order, s_order).fourier, 24)
        total = p if total is None else add(total, p)
    total = scalar_mul(F(1, 4), total)
    rform = _assert_real_integral(total, "F_12")
    assert_support_condition(rform, uform=False)
    uform = r_to_u(rform, RVAR, UVAR)
    return SiegelForm("F_12", F(12), rform, uform)


def _uvar() -> VarSpec:
    return VarSpec(UVAR, 1, F(0), UNBOUNDED, UNBOUNDED)


def _box_spec(name: str, order: int) -> VarSpec:
    return VarSpec(name, 1, F(0), F(order), F(order))


@lru_cache(maxsize=None)
def psi_reference(k2: int) -> SiegelForm:
    """Reference Fourier data for the genus-two Eisenstein series of weight
    4 or 6, in u-form.

    The data is E_2k(q) E_2k(s) plus the corrections 14400*q*s*u +
    240*q*s*u^2 (weight 4) or 42336*q*s*u - 504*q*s*u^2 (weight 6), and is
    valid only on the box of q- and s-exponents <= 1; everything outside
    that box is recorded as unknown, not zero.
    """
    if k2 == 4:
        cu, cu2 = 14400, 240
    elif k2 == 6:
        cu, cu2 = 42336, -504
    else:
        raise DomainError("reference data exists for weights 4 and 6 only")
    eq = eisenstein(k2, 2, QVAR).series.body
    es = eisenstein(k2, 2, SVAR).series.body
    base = mul(eq, es)
    corr = MultiSeries(
        (_box_spec(QVAR, 2), _box_spec(SVAR, 2), _uvar()),
        {(F(1), F(1), F(1)): cu, (F(1), F(1), F(2)): cu2},
    )
    return SiegelForm(f"psi_{k2}", F(k2), None, add(base, corr))


@lru_cache(maxsize=None)
def psi4_theta_candidate(q_order: int = 3, s_order: int = 3) -> SiegelForm:
    """Weight-4 candidate: a quarter of the sum of the 8th powers of the ten
    even theta series.

    Exposed only after it reproduces the weight-4 reference data on the
    reference's entire validity region (including the 240*q*s*u^2 term that
    older published tables omitted).
    """
    total = None
    for char in even_characteristics():
        p = pow_int(theta_char(char, q_order, s_order).fourier, 8)
        total = p if total is None else add(total, p)
    total = scalar_mul(F(1, 4), total)
    rform = _assert_real_integral(total, "psi_4 candidate")
    assert_support_condition(rform, uform=False)
    uform = r_to_u(rform, RVAR, UVAR)
    ok, mismatch = equal_on_joint_validity(uform, psi_reference(4).fourier_u)
    if not ok:
        raise ValidationFailed(f"theta candidate for psi_4 disagrees at {mismatch}")
    return SiegelForm("psi_4_theta", F(4), rform, uform)


def t2_coefficients(k: int) -> tuple[Fraction, Fraction]:
    """The exact rational weights (c1, c2) of the weight-12 combination for
    a self-dual theory with N1 = 24k weight-one states."""
    c1 = F(1927 + 6 * k - k * k, 1152)
    c2 = F(1457 - 78 * k + k * k, 6336)
    return c1, c2


@lru_cache(maxsize=None)
def t2_selfdual(k: int, q_order: int = 2, s_order: int = 2) -> SiegelForm:
    """c1 psi_4^3 + c2 psi_6^2 + (1 - c1 - c2) F_12 for dual Coxeter number
    k >= 0; validity is the intersection of the operands' boxes."""
    if k < 0:
        raise DomainError("k must be a nonnegative integer")
    c1, c2 = t2_coefficients(k)
    p4 = psi_reference(4).fourier_u
    p6 = psi_reference(6).fourier_u
    f12 = f12_siegel(q_order, s_order).fourier_u
    combo = add(
        add(scalar_mul(c1, pow_int(p4, 3)), scalar_mul(c2, pow_int(p6, 2))),
        scalar_mul(1 - c1 - c2, f12),
    )
    return SiegelForm(f"T2(k={k})", F(12), None, combo)


ALLOWED_PATTERN_WEIGHTS = (4, 6, 8, 12)


def fk_fourier_pattern(a, weight: int) -> SiegelForm:
    """The observed Fourier template for a weight-k Siegel form that
    factorizes into f_k(q1) f_k(q2) with f_k = 1 + a q + O(q^2):

        (1 + a q)(1 + a s) + (a^2/k) q s u + a q s u^2 + O(q^2, s^2).
    """
    if weight not in ALLOWED_PATTERN_WEIGHTS:
        raise DomainError(f"pattern stated for weights {ALLOWED_PATTERN_WEIGHTS}")
    a = F(a)
    vars = (_box_spec(QVAR, 2), _box_spec(SVAR, 2), _uvar())
    terms = {
        (F(0), F(0), F(0)): GaussRat(1),
        (F(1), F(0), F(0)): GaussRat(a),
        (F(0), F(1), F(0)): GaussRat(a),
        (F(1), F(1), F(0)): GaussRat(a * a),
        (F(1), F(1), F(1)): GaussRat(a * a / weight),
        (F(1), F(1), F(2)): GaussRat(a),
    }
    return SiegelForm(f"pattern(a={a},k={weight})", F(weight), None,
                      MultiSeries(vars, terms))


def fk_eps_expansion(f: EllipticForm, weight: int,
                     eps_terms_known: int = 2) -> PrefSeries:
    """The pinching-parameter expansion of the weight-k Siegel form that
    degenerates to f_k(q1) f_k(q2):

        f(q1) f(q2) (1 + ((1/k)(Df/f)(q1)(Df/f)(q2)
                          - k Ehat_2(q1) Ehat_2(q2)) eps^2 + O(eps^4)),

    with D the weight-raising covariant derivative.  Odd eps powers vanish
    by the eps -> -eps reflection, so the series is returned valid through
    eps^3."""
    if weight <= 0:
        raise DomainError("weight must be positive")
    if f.series.body.constant_term().is_zero() or f.series.prefactor:
        raise NotAUnit(f"{f.label} must be a unit q-series")
    q_valid = min(v.valid for v in f.series.body.vars)
    order = int(q_valid)
    lf = covariant_derivative(f).series.mul(f.series.invert())
    l1 = lf.rename_vars({f.qvar(): "q1"})
    l2 = lf.rename_vars({f.qvar(): "q2"})
    e1 = eisenstein_hat(2, order, "q1").series
    e2 = eisenstein_hat(2, order, "q2").series
    term = l1.mul(l2).scalar(F(1, weight)) - e1.mul(e2).scalar(weight)
    eps2 = MultiSeries(
        (VarSpec("eps", 1, F(0), F(eps_terms_known + 2), F(eps_terms_known + 2)),),
        {(F(2),): 1},
    )
    bracket = PrefSeries.coerce(1).add(term.mul(PrefSeries(eps2)))
    f1 = f.series.rename_vars({f.qvar(): "q1"})
    f2 = f.series.rename_vars({f.qvar(): "q2"})
    return f1.mul(f2).mul(bracket)
