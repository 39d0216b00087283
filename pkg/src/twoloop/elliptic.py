"""Genus-one building blocks.

Bernoulli numbers, the Eisenstein series E_2k and their rescalings
Ehat_2k = -(B_2k/(2k)!) E_2k, the Dedekind eta product and the cusp form
Delta = eta^24, the weight-raising covariant derivative
D = q d/dq + k*Ehat_2, the Weierstrass expansion in the elliptic variable,
the three Jacobi theta series, the weight-12 theta combination f12, and the
normalized modular invariant J = q^-1 + 0 + 196884 q + ...
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .errors import DomainError, MissingWeight, OddCharacteristic, ValidationFailed
from .series import (
    UNBOUNDED,
    GaussRat,
    MultiSeries,
    PrefSeries,
    VarSpec,
    add,
    mul,
    pow_int,
    scalar_mul,
)

F = Fraction
HALF = F(1, 2)


@dataclass(frozen=True)
class EllipticForm:
    """A q-expansion together with its declared modular weight."""

    label: str
    weight: int
    series: PrefSeries

    def coeff(self, exp) -> GaussRat:
        return self.series.coeff({self.qvar(): exp})

    def qvar(self) -> str:
        for v in self.series.body.vars:
            return v.name
        return next(iter(self.series.prefactor), "q")


@lru_cache(maxsize=None)
def _bernoulli_upto(n: int) -> tuple[Fraction, ...]:
    # invert sum_{k>=0} t^k/(k+1)!  (the generating function of t/(e^t - 1))
    inv = [F(0)] * (n + 1)
    inv[0] = F(1)
    for m in range(1, n + 1):
        acc = F(0)
        for j in range(1, m + 1):
            acc += inv[m - j] * F(1, factorial(j + 1))
        inv[m] = -acc
    return tuple(inv[k] * factorial(k) for k in range(n + 1))


def bernoulli(n: int) -> Fraction:
    """The n-th Bernoulli number for even n >= 0."""
    if n < 0 or n % 2:
        raise DomainError(f"Bernoulli number requested for odd/negative {n}")
    return _bernoulli_upto(n)[n]


def sigma(power: int, n: int) -> int:
    """Divisor power sum sigma_power(n), by direct divisor enumeration."""
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d**power
            e = n // d
            if e != d:
                total += e**power
        d += 1
    return total


def _qvar(name: str, order: int) -> VarSpec:
    return VarSpec(name, 1, F(0), F(order), F(order))


@lru_cache(maxsize=None)
def eisenstein(k2: int, q_order: int, var: str = "q") -> EllipticForm:
    """E_2k = 1 - (4k/B_2k) * sum sigma_{2k-1}(n) q^n, for k2 = 2k >= 2."""
    if k2 < 2 or k2 % 2:
        raise DomainError(f"Eisenstein weight must be even and >= 2, got {k2}")
    b = bernoulli(k2)
    terms = {(F(0),): GaussRat(1)}
    for n in range(1, q_order):
        terms[(F(n),)] = GaussRat(-F(2 * k2, 1) / b * sigma(k2 - 1, n))
    body = MultiSeries((_qvar(var, q_order),), terms)
    return EllipticForm(f"E{k2}", k2, PrefSeries(body))


@lru_cache(maxsize=None)
def eisenstein_hat(k2: int, q_order: int, var: str = "q") -> EllipticForm:
    """Ehat_2k = -(B_2k/(2k)!) E_2k; constant term -B_2k/(2k)!."""
    e = eisenstein(k2, q_order, var)
    scale = -bernoulli(k2) / factorial(k2)
    return EllipticForm(f"Ehat{k2}", k2, e.series.scalar(scale))


@lru_cache(maxsize=None)
def euler_product(q_order: int, var: str = "q") -> MultiSeries:
    """prod_{n>=1} (1 - q^n), truncated."""
    spec = _qvar(var, q_order)
    out = MultiSeries.constant(1, (spec,))
    for n in range(1, q_order):
        factor = MultiSeries((spec,), {(F(0),): 1, (F(n),): -1})
        out = mul(out, factor)
    return out


@lru_cache(maxsize=None)
def dedekind_eta(q_order: int, var: str = "q") -> PrefSeries:
    """eta = q^(1/24) * prod (1 - q^n)."""
    return PrefSeries(euler_product(q_order, var), {var: F(1, 24)})


@lru_cache(maxsize=None)
def delta_cusp(q_order: int, var: str = "q") -> PrefSeries:
    """Delta = eta^24, with prefactor q^1 and unit body."""
    return dedekind_eta(q_order, var).pow_int(24)


def delta_form(q_order: int, var: str = "q") -> EllipticForm:
    return EllipticForm("Delta", 12, delta_cusp(q_order, var))


@lru_cache(maxsize=None)
def j_function(q_order: int, var: str = "q") -> PrefSeries:
    """J = E_4^3/Delta - 744 = q^-1 + 0 + 196884 q + ...

    Built from the ring generators rather than a table; the construction is
    only exposed after its constant term and q-coefficient are checked.
    """
    if q_order < 2:
        raise DomainError("J needs q_order >= 2 for its validation")
    inner = q_order + 1
    e4 = eisenstein(4, inner, var).series
    num = e4.pow_int(3)
    j = num.mul(delta_cusp(inner, var).invert())
    j = j.add(PrefSeries.coerce(-744))
    if j.coeff({var: 0}) != GaussRat(0) or j.coeff({var: 1}) != GaussRat(196884):
        raise ValidationFailed(
            "J construction failed its expansion check: "
            f"const={j.coeff({var: 0})!r}, q={j.coeff({var: 1})!r}"
        )
    return j


def covariant_derivative(f: EllipticForm) -> EllipticForm:
    """D f = q df/dq + k Ehat_2 f, a form of weight k + 2."""
    if f.weight is None:
        raise MissingWeight(f"{f.label} has no declared weight")
    var = f.qvar()
    out = f.series.q_log_deriv(var)
    if f.weight and not f.series.is_zero():
        body_order = None
        for v in f.series.body.vars:
            if v.name == var:
                body_order = v.valid
        if body_order is None or body_order >= UNBOUNDED:
            raise DomainError("covariant derivative needs a truncated q-series")
        e2 = eisenstein_hat(2, int(body_order), var).series
        out = out.add(e2.mul(f.series).scalar(f.weight))
    return EllipticForm(f"D({f.label})", f.weight + 2, out)


def weierstrass(z_order: int, q_order: int, zvar: str = "z", qvar: str = "q") -> MultiSeries:
    """1/z^2 + sum_{k>=2} Ehat_2k(q) z^(2k-2), truncated in z and q."""
    if z_order < 2:
        raise DomainError("z_order must be at least 2")
    zspec = VarSpec(zvar, 1, F(-2), F(z_order), F(z_order))
    qspec = _qvar(qvar, q_order)
    terms = {(F(-2), F(0)): GaussRat(1)}
    k = 2
    while 2 * k - 2 < z_order:
        ehat = eisenstein_hat(2 * k, q_order, qvar).series.body
        for (qe,), c in ehat.iter_terms():
            terms[(F(2 * k - 2), qe)] = c
        k += 1
    return MultiSeries((zspec, qspec), terms)


def is_odd_characteristic(a: Fraction, b: Fraction) -> bool:
    return (4 * Fraction(a) * Fraction(b)) % 2 == 1


def _phase(x: Fraction) -> GaussRat:
    """exp(2*pi*i*x) for x a multiple of 1/4."""
    r = x % 1
    table = {
        F(0): GaussRat(1),
        F(1, 4): GaussRat(0, 1),
        F(1, 2): GaussRat(-1),
        F(3, 4): GaussRat(0, -1),
    }
    if r not in table:
        raise DomainError(f"phase exponent {x} is not a multiple of 1/4")
    return table[r]


@lru_cache(maxsize=None)
def theta_jacobi(a, b, q_order: int, var: str = "q", require_nonzero: bool = False) -> PrefSeries:
    """theta[a;b](q) = sum_n q^((n+a)^2/2) exp(2*pi*i*(n+a)*b).

    The odd characteristic a = b = 1/2 cancels in pairs and yields the zero
    series; pass ``require_nonzero=True`` to make that an error.
    """
    a, b = Fraction(a), Fraction(b)
    if a not in (F(0), HALF) or b not in (F(0), HALF):
        raise DomainError("characteristics must lie in {0, 1/2}")
    if is_odd_characteristic(a, b) and require_nonzero:
        raise OddCharacteristic(f"theta[{a};{b}] vanishes identically")
    spec = VarSpec(var, 8, F(0), F(q_order), F(q_order))
    acc: dict[tuple[Fraction, ...], GaussRat] = {}
    n = 0
    while True:
        hit = False
        for m in (n, -n - 1):
            x = m + a
            e = x * x / 2
            if e < q_order:
                hit = True
                acc[(e,)] = acc.get((e,), GaussRat(0)) + _phase(x * b)
        if not hit:
            break
        n += 1
    terms = {k: c for k, c in acc.items() if not c.is_zero()}
    return PrefSeries(MultiSeries((spec,), terms))


EVEN_JACOBI_CHARS = ((F(0), F(0)), (F(0), HALF), (HALF, F(0)))


@lru_cache(maxsize=None)
def f12_elliptic(q_order: int, var: str = "q") -> MultiSeries:
    """f12 = (1/2) * sum of the 24th powers of the three even theta series
    = 1 + 1104 q + ..."""
    total = None
    for a, b in EVEN_JACOBI_CHARS:
        th = theta_jacobi(a, b, q_order, var, require_nonzero=True)
        p = pow_int(th.body, 24)
        total = p if total is None else add(total, p)
    half = scalar_mul(F(1, 2), total)
    return half.simplify_dens()
