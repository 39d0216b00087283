"""Exact sparse arithmetic for truncated multivariate Laurent series.

Coefficients are Gaussian rationals (exact complex rationals).  A series
carries an ordered list of variables and, per variable:

* ``den``     -- exponents are integer multiples of ``1/den``,
* ``min_exp`` -- a guaranteed Laurent floor,
* ``order``   -- the truncation bound (exclusive),
* ``valid``   -- the validity bound (exclusive, ``<= order``).

A coefficient is *known* when its exponent lies below ``valid`` in every
variable simultaneously; it is then either stored or exactly zero.  Anything
at or beyond ``valid`` in some variable is *unknown* -- as opposed to zero --
and asking for it raises :class:`~twoloop.errors.UnknownCoefficient`.  The
distinction matters for series ingested from reference tables that are only
printed to a finite order: arithmetic propagates the validity region so that
no operation fabricates a coefficient its operands cannot justify.

``order`` and ``valid`` of exact constructions are set to the sentinel
:data:`UNBOUNDED`, which behaves like infinity at every realistic working
order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from math import gcd, lcm

from .errors import (
    AsymmetryError,
    DomainError,
    FractionalExponentUnsupported,
    NonNilpotentExponent,
    NotAUnit,
    TruncationUnderflow,
    UnknownCoefficient,
)

#: Alias for the coefficient field's real subfield.
Rat = Fraction

#: Sentinel bound that behaves like +infinity for order/valid bookkeeping.
UNBOUNDED = Fraction(10**9)
_UNBOUNDED_THRESHOLD = Fraction(10**8)


def is_unbounded(x: Fraction) -> bool:
    return x >= _UNBOUNDED_THRESHOLD


def _cap(x: Fraction) -> Fraction:
    return x if x < UNBOUNDED else UNBOUNDED


_ZERO = Fraction(0)


def fmt_rat(x: Fraction) -> str:
    """Format a rational as ``"p"`` or ``"p/q"``."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rat(s: str) -> Fraction:
    return Fraction(s)


class GaussRat:
    """A Gaussian rational ``re + im*i`` with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @staticmethod
    def coerce(x) -> "GaussRat":
        if isinstance(x, GaussRat):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussRat(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to GaussRat")

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = GaussRat(other)
        if not isinstance(other, GaussRat):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __add__(self, other):
        other = GaussRat.coerce(other)
        return GaussRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussRat.coerce(other)
        return GaussRat(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussRat.coerce(other) - self

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __mul__(self, other):
        other = GaussRat.coerce(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        return GaussRat(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inverse(self) -> "GaussRat":
        n = self.re * self.re + self.im * self.im
        if not n:
            raise ZeroDivisionError("inverse of zero GaussRat")
        return GaussRat(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * GaussRat.coerce(other).inverse()

    def __rtruediv__(self, other):
        return GaussRat.coerce(other) * self.inverse()

    def conjugate(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def __repr__(self):
        if not self.im:
            return fmt_rat(self.re)
        if not self.re:
            return f"{fmt_rat(self.im)}*i"
        sign = "+" if self.im > 0 else "-"
        return f"({fmt_rat(self.re)}{sign}{fmt_rat(abs(self.im))}*i)"


GR_ZERO = GaussRat(0)
GR_ONE = GaussRat(1)


@dataclass(frozen=True)
class VarSpec:
    """Grading data for one series variable.

    Exponents of this variable are integer multiples of ``1/den`` lying in
    ``[min_exp, order)``; those below ``valid`` are exactly determined.
    """

    name: str
    den: int = 1
    min_exp: Fraction = _ZERO
    order: Fraction = UNBOUNDED
    valid: Fraction = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.den < 1:
            raise DomainError(f"den must be >= 1, got {self.den}")
        for field in ("min_exp", "order", "valid"):
            v = getattr(self, field)
            if v is not None and not isinstance(v, Fraction):
                object.__setattr__(self, field, Fraction(v))
        if self.valid is None:
            object.__setattr__(self, "valid", self.order)
        if not (self.min_exp <= self.valid <= self.order):
            raise DomainError(
                f"{self.name}: need min_exp <= valid <= order, got "
                f"{self.min_exp}, {self.valid}, {self.order}"
            )

    def kmax(self) -> int:
        """Largest scaled exponent that is still valid (inclusive)."""
        v = self.valid * self.den
        return (v.numerator - 1) // v.denominator if v.denominator > 1 else v.numerator - 1

    def kmin(self) -> int:
        """Smallest scaled exponent allowed by the Laurent floor."""
        m = self.min_exp * self.den
        return -((-m.numerator) // m.denominator)


def _scale_exp(e, den: int) -> int:
    e = e if isinstance(e, Fraction) else Fraction(e)
    k = e * den
    if k.denominator != 1:
        raise FractionalExponentUnsupported(
            f"exponent {e} is not a multiple of 1/{den}"
        )
    return k.numerator


class MultiSeries:
    """Sparse truncated multivariate Laurent series.

    ``terms`` maps tuples of scaled integer exponents (one per variable, in
    ``vars`` order, scaled by each variable's ``den``) to nonzero
    :class:`GaussRat` coefficients.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, vars: tuple[VarSpec, ...], terms: dict | None = None, *, scaled=False):
        self.vars = tuple(vars)
        names = [v.name for v in self.vars]
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate variable names: {names}")
        store: dict[tuple[int, ...], GaussRat] = {}
        if terms:
            for exps, c in terms.items():
                c = GaussRat.coerce(c)
                if c.is_zero():
                    continue
                if scaled:
                    key = tuple(exps)
                else:
                    key = tuple(_scale_exp(e, v.den) for e, v in zip(exps, self.vars))
                for k, v in zip(key, self.vars):
                    if k < v.kmin():
                        raise DomainError(
                            f"exponent below Laurent floor of {v.name}: {Fraction(k, v.den)} < {v.min_exp}"
                        )
                if all(k <= v.kmax() for k, v in zip(key, self.vars)):
                    if key in store:
                        c = store[key] + c
                        if c.is_zero():
                            del store[key]
                            continue
                    store[key] = c
        self.terms = store

    # -- construction helpers -------------------------------------------

    @staticmethod
    def zero(vars: tuple[VarSpec, ...] = ()) -> "MultiSeries":
        return MultiSeries(vars, {})

    @staticmethod
    def constant(c, vars: tuple[VarSpec, ...] = ()) -> "MultiSeries":
        zero_key = (Fraction(0),) * len(vars)
        return MultiSeries(vars, {zero_key: GaussRat.coerce(c)})

    @staticmethod
    def monomial(var: VarSpec, exp, c=1) -> "MultiSeries":
        return MultiSeries((var,), {(Fraction(exp),): GaussRat.coerce(c)})

    def spec(self, name: str) -> VarSpec:
        for v in self.vars:
            if v.name == name:
                return v
        raise KeyError(name)

    def has_var(self, name: str) -> bool:
        return any(v.name == name for v in self.vars)

    def var_index(self, name: str) -> int:
        for i, v in enumerate(self.vars):
            if v.name == name:
                return i
        raise KeyError(name)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def iter_terms(self):
        """Yield ``(exponent_tuple_of_Fractions, coefficient)`` pairs."""
        dens = [v.den for v in self.vars]
        for key, c in self.terms.items():
            yield tuple(Fraction(k, d) for k, d in zip(key, dens)), c

    def constant_term(self) -> GaussRat:
        key = (0,) * len(self.vars)
        return self.terms.get(key, GR_ZERO)

    # -- metadata manipulation ------------------------------------------

    def _with_vars(self, new_vars: tuple[VarSpec, ...]) -> "MultiSeries":
        """Replace the var list (same order/dens), re-pruning terms."""
        out = MultiSeries.zero(new_vars)
        kmaxes = [v.kmax() for v in new_vars]
        out.terms = {
            k: c for k, c in self.terms.items()
            if all(ki <= m for ki, m in zip(k, kmaxes))
        }
        return out

    def with_min_floor(self, name: str, floor) -> "MultiSeries":
        """Raise the declared Laurent floor of one variable.

        Stored terms are checked against the new floor; the caller asserts
        that the (unknowable) truncated tail also respects it.
        """
        floor = Fraction(floor)
        i = self.var_index(name)
        v = self.vars[i]
        if floor <= v.min_exp:
            return self
        for k in self.terms:
            if Fraction(k[i], v.den) < floor:
                raise DomainError(
                    f"stored {name}-exponent {Fraction(k[i], v.den)} below "
                    f"requested floor {floor}"
                )
        new_vars = list(self.vars)
        new_vars[i] = replace(v, min_exp=floor)
        out = MultiSeries.zero(tuple(new_vars))
        out.terms = dict(self.terms)
        return out

    def with_validity(self, **bounds) -> "MultiSeries":
        """Lower validity bounds; prunes now-unknown terms."""
        new_vars = []
        for v in self.vars:
            if v.name in bounds:
                b = Fraction(bounds[v.name])
                if b > v.valid:
                    raise DomainError(f"cannot raise validity of {v.name}")
                new_vars.append(replace(v, valid=max(b, v.min_exp)))
            else:
                new_vars.append(v)
        return self._with_vars(tuple(new_vars))

    def rename_vars(self, mapping: dict[str, str]) -> "MultiSeries":
        new_vars = tuple(replace(v, name=mapping.get(v.name, v.name)) for v in self.vars)
        out = MultiSeries.zero(new_vars)
        out.terms = dict(self.terms)
        return out

    def with_den(self, name: str, den: int) -> "MultiSeries":
        """Re-grid one variable to a denominator divisible by all current
        exponent denominators."""
        i = self.var_index(name)
        old = self.vars[i]
        if den % old.den and any(k[i] * den % old.den for k in self.terms):
            raise FractionalExponentUnsupported(
                f"cannot re-grid {name} from den {old.den} to {den}"
            )
        factor = Fraction(den, old.den)
        new_vars = list(self.vars)
        new_vars[i] = replace(old, den=den)
        out = MultiSeries.zero(tuple(new_vars))
        out.terms = {
            k[:i] + (int(k[i] * factor),) + k[i + 1:]: c for k, c in self.terms.items()
        }
        return out

    def simplify_dens(self) -> "MultiSeries":
        """Shrink each variable's den to the smallest grid supporting the
        stored terms (useful before serialization)."""
        out = self
        for i, v in enumerate(list(self.vars)):
            if v.den == 1:
                continue
            g = v.den
            for k in out.terms:
                g = gcd(g, k[i])
                if g == 1:
                    break
            if g > 1:
                new = v.den // g
                idx = out.var_index(v.name)
                new_vars = list(out.vars)
                new_vars[idx] = replace(v, den=new)
                tmp = MultiSeries.zero(tuple(new_vars))
                tmp.terms = {
                    k[:idx] + (k[idx] // g,) + k[idx + 1:]: c for k, c in out.terms.items()
                }
                out = tmp
        return out

    # -- alignment -------------------------------------------------------

    def _aligned_to(self, merged: tuple[VarSpec, ...]) -> dict[tuple[int, ...], GaussRat]:
        """Re-key terms onto a merged variable list (missing vars -> 0)."""
        pos = {v.name: i for i, v in enumerate(merged)}
        scale = {}
        for v in self.vars:
            m = merged[pos[v.name]]
            scale[v.name] = m.den // v.den
        n = len(merged)
        idx = [pos[v.name] for v in self.vars]
        mult = [scale[v.name] for v in self.vars]
        out = {}
        for k, c in self.terms.items():
            key = [0] * n
            for j, ki in enumerate(k):
                key[idx[j]] = ki * mult[j]
            out[tuple(key)] = c
        return out

    def __repr__(self):
        parts = []
        for exps, c in sorted(self.iter_terms())[:6]:
            mono = "*".join(
                f"{v.name}^{fmt_rat(e)}" for v, e in zip(self.vars, exps) if e
            )
            parts.append(f"{c!r}" + (f"*{mono}" if mono else ""))
        more = "" if len(self.terms) <= 6 else f" + ... ({len(self.terms)} terms)"
        body = " + ".join(parts) if parts else "0"
        return f"<MultiSeries {body}{more}>"


def _merge_vars_add(a: MultiSeries, b: MultiSeries) -> tuple[VarSpec, ...]:
    a_names = {v.name for v in a.vars}
    b_names = {v.name for v in b.vars}
    by_name: dict[str, VarSpec] = {}
    order: list[str] = []
    for v in a.vars + b.vars:
        if v.name not in by_name:
            if v.name not in (a_names & b_names):
                # the other operand carries this variable at exponent 0
                v = replace(v, min_exp=min(v.min_exp, _ZERO))
            by_name[v.name] = v
            order.append(v.name)
        else:
            u = by_name[v.name]
            den = lcm(u.den, v.den)
            by_name[v.name] = VarSpec(
                v.name,
                den,
                min(u.min_exp, v.min_exp),
                _cap(min(u.order, v.order)),
                _cap(min(u.valid, v.valid)),
            )
    return tuple(by_name[n] for n in order)


def _merge_vars_mul(a: MultiSeries, b: MultiSeries) -> tuple[VarSpec, ...]:
    a_by = {v.name: v for v in a.vars}
    b_by = {v.name: v for v in b.vars}
    order: list[str] = [v.name for v in a.vars]
    order += [v.name for v in b.vars if v.name not in a_by]
    out = []
    for n in order:
        u = a_by.get(n)
        v = b_by.get(n)
        if u is None:
            u = VarSpec(n, v.den)  # exponent 0, fully known
        if v is None:
            v = VarSpec(n, u.den)
        den = lcm(u.den, v.den)
        out.append(
            VarSpec(
                n,
                den,
                u.min_exp + v.min_exp,
                _cap(min(u.order + v.min_exp, v.order + u.min_exp)),
                _cap(min(u.valid + v.min_exp, v.valid + u.min_exp)),
            )
        )
    return tuple(out)


def add(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    """Coefficientwise sum; validity is the pointwise minimum."""
    merged = _merge_vars_add(a, b)
    ta = a._aligned_to(merged)
    tb = b._aligned_to(merged)
    kmaxes = [v.kmax() for v in merged]
    out = MultiSeries.zero(merged)
    res = dict(ta)
    for k, c in tb.items():
        cur = res.get(k)
        s = c if cur is None else cur + c
        if s.is_zero():
            res.pop(k, None)
        else:
            res[k] = s
    out.terms = {
        k: c for k, c in res.items() if all(ki <= m for ki, m in zip(k, kmaxes))
    }
    return out


def negate(a: MultiSeries) -> MultiSeries:
    out = MultiSeries.zero(a.vars)
    out.terms = {k: -c for k, c in a.terms.items()}
    return out


def sub(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    return add(a, negate(b))


def scalar_mul(c, a: MultiSeries) -> MultiSeries:
    c = GaussRat.coerce(c)
    out = MultiSeries.zero(a.vars)
    if not c.is_zero():
        out.terms = {k: c * v for k, v in a.terms.items()}
    return out


def _den_lcm(terms: dict) -> int:
    out = 1
    for c in terms.values():
        out = lcm(out, c.re.denominator, c.im.denominator)
    return out


def mul(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    """Truncated Cauchy product with validity propagation.

    Coefficients are scaled by their common denominators first, so the inner
    loop works on Gaussian integers with exponent tuples packed into single
    ints (one radix field per variable, sized so that every achievable sum
    stays in its field); the exact rescaling happens once per result term.
    """
    merged = _merge_vars_mul(a, b)
    out = MultiSeries.zero(merged)
    if a.is_zero() or b.is_zero():
        return out
    ta = a._aligned_to(merged)
    tb = b._aligned_to(merged)
    kmaxes = [v.kmax() for v in merged]
    nvars = len(merged)
    la, lb = _den_lcm(ta), _den_lcm(tb)
    if nvars == 0:
        (ca,), (cb,) = ta.values(), tb.values()
        c = ca * cb
        if not c.is_zero():
            out.terms = {(): c}
        return out
    min_a = [min(k[i] for k in ta) for i in range(nvars)]
    min_b = [min(k[i] for k in tb) for i in range(nvars)]
    max_a = [max(k[i] for k in ta) for i in range(nvars)]
    max_b = [max(k[i] for k in tb) for i in range(nvars)]
    radix = [ma + mb - qa - qb + 1 for ma, mb, qa, qb in zip(max_a, max_b, min_a, min_b)]
    strides = [1] * nvars
    for i in range(nvars - 2, -1, -1):
        strides[i] = strides[i + 1] * radix[i + 1]

    def pack(k, base):
        return sum((ki - bi) * s for ki, bi, s in zip(k, base, strides))

    items_a = [(pack(k, min_a), (c.re * la).numerator, (c.im * la).numerator)
               for k, c in ta.items()]
    items_b = [(pack(k, min_b), (c.re * lb).numerator, (c.im * lb).numerator)
               for k, c in tb.items()]
    acc: dict[int, list] = {}
    get = acc.get
    for p1, a1, b1 in items_a:
        if b1:
            for p2, a2, b2 in items_b:
                p = p1 + p2
                cur = get(p)
                if cur is None:
                    acc[p] = [a1 * a2 - b1 * b2, a1 * b2 + b1 * a2]
                else:
                    cur[0] += a1 * a2 - b1 * b2
                    cur[1] += a1 * b2 + b1 * a2
        else:
            for p2, a2, b2 in items_b:
                p = p1 + p2
                cur = get(p)
                if cur is None:
                    acc[p] = [a1 * a2, a1 * b2]
                else:
                    cur[0] += a1 * a2
                    cur[1] += a1 * b2
    scale = la * lb
    lo = [qa + qb for qa, qb in zip(min_a, min_b)]
    res = {}
    for p, (re, im) in acc.items():
        if not re and not im:
            continue
        key = []
        rem = p
        ok = True
        for i in range(nvars):
            if strides[i] != 1:
                ki, rem = divmod(rem, strides[i])
            else:
                ki, rem = rem, 0
            ki += lo[i]
            if ki > kmaxes[i]:
                ok = False
                break
            key.append(ki)
        if ok:
            res[tuple(key)] = GaussRat(Fraction(re, scale), Fraction(im, scale))
    out.terms = res
    return out


def pow_int(a: MultiSeries, n: int) -> MultiSeries:
    """``a**n`` for integer ``n >= 0`` (binary powering, truncation kept)."""
    if n < 0:
        raise DomainError("negative powers need PrefSeries.invert")
    result = None
    base = a
    while n:
        if n & 1:
            result = base if result is None else mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    if result is None:
        return MultiSeries.constant(1, a.vars)
    return result


def _check_nilpotent(a: MultiSeries) -> None:
    zero_key = (0,) * len(a.vars)
    for k in a.terms:
        if k == zero_key:
            raise NonNilpotentExponent("constant term must vanish")
        if any(ki < 0 for ki in k):
            raise NonNilpotentExponent("negative exponents are not nilpotent")
    for i, v in enumerate(a.vars):
        if any(k[i] for k in a.terms) and is_unbounded(v.order):
            raise TruncationUnderflow(
                f"exp/inversion in {v.name} needs a finite truncation order"
            )


def exp_series(a: MultiSeries) -> MultiSeries:
    """``sum a^k / k!`` for a series with vanishing constant term."""
    _check_nilpotent(a)
    result = MultiSeries.constant(1, a.vars)
    term = MultiSeries.constant(1, a.vars)
    k = 0
    while True:
        k += 1
        term = scalar_mul(Fraction(1, k), mul(term, a))
        if term.is_zero():
            break
        result = add(result, term)
    return result


def coeff(a: MultiSeries, exps: dict) -> GaussRat:
    """Coefficient at the given exponents (missing variables mean 0).

    Raises :class:`UnknownCoefficient` outside the validity region.
    """
    key = []
    for v in a.vars:
        e = Fraction(exps.get(v.name, 0))
        if e >= v.valid:
            raise UnknownCoefficient(
                f"{v.name}^{e} is at or beyond validity {fmt_rat(v.valid)}"
            )
        k = e * v.den
        key.append(k.numerator if k.denominator == 1 else None)
    for name, e in exps.items():
        if not a.has_var(name) and Fraction(e) != 0:
            return GR_ZERO
    if None in key:
        return GR_ZERO  # off-grid exponent inside the validity region
    return a.terms.get(tuple(key), GR_ZERO)


def limit_var_zero(a: MultiSeries, name: str) -> MultiSeries:
    """The limit of the series as one variable goes to zero."""
    i = a.var_index(name)
    v = a.vars[i]
    if v.valid <= 0:
        raise UnknownCoefficient(f"{name}^0 is outside the validity region")
    if any(k[i] < 0 for k in a.terms):
        raise DomainError(f"limit {name}->0 across a pole")
    new_vars = a.vars[:i] + a.vars[i + 1:]
    out = MultiSeries.zero(new_vars)
    out.terms = {k[:i] + k[i + 1:]: c for k, c in a.terms.items() if k[i] == 0}
    return out


def set_var_one(a: MultiSeries, name: str) -> MultiSeries:
    """Evaluate one variable at 1 (requires full validity in it)."""
    i = a.var_index(name)
    v = a.vars[i]
    if not is_unbounded(v.valid):
        raise UnknownCoefficient(
            f"setting {name}=1 needs every {name}-coefficient; validity is "
            f"only {fmt_rat(v.valid)}"
        )
    new_vars = a.vars[:i] + a.vars[i + 1:]
    out = MultiSeries.zero(new_vars)
    res: dict[tuple[int, ...], GaussRat] = {}
    for k, c in a.terms.items():
        key = k[:i] + k[i + 1:]
        cur = res.get(key)
        s = c if cur is None else cur + c
        if s.is_zero():
            res.pop(key, None)
        else:
            res[key] = s
    out.terms = res
    return out


def _symmetric_power_polys(bmax: int) -> list[list[int]]:
    """Coefficient lists (in u) of r^b + r^-b, via the three-term recursion
    p_{b+1} = (u+2) p_b - p_{b-1} with p_0 = 2, p_1 = u + 2."""
    polys = [[2], [2, 1]]
    while len(polys) <= bmax:
        prev, cur = polys[-2], polys[-1]
        nxt = [0] * (len(cur) + 1)
        for j, c in enumerate(cur):
            nxt[j] += 2 * c
            nxt[j + 1] += c
        for j, c in enumerate(prev):
            nxt[j] -= c
        polys.append(nxt)
    return polys


def r_to_u(a: MultiSeries, rname: str = "r", uname: str = "u") -> MultiSeries:
    """Rewrite a series symmetric under ``r <-> 1/r`` as a polynomial in
    ``u = r + 1/r - 2``."""
    i = a.var_index(rname)
    v = a.vars[i]
    if not is_unbounded(v.valid):
        raise UnknownCoefficient(
            f"r->u rewriting needs every {rname}-coefficient"
        )
    groups: dict[tuple[int, ...], dict[int, GaussRat]] = {}
    for k, c in a.terms.items():
        if k[i] % v.den:
            raise FractionalExponentUnsupported(
                f"{rname}-exponent {Fraction(k[i], v.den)} is not an integer"
            )
        rest = k[:i] + k[i + 1:]
        groups.setdefault(rest, {})[k[i] // v.den] = c
    bmax = 0
    for rest, slots in groups.items():
        for b, c in slots.items():
            if slots.get(-b, GR_ZERO) != c:
                raise AsymmetryError(
                    f"coefficient mismatch between {rname}^{b} and {rname}^{-b}"
                )
            bmax = max(bmax, abs(b))
    polys = _symmetric_power_polys(bmax)
    uvar = VarSpec(uname, 1, Fraction(0), UNBOUNDED, UNBOUNDED)
    new_vars = a.vars[:i] + a.vars[i + 1:] + (uvar,)
    out = MultiSeries.zero(new_vars)
    res: dict[tuple[int, ...], GaussRat] = {}
    for rest, slots in groups.items():
        ucoeffs: dict[int, GaussRat] = {}
        for b, c in slots.items():
            if b < 0:
                continue
            poly = polys[b]
            scale = c if b else scalar_mul_coeff(c, Fraction(1, 2))
            for j, pc in enumerate(poly):
                if pc:
                    cur = ucoeffs.get(j, GR_ZERO) + scale * pc
                    ucoeffs[j] = cur
        for j, c in ucoeffs.items():
            if not c.is_zero():
                res[rest + (j,)] = c
    out.terms = res
    return out


def scalar_mul_coeff(c: GaussRat, x) -> GaussRat:
    return c * GaussRat.coerce(x)


def u_to_r(a: MultiSeries, uname: str = "u", rname: str = "r") -> MultiSeries:
    """Inverse of :func:`r_to_u`: substitute ``u = r + 1/r - 2``."""
    i = a.var_index(uname)
    v = a.vars[i]
    if not is_unbounded(v.valid):
        raise UnknownCoefficient("u->r substitution needs full u validity")
    rvar = VarSpec(rname, 1, -UNBOUNDED, UNBOUNDED, UNBOUNDED)
    base = MultiSeries(
        (rvar,), {(Fraction(1),): 1, (Fraction(-1),): 1, (Fraction(0),): -2}
    )
    new_vars = a.vars[:i] + a.vars[i + 1:]
    out = None
    powers = {0: MultiSeries.constant(1, (rvar,))}
    jmax = max((k[i] for k in a.terms), default=0)
    for j in range(1, jmax + 1):
        powers[j] = mul(powers[j - 1], base)
    for k, c in a.terms.items():
        rest = k[:i] + k[i + 1:]
        piece = MultiSeries.zero(new_vars)
        piece.terms = {rest: c}
        piece = mul(piece, powers[k[i]])
        out = piece if out is None else add(out, piece)
    if out is None:
        out = MultiSeries.zero(new_vars + (rvar,))
    return out


def shift_var(a: MultiSeries, name: str, amount) -> MultiSeries:
    """Multiply by the exact monomial ``name**amount`` (bounds shift along)."""
    amount = Fraction(amount)
    if not amount:
        return a
    if not a.has_var(name):
        a = mul(a, MultiSeries.constant(1, (VarSpec(name, amount.denominator),)))
    i = a.var_index(name)
    v = a.vars[i]
    den = lcm(v.den, amount.denominator)
    if den != v.den:
        a = a.with_den(name, den)
        i = a.var_index(name)
        v = a.vars[i]
    dk = int(amount * v.den)
    new_vars = list(a.vars)
    new_vars[i] = VarSpec(
        v.name, v.den, v.min_exp + amount,
        _cap(v.order + amount), _cap(v.valid + amount),
    )
    out = MultiSeries.zero(tuple(new_vars))
    out.terms = {k[:i] + (k[i] + dk,) + k[i + 1:]: c for k, c in a.terms.items()}
    return out


def q_log_deriv(a: MultiSeries, name: str) -> MultiSeries:
    """``x d/dx`` applied to the series (exponents are unchanged)."""
    i = a.var_index(name)
    den = a.vars[i].den
    out = MultiSeries.zero(a.vars)
    out.terms = {
        k: c * Fraction(k[i], den) for k, c in a.terms.items() if k[i]
    }
    return out


# ---------------------------------------------------------------------------
# PrefSeries


class PrefSeries:
    """A :class:`MultiSeries` times an exact monomial prefactor.

    The prefactor holds one rational exponent per variable (for factors such
    as ``eps**(-C/12)`` or ``q**(1/24)``), so the body can stay on a coarse
    exponent grid and, for units, keep an invertible constant term.
    """

    __slots__ = ("prefactor", "body")

    def __init__(self, body: MultiSeries, prefactor: dict[str, Fraction] | None = None):
        self.body = body
        pref = {}
        for name, e in (prefactor or {}).items():
            e = Fraction(e)
            if e:
                pref[name] = e
        self.prefactor = pref

    @staticmethod
    def coerce(x) -> "PrefSeries":
        if isinstance(x, PrefSeries):
            return x
        if isinstance(x, MultiSeries):
            return PrefSeries(x)
        return PrefSeries(MultiSeries.constant(GaussRat.coerce(x)))

    def is_zero(self) -> bool:
        return self.body.is_zero()

    def is_unit(self) -> bool:
        if any(k < 0 for key in self.body.terms for k in key):
            return False
        return not self.body.constant_term().is_zero()

    def __repr__(self):
        pref = "*".join(f"{n}^{fmt_rat(e)}" for n, e in sorted(self.prefactor.items()))
        return f"<PrefSeries {pref or '1'} * {self.body!r}>"

    # -- arithmetic ------------------------------------------------------

    def mul(self, other) -> "PrefSeries":
        other = PrefSeries.coerce(other)
        pref = dict(self.prefactor)
        for n, e in other.prefactor.items():
            pref[n] = pref.get(n, _ZERO) + e
        return PrefSeries(mul(self.body, other.body), pref)

    def __mul__(self, other):
        return self.mul(other)

    __rmul__ = __mul__

    def scalar(self, c) -> "PrefSeries":
        return PrefSeries(scalar_mul(c, self.body), self.prefactor)

    def shift(self, name: str, amount) -> "PrefSeries":
        """Multiply by the monomial ``name**amount`` (prefactor only)."""
        amount = Fraction(amount)
        pref = dict(self.prefactor)
        pref[name] = pref.get(name, _ZERO) + amount
        return PrefSeries(self.body, pref)

    def _body_shifted(self, shifts: dict[str, Fraction]) -> MultiSeries:
        """Push monomial exponents from the prefactor into the body."""
        body = self.body
        for name, amount in shifts.items():
            body = shift_var(body, name, amount)
        return body

    def add(self, other) -> "PrefSeries":
        other = PrefSeries.coerce(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        names = set(self.prefactor) | set(other.prefactor)
        common = {n: min(self.prefactor.get(n, _ZERO), other.prefactor.get(n, _ZERO))
                  for n in names}
        a = self._body_shifted({n: self.prefactor.get(n, _ZERO) - e for n, e in common.items()})
        b = other._body_shifted({n: other.prefactor.get(n, _ZERO) - e for n, e in common.items()})
        return PrefSeries(add(a, b), common)

    def __add__(self, other):
        return self.add(other)

    __radd__ = __add__

    def __sub__(self, other):
        return self.add(PrefSeries.coerce(other).scalar(-1))

    def __neg__(self):
        return self.scalar(-1)

    def invert(self) -> "PrefSeries":
        """Geometric-series inversion; the prefactor is negated."""
        c0 = self.body.constant_term()
        if c0.is_zero() or any(k < 0 for key in self.body.terms for k in key):
            raise NotAUnit("body has no invertible constant term")
        one = MultiSeries.constant(1, self.body.vars)
        x = sub(one, scalar_mul(c0.inverse(), self.body))
        for i, v in enumerate(x.vars):
            if any(k[i] for k in x.terms) and is_unbounded(v.order):
                raise TruncationUnderflow(
                    f"inversion in {v.name} needs a finite truncation order"
                )
        result = one
        term = one
        while True:
            term = mul(term, x)
            if term.is_zero():
                break
            result = add(result, term)
        result = scalar_mul(c0.inverse(), result)
        return PrefSeries(result, {n: -e for n, e in self.prefactor.items()})

    def pow_int(self, n: int) -> "PrefSeries":
        if n < 0:
            return self.invert().pow_int(-n)
        pref = {k: e * n for k, e in self.prefactor.items()}
        return PrefSeries(pow_int(self.body, n), pref)

    def __pow__(self, n: int):
        return self.pow_int(n)

    def mul_series(self, other: MultiSeries) -> "PrefSeries":
        return self.mul(PrefSeries(other))

    def truediv(self, other) -> "PrefSeries":
        return self.mul(PrefSeries.coerce(other).invert())

    def __truediv__(self, other):
        return self.truediv(other)

    # -- queries ---------------------------------------------------------

    def coeff(self, exps: dict) -> GaussRat:
        """Coefficient at absolute exponents (prefactor included)."""
        rel = dict(exps)
        for n, e in self.prefactor.items():
            rel[n] = Fraction(rel.get(n, 0)) - e
        for n, e in list(rel.items()):
            if not self.body.has_var(n):
                if Fraction(e) != 0:
                    return GR_ZERO
                del rel[n]
        return coeff(self.body, rel)

    def leading_exponents(self) -> dict[str, Fraction]:
        """Sound per-variable lower bounds on the exponents this series can
        contain: prefactor plus min(lowest stored exponent, validity bound).

        Variables along which the series provably has no content are omitted.
        """
        lead = dict(self.prefactor)
        for i, v in enumerate(self.body.vars):
            stored = [k[i] for k in self.body.terms]
            floor = None
            if stored:
                floor = Fraction(min(stored), v.den)
            if not is_unbounded(v.valid):
                floor = v.valid if floor is None else min(floor, v.valid)
            if floor is not None:
                lead[v.name] = lead.get(v.name, _ZERO) + floor
            elif v.name in lead and not lead[v.name]:
                del lead[v.name]
        return lead

    def rename_vars(self, mapping: dict[str, str]) -> "PrefSeries":
        return PrefSeries(
            self.body.rename_vars(mapping),
            {mapping.get(n, n): e for n, e in self.prefactor.items()},
        )

    def q_log_deriv(self, name: str) -> "PrefSeries":
        """``x d/dx`` including the prefactor exponent."""
        p = self.prefactor.get(name, _ZERO)
        body = q_log_deriv(self.body, name) if self.body.has_var(name) else \
            MultiSeries.zero(self.body.vars)
        if p:
            body = add(body, scalar_mul(p, self.body))
        return PrefSeries(body, self.prefactor)

    def cap_absolute_valid(self, name: str, bound: Fraction) -> "PrefSeries":
        """Lower the validity of one variable, measured in absolute
        (prefactor-included) exponents."""
        rel = bound - self.prefactor.get(name, _ZERO)
        if not self.body.has_var(name):
            body = mul(self.body, MultiSeries.constant(1, (VarSpec(name, 1),)))
        else:
            body = self.body
        v = body.spec(name)
        if rel >= v.valid:
            return PrefSeries(body, self.prefactor)
        rel = max(rel, v.min_exp)
        return PrefSeries(body.with_validity(**{name: rel}), self.prefactor)


def substitute(f: MultiSeries, var: str, g: PrefSeries) -> PrefSeries:
    """Homomorphic substitution of a series for one variable.

    The remaining variables of ``f`` pass through unchanged.  If ``f`` has
    finite validity in ``var``, the unknown tail must be ordered away: every
    leading exponent of ``g`` must be nonnegative with at least one strictly
    positive, and the result's validity is capped accordingly.
    """
    if not f.has_var(var):
        return PrefSeries(f)
    i = f.var_index(var)
    v = f.vars[i]
    g = PrefSeries.coerce(g)
    lead = g.leading_exponents()
    finite_tail = not is_unbounded(v.valid)
    if finite_tail:
        if any(e < 0 for e in lead.values()) or not any(e > 0 for e in lead.values()):
            raise TruncationUnderflow(
                f"substitution for {var} cannot be ordered away: leading "
                f"exponents {lead} against validity {fmt_rat(v.valid)}"
            )
    groups: dict[int, MultiSeries] = {}
    rest_vars = f.vars[:i] + f.vars[i + 1:]
    for k, c in f.terms.items():
        if k[i] % v.den:
            raise FractionalExponentUnsupported(
                f"{var}-exponent {Fraction(k[i], v.den)} is not an integer"
            )
        e = k[i] // v.den
        grp = groups.setdefault(e, MultiSeries.zero(rest_vars))
        grp.terms[k[:i] + k[i + 1:]] = c
    result = PrefSeries(MultiSeries.zero(rest_vars))
    power_cache: dict[int, PrefSeries] = {0: PrefSeries.coerce(1)}

    def g_power(e: int) -> PrefSeries:
        if e in power_cache:
            return power_cache[e]
        if e > 0:
            p = g_power(e - 1).mul(g)
        else:
            p = g_power(e + 1).mul(g.invert())
        power_cache[e] = p
        return p

    for e in sorted(groups):
        result = result.add(g_power(e).mul(PrefSeries(groups[e])))
    if finite_tail:
        for name, le in lead.items():
            if le > 0:
                result = result.cap_absolute_valid(name, v.valid * le)
    return result


def substitute_pref(f: PrefSeries, var: str, g: PrefSeries) -> PrefSeries:
    """Substitution through a prefactor: the prefactor exponent of ``var``
    must be an integer."""
    p = f.prefactor.get(var, _ZERO)
    if p.denominator != 1:
        raise FractionalExponentUnsupported(
            f"prefactor exponent {fmt_rat(p)} of {var} is fractional"
        )
    out = substitute(f.body, var, g)
    if p:
        out = out.mul(PrefSeries.coerce(g).pow_int(p.numerator))
    for n, e in f.prefactor.items():
        if n != var:
            out = out.shift(n, e)
    return out


# ---------------------------------------------------------------------------
# comparison helpers


def equal_on_joint_validity(a, b) -> tuple[bool, str | None]:
    """Compare two series on the intersection of their validity regions.

    Returns ``(True, None)`` or ``(False, description_of_first_mismatch)``.
    """
    a = PrefSeries.coerce(a)
    b = PrefSeries.coerce(b)
    names = set(a.prefactor) | set(b.prefactor)
    common = {n: min(a.prefactor.get(n, _ZERO), b.prefactor.get(n, _ZERO)) for n in names}
    ba = a._body_shifted({n: a.prefactor.get(n, _ZERO) - e for n, e in common.items()})
    bb = b._body_shifted({n: b.prefactor.get(n, _ZERO) - e for n, e in common.items()})
    merged = _merge_vars_add(ba, bb)
    ta = ba._aligned_to(merged)
    tb = bb._aligned_to(merged)
    kmaxes = [v.kmax() for v in merged]
    for key in sorted(set(ta) | set(tb)):
        if any(k > m for k, m in zip(key, kmaxes)):
            continue
        ca = ta.get(key, GR_ZERO)
        cb = tb.get(key, GR_ZERO)
        if ca != cb:
            mono = "*".join(
                f"{v.name}^{fmt_rat(Fraction(k, v.den) + common.get(v.name, _ZERO))}"
                for v, k in zip(merged, key)
            )
            return False, f"{mono or '1'}: {ca!r} != {cb!r}"
    return True, None


def assert_equal_on_joint_validity(a, b, context: str = "") -> None:
    ok, mismatch = equal_on_joint_validity(a, b)
    if not ok:
        raise AssertionError(f"{context or 'series mismatch'} at {mismatch}")


# ---------------------------------------------------------------------------
# canonical serialization


def _var_to_json(v: VarSpec) -> dict:
    return {
        "name": v.name,
        "den": v.den,
        "order": fmt_rat(v.order),
        "valid": fmt_rat(v.valid),
        "min": fmt_rat(v.min_exp),
    }


def _var_from_json(d: dict) -> VarSpec:
    return VarSpec(
        d["name"], int(d["den"]), parse_rat(d["min"]),
        parse_rat(d["order"]), parse_rat(d["valid"]),
    )


def to_json_dict(s) -> dict:
    """Canonical JSON form: terms sorted by exponent tuple, rationals as
    decimal strings."""
    s = PrefSeries.coerce(s)
    body = s.body
    terms = []
    for key in sorted(body.terms):
        c = body.terms[key]
        terms.append({
            "exp": [fmt_rat(Fraction(k, v.den)) for k, v in zip(key, body.vars)],
            "re": fmt_rat(c.re),
            "im": fmt_rat(c.im),
        })
    return {
        "vars": [_var_to_json(v) for v in body.vars],
        "prefactor": {n: fmt_rat(e) for n, e in sorted(s.prefactor.items())},
        "terms": terms,
    }


def from_json_dict(d: dict) -> PrefSeries:
    vars = tuple(_var_from_json(v) for v in d.get("vars", []))
    terms = {}
    for t in d.get("terms", []):
        exps = tuple(parse_rat(e) for e in t["exp"])
        terms[exps] = GaussRat(parse_rat(t["re"]), parse_rat(t.get("im", "0")))
    body = MultiSeries(vars, terms)
    pref = {n: parse_rat(e) for n, e in d.get("prefactor", {}).items()}
    return PrefSeries(body, pref)
