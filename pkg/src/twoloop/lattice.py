"""Integral lattices: ingestion, exact vector enumeration, theta series.

Enumeration uses an exact rational LDL^T decomposition of the Gram matrix,
so no boundary vector is ever missed to floating-point error.  Genus-two
theta series are assembled from inner-product histograms of shell pairs
rather than raw vector pairs, which keeps memory flat; the histogram matrix
products run on numpy int64 arrays (exact for these sizes).
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .elliptic import delta_cusp, j_function
from .errors import DomainError, NotPositiveDefinite, OddLattice
from .series import (
    UNBOUNDED,
    GaussRat,
    MultiSeries,
    VarSpec,
)

F = Fraction


def thread_cap() -> int:
    """Worker cap from TWO_LOOP_THREADS (defaults to 1: fully serial)."""
    try:
        n = int(os.environ.get("TWO_LOOP_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, n)


@dataclass(frozen=True)
class Lattice:
    """A positive definite integral lattice given by its Gram matrix."""

    name: str
    rank: int
    gram: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        g = self.gram
        if len(g) != self.rank or any(len(row) != self.rank for row in g):
            raise DomainError(f"Gram matrix of {self.name} is not {self.rank}x{self.rank}")
        for i in range(self.rank):
            for j in range(self.rank):
                if g[i][j] != g[j][i]:
                    raise DomainError(f"Gram matrix of {self.name} is not symmetric")

    @property
    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def determinant(self) -> int:
        return _int_det(self.gram)

    @property
    def is_unimodular(self) -> bool:
        return abs(self.determinant()) == 1

    def is_positive_definite(self) -> bool:
        """Positive leading principal minors."""
        for k in range(1, self.rank + 1):
            minor = [row[:k] for row in self.gram[:k]]
            if _int_det(minor) <= 0:
                return False
        return True

    def direct_sum(self, other: "Lattice", name: str | None = None) -> "Lattice":
        n, m = self.rank, other.rank
        gram = []
        for i in range(n):
            gram.append(tuple(self.gram[i]) + (0,) * m)
        for i in range(m):
            gram.append((0,) * n + tuple(other.gram[i]))
        return Lattice(name or f"{self.name}+{other.name}", n + m, tuple(gram))

    def to_json_dict(self) -> dict:
        return {"name": self.name, "rank": self.rank,
                "gram": [list(row) for row in self.gram]}

    @staticmethod
    def from_json_dict(d: dict) -> "Lattice":
        gram = tuple(tuple(int(x) for x in row) for row in d["gram"])
        return Lattice(str(d.get("name", "lattice")), int(d["rank"]), gram)

    @staticmethod
    def from_file(path: str) -> "Lattice":
        with open(path) as fh:
            return Lattice.from_json_dict(json.load(fh))


def _int_det(rows) -> int:
    """Exact integer determinant (fraction-free Bareiss elimination)."""
    a = [list(map(int, row)) for row in rows]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class ShellTable:
    """Vectors of a lattice grouped by norm, up to ``max_norm`` inclusive."""

    lattice: Lattice
    max_norm: int
    shells: dict[int, tuple[tuple[int, ...], ...]]

    def count(self, norm: int) -> int:
        if norm > self.max_norm:
            raise DomainError(f"shells only enumerated to norm {self.max_norm}")
        return len(self.shells.get(norm, ()))


def _ldl(gram) -> tuple[list[list[Fraction]], list[Fraction]]:
    """G = L D L^T with unit lower-triangular L, exact rationals."""
    n = len(gram)
    L = [[F(0)] * n for _ in range(n)]
    D = [F(0)] * n
    for j in range(n):
        D[j] = F(gram[j][j]) - sum(L[j][k] * L[j][k] * D[k] for k in range(j))
        if D[j] <= 0:
            raise NotPositiveDefinite("Gram matrix is not positive definite")
        L[j][j] = F(1)
        for i in range(j + 1, n):
            L[i][j] = (F(gram[i][j]) - sum(L[i][k] * L[j][k] * D[k] for k in range(j))) / D[j]
    return L, D


@lru_cache(maxsize=None)
def enumerate_shells(lattice: Lattice, max_norm: int) -> ShellTable:
    """All vectors with <x,x> <= max_norm, by depth-first search with exact
    rational bounds from the LDL^T decomposition."""
    if not lattice.is_positive_definite():
        raise NotPositiveDefinite(f"{lattice.name} is not positive definite")
    n = lattice.rank
    L, D = _ldl(lattice.gram)
    shells: dict[int, list[tuple[int, ...]]] = {}
    x = [0] * n

    def descend(i: int, budget: Fraction):
        # quadratic form restricted to coordinates 0..i given x[i+1..]
        if i < 0:
            vec = tuple(x)
            norm = int(budget_root - budget)
            shells.setdefault(norm, []).append(vec)
            return
        c = sum(L[j][i] * x[j] for j in range(i + 1, n))
        # d_i (x_i + c)^2 <= budget
        limit = budget / D[i]
        s = math.isqrt(int(limit)) + 2
        lo = math.ceil(-c - s)
        hi = math.floor(-c + s)
        for xi in range(lo, hi + 1):
            y = xi + c
            used = D[i] * y * y
            if used <= budget:
                x[i] = xi
                descend(i - 1, budget - used)
        x[i] = 0

    budget_root = F(max_norm)
    descend(n - 1, budget_root)
    return ShellTable(lattice, max_norm,
                      {k: tuple(sorted(v)) for k, v in sorted(shells.items())})


def theta_g1(lattice: Lattice, q_order: int, var: str = "q") -> MultiSeries:
    """Genus-one lattice theta series sum_alpha q^(<a,a>/2)."""
    if not lattice.is_even:
        raise OddLattice(f"{lattice.name} is not even")
    table = enumerate_shells(lattice, 2 * (q_order - 1))
    spec = VarSpec(var, 1, F(0), F(q_order), F(q_order))
    terms = {}
    for norm, vecs in table.shells.items():
        if norm % 2 == 0 and norm // 2 < q_order:
            terms[(F(norm, 2),)] = GaussRat(len(vecs))
    return MultiSeries((spec,), terms)


def _pair_histogram(gram_np, va, vb):
    m = va @ gram_np @ vb.T
    vals, counts = np.unique(m, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def theta_g2(lattice: Lattice, q_order: int, s_order: int,
             qvar: str = "q", rvar: str = "r", svar: str = "s") -> MultiSeries:
    """Genus-two lattice theta series.

    Coefficient of q^a s^c r^b counts pairs (alpha, beta) with norms 2a, 2c
    and inner product b.  Laurent in r; the support automatically satisfies
    b^2 <= 4ac.
    """
    if not lattice.is_even:
        raise OddLattice(f"{lattice.name} is not even")
    table = enumerate_shells(lattice, 2 * (max(q_order, s_order) - 1))
    gram_np = np.array(lattice.gram, dtype=np.int64)
    arr = {norm: np.array(vecs, dtype=np.int64).reshape(len(vecs), lattice.rank)
           for norm, vecs in table.shells.items()}
    norms_q = [nm for nm in arr if nm % 2 == 0 and nm // 2 < q_order]
    norms_s = [nm for nm in arr if nm % 2 == 0 and nm // 2 < s_order]
    pairs = [(na, nc) for na in norms_q for nc in norms_s]
    workers = thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hists = list(pool.map(
                lambda p: _pair_histogram(gram_np, arr[p[0]], arr[p[1]]), pairs))
    else:
        hists = [_pair_histogram(gram_np, arr[na], arr[nc]) for na, nc in pairs]
    terms = {}
    bmin = F(0)
    for (na, nc), hist in zip(pairs, hists):
        a, c = F(na, 2), F(nc, 2)
        for b, count in sorted(hist.items()):
            terms[(a, F(b), c)] = GaussRat(count)
            bmin = min(bmin, F(b))
    qs = VarSpec(qvar, 1, F(0), F(q_order), F(q_order))
    rs = VarSpec(rvar, 1, bmin, UNBOUNDED, UNBOUNDED)
    ss = VarSpec(svar, 1, F(0), F(s_order), F(s_order))
    return MultiSeries((qs, rs, ss), terms)


def leech_theta(q_order: int, var: str = "q") -> MultiSeries:
    """Theta series of the Leech lattice as Delta * (J + 24).

    The 24-dimensional lattice is never enumerated; its theta series is
    pinned down by the weight-12 relation theta/Delta = J + 24.
    """
    t = delta_cusp(q_order, var).mul(j_function(q_order, var).add(24))
    assert not t.prefactor, "prefactors must cancel in Delta*(J+24)"
    return t.body


# -- built-in Gram matrices -------------------------------------------------

_E8_GRAM = (
    (2, 0, -1, 0, 0, 0, 0, 0),
    (0, 2, 0, -1, 0, 0, 0, 0),
    (-1, 0, 2, -1, 0, 0, 0, 0),
    (0, -1, -1, 2, -1, 0, 0, 0),
    (0, 0, 0, -1, 2, -1, 0, 0),
    (0, 0, 0, 0, -1, 2, -1, 0),
    (0, 0, 0, 0, 0, -1, 2, -1),
    (0, 0, 0, 0, 0, 0, -1, 2),
)


@lru_cache(maxsize=None)
def builtin_lattice(name: str) -> Lattice:
    """E8 and E8^3, validated (even, unimodular, correct root count) before
    first use."""
    key = name.upper().replace("^", "X")
    if key == "E8":
        lat = Lattice("E8", 8, _E8_GRAM)
        _validate_even_unimodular(lat, expected_roots=240)
        return lat
    if key in ("E8X3", "E83", "3E8"):
        e8 = builtin_lattice("E8")
        lat = e8.direct_sum(e8).direct_sum(e8, name="E8x3")
        _validate_even_unimodular(lat, expected_roots=720)
        return lat
    raise DomainError(f"unknown built-in lattice {name!r} (have: E8, E8x3)")


def _validate_even_unimodular(lat: Lattice, expected_roots: int) -> None:
    if not lat.is_even:
        raise DomainError(f"built-in {lat.name} failed the evenness check")
    if not lat.is_unimodular:
        raise DomainError(f"built-in {lat.name} failed the unimodularity check")
    roots = enumerate_shells(lat, 2).count(2)
    if roots != expected_roots:
        raise DomainError(
            f"built-in {lat.name} has {roots} roots, expected {expected_roots}"
        )
