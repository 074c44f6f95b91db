"""The combinatorial hard-polynomial family built from low-degree univariates.

An instance places n * psi variables in an n-by-psi matrix (row-major: row i,
column j is global index i*psi + j).  For every univariate f over the
psi-element prime field with deg f <= D-1 there is one monomial
prod_i X[i, f(i)], giving exactly psi^D multilinear monomials of degree n
whose supports pairwise share at most D-1 rows: two distinct univariates of
degree < D agree on fewer than D points.

Parameter derivation follows the fixed schedule: delta = (1-mu)/2, gamma =
(2(mu+delta)+1)/(1-mu-delta), psi the smallest prime strictly above
n^(1+gamma) and at most twice it, N = n*psi, rho = (mu+delta)*ln N / ln n,
and D the ceiling of (gamma+rho)/(2(1+gamma)) * n, clamped to at least 1.
A generalized free (n, psi, D) mode is first-class so the family can be
exercised at desk scale, where the derived windows are astronomically large.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

from .algebra import (
    FieldElem,
    Mon,
    SparsePolynomial,
    bertrand_prime,
    coerce,
    int_floor_root,
    is_prime,
    mon_degree,
    mon_is_multilinear,
    mon_support,
)

DEFAULT_ENUM_CAP = 10 ** 6


def _to_fraction(x) -> Fraction:
    """Floats are read through their shortest decimal repr, so 0.1 means 1/10."""
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True)
class NWParams:
    mu: Fraction
    n: int
    delta: Fraction
    gamma: Fraction
    psi: int
    N: int
    rho: float
    D_raw: float
    D: int


def derive_nw_params(mu, n: int) -> NWParams:
    """Derive the full parameter set for hardness exponent mu and degree n.

    Deterministic and exact: the prime window (n^(1+gamma), 2*n^(1+gamma)]
    is resolved with integer root arithmetic, never floats, so the smallest
    prime is reproducible.  Real-valued D is rounded up and clamped to >= 1.
    """
    mu = _to_fraction(mu)
    if not 0 <= mu < 1:
        raise ValueError(f"mu={mu} outside [0, 1)")
    if n < 2:
        raise ValueError(f"n={n} must be at least 2")
    delta = (1 - mu) / 2
    gamma = (2 * (mu + delta) + 1) / (1 - mu - delta)
    expo = 1 + gamma
    pn, pd = expo.numerator, expo.denominator
    # strictly above n^expo: integers m > x iff m^pd > n^pn
    lo = int_floor_root(n ** pn, pd)
    hi = int_floor_root(2 ** pd * n ** pn, pd)
    psi = bertrand_prime(lo, hi)
    N = n * psi
    rho = float(mu + delta) * math.log(N) / math.log(n)
    D_raw = (float(gamma) + rho) / (2 * (1 + float(gamma))) * n
    D = max(1, math.ceil(D_raw))
    if D > psi:
        raise ValueError(f"degree bound D={D} exceeds field size psi={psi}")
    return NWParams(mu=mu, n=n, delta=delta, gamma=gamma, psi=psi, N=N,
                    rho=rho, D_raw=D_raw, D=D)


@dataclass(frozen=True)
class NWInstance:
    """An evaluable family instance: n rows, psi columns, univariate degree
    bound D (coefficient vectors live in the psi-element field).  Row i is
    read off at field point i, so rows beyond psi would repeat points; the
    constructor requires n <= psi."""

    n: int
    psi: int
    D: int
    params: Optional[NWParams] = None

    def __post_init__(self):
        if not is_prime(self.psi):
            raise ValueError(f"psi={self.psi} is not prime")
        if not 1 <= self.D <= self.psi:
            raise ValueError(f"D={self.D} outside [1, psi={self.psi}]")
        if not 1 <= self.n <= self.psi:
            raise ValueError(f"n={self.n} outside [1, psi={self.psi}]")

    @classmethod
    def from_params(cls, p: NWParams) -> "NWInstance":
        return cls(n=p.n, psi=p.psi, D=p.D, params=p)

    @property
    def num_vars(self) -> int:
        return self.n * self.psi

    @property
    def monomial_count(self) -> int:
        return self.psi ** self.D

    def var_index(self, row: int, col: int) -> int:
        return row * self.psi + col

    def _column(self, coeffs: Tuple[int, ...], row: int) -> int:
        """f(row) for the univariate with the given coefficient vector
        (constant first)."""
        x = row % self.psi
        acc = 0
        for t, c in enumerate(coeffs):
            acc = (acc + c * pow(x, t, self.psi)) % self.psi
        return acc


def nw_monomials(inst: NWInstance, cap: Optional[int] = None) -> Iterator[Mon]:
    """One multilinear degree-n monomial per univariate, enumerated in
    lexicographic order of the coefficient vector (constant coefficient
    first)."""
    limit = DEFAULT_ENUM_CAP if cap is None else cap
    if inst.monomial_count > limit:
        raise ValueError(
            f"enumeration cap exceeded: psi^D = {inst.monomial_count} > {limit}")
    for coeffs in itertools.product(range(inst.psi), repeat=inst.D):
        yield tuple(
            (inst.var_index(i, inst._column(coeffs, i)), 1) for i in range(inst.n))


def nw_expand(inst: NWInstance, cap: Optional[int] = None) -> SparsePolynomial:
    """The instance as an explicit polynomial (desk-scale oracle)."""
    terms = {mon: Fraction(1) for mon in nw_monomials(inst, cap)}
    return SparsePolynomial(inst.num_vars, terms, None)


def nw_eval(inst: NWInstance, point: Sequence, cap: Optional[int] = None) -> FieldElem:
    """Evaluate by enumerating the psi^D univariates directly (no monomial
    search): sum over f of prod_i point[i, f(i)]."""
    if len(point) != inst.num_vars:
        raise ValueError(
            f"dimension mismatch: point has {len(point)} values, instance has "
            f"{inst.num_vars} variables")
    limit = DEFAULT_ENUM_CAP if cap is None else cap
    if inst.monomial_count > limit:
        raise ValueError(
            f"enumeration cap exceeded: psi^D = {inst.monomial_count} > {limit}")
    vals = [coerce(v, None) for v in point]
    total = Fraction(0)
    for coeffs in itertools.product(range(inst.psi), repeat=inst.D):
        prod = Fraction(1)
        for i in range(inst.n):
            prod *= vals[inst.var_index(i, inst._column(coeffs, i))]
            if not prod:
                break
        total += prod
    return total


@dataclass(frozen=True)
class NWReport:
    monomial_count: int
    expected_count: int
    count_ok: bool
    multilinear_ok: bool
    degree_ok: bool
    max_intersection: int
    intersection_bound: int
    intersection_ok: bool

    @property
    def ok(self) -> bool:
        return (self.count_ok and self.multilinear_ok and self.degree_ok
                and self.intersection_ok)


def nw_check_properties(inst: NWInstance, cap: Optional[int] = None) -> NWReport:
    """Exhaustively verify the monomial count, multilinearity, the degree,
    and the pairwise support-intersection bound D-1."""
    mons = list(nw_monomials(inst, cap))
    supports = [frozenset(mon_support(m)) for m in mons]
    count_ok = len(mons) == inst.monomial_count and len(set(mons)) == len(mons)
    multilinear_ok = all(mon_is_multilinear(m) for m in mons)
    degree_ok = all(mon_degree(m) == inst.n for m in mons)
    worst = 0
    for i in range(len(supports)):
        for j in range(i + 1, len(supports)):
            inter = len(supports[i] & supports[j])
            if inter > worst:
                worst = inter
    return NWReport(
        monomial_count=len(mons),
        expected_count=inst.monomial_count,
        count_ok=count_ok,
        multilinear_ok=multilinear_ok,
        degree_ok=degree_ok,
        max_intersection=worst,
        intersection_bound=inst.D - 1,
        intersection_ok=worst <= inst.D - 1,
    )


@dataclass(frozen=True)
class NWOnSet:
    """The family instantiated on an explicit variable set: the sorted set of
    size rows*q is arranged row-major into a rows-by-q matrix, and the local
    instance evaluates points given in set order."""

    set_vars: Tuple[int, ...]
    rows: int
    q: int
    D: int

    def __post_init__(self):
        if len(self.set_vars) != self.rows * self.q:
            raise ValueError(
                f"set size {len(self.set_vars)} != rows*q = {self.rows * self.q}")
        NWInstance(n=self.rows, psi=self.q, D=self.D)

    @property
    def inst(self) -> NWInstance:
        return NWInstance(n=self.rows, psi=self.q, D=self.D)

    def eval_local(self, point: Sequence) -> FieldElem:
        """Evaluate at a point indexed like the set (length rows*q)."""
        return nw_eval(self.inst, point)

    def eval_global(self, point: Sequence) -> FieldElem:
        """Evaluate at a point over the ambient universe, picking out the
        set's coordinates."""
        return nw_eval(self.inst, [point[v] for v in self.set_vars])


def nw_on_set(S: Sequence[int], rows: int, q: int, D: int) -> NWOnSet:
    """Instantiate on the variable set S with a rows-by-q layout.  Requires
    |S| = rows * q with q prime and 1 <= D <= q."""
    return NWOnSet(set_vars=tuple(S), rows=rows, q=q, D=D)
