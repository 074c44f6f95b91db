"""Exact field arithmetic and sparse multivariate polynomials.

Coefficients are either exact rationals (``fractions.Fraction``) or residues
modulo a prime (``GFElem``).  A polynomial carries a field tag and never mixes
the two; every binary operation checks compatibility and raises on a mismatch.

A monomial is a sorted tuple of ``(variable_index, exponent)`` pairs with all
exponents positive; the empty tuple is the constant monomial.  A polynomial is
a dict from monomials to nonzero coefficients, so the zero polynomial has an
empty term map and equality is plain term-map equality.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

# ---------------------------------------------------------------------------
# monomials

# Sorted ((var, exp), ...) with exp >= 1 throughout; () is the constant.
Mon = Tuple[Tuple[int, int], ...]

MON_ONE: Mon = ()


def mon_make(pairs: Iterable[Tuple[int, int]]) -> Mon:
    """Build a monomial from (variable, exponent) pairs, merging duplicates."""
    acc: Dict[int, int] = {}
    for v, e in pairs:
        if v < 0:
            raise ValueError(f"negative variable index {v}")
        if e < 0:
            raise ValueError(f"negative exponent {e} for variable {v}")
        if e:
            acc[v] = acc.get(v, 0) + e
    return tuple(sorted(acc.items()))


def mon_mul(a: Mon, b: Mon) -> Mon:
    if not a:
        return b
    if not b:
        return a
    acc = dict(a)
    for v, e in b:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted(acc.items()))


def mon_degree(a: Mon) -> int:
    return sum(e for _, e in a)


def mon_support(a: Mon) -> Tuple[int, ...]:
    return tuple(v for v, _ in a)


def mon_is_multilinear(a: Mon) -> bool:
    return all(e == 1 for _, e in a)


def mon_sort_key(a: Mon, num_vars: int) -> Tuple[int, Tuple[int, ...]]:
    """Graded lexicographic key: compare by total degree, then exponent vector."""
    dense = [0] * num_vars
    for v, e in a:
        dense[v] = e
    return (mon_degree(a), tuple(dense))


# ---------------------------------------------------------------------------
# field elements

@dataclass(frozen=True)
class GFElem:
    """A residue modulo a prime, with the modulus carried along.

    Arithmetic between residues with different moduli, or between a residue
    and a rational, is rejected: values from different fields never mix
    silently.
    """

    val: int
    p: int

    def __post_init__(self):
        # primality of the modulus is enforced once per polynomial, not here
        if self.p < 2:
            raise ValueError(f"modulus {self.p} must be at least 2")
        object.__setattr__(self, "val", self.val % self.p)

    def _check(self, other: "GFElem") -> None:
        if not isinstance(other, GFElem):
            raise TypeError(f"cannot mix GF({self.p}) with {type(other).__name__}")
        if other.p != self.p:
            raise ValueError(f"cannot mix GF({self.p}) with GF({other.p})")

    def __add__(self, other):
        self._check(other)
        return GFElem(self.val + other.val, self.p)

    def __sub__(self, other):
        self._check(other)
        return GFElem(self.val - other.val, self.p)

    def __mul__(self, other):
        self._check(other)
        return GFElem(self.val * other.val, self.p)

    def __truediv__(self, other):
        self._check(other)
        if other.val == 0:
            raise ZeroDivisionError(f"division by zero in GF({self.p})")
        return GFElem(self.val * pow(other.val, self.p - 2, self.p), self.p)

    def __neg__(self):
        return GFElem(-self.val, self.p)

    def __pow__(self, e: int):
        return GFElem(pow(self.val, e, self.p), self.p)

    def __bool__(self):
        return self.val != 0

    def __repr__(self):
        return f"{self.val} (mod {self.p})"


FieldElem = Union[Fraction, GFElem]

Field = Optional[int]           # None marks the rationals, an int p marks GF(p)


def field_name(p: Field) -> str:
    return "Q" if p is None else f"GF({p})"


def coerce(value, p: Field = None) -> FieldElem:
    """Lift an int, Fraction, or GFElem into the requested field."""
    if p is None:
        if isinstance(value, GFElem):
            raise ValueError(f"cannot coerce GF({value.p}) element into Q")
        return Fraction(value)
    if isinstance(value, GFElem):
        if value.p != p:
            raise ValueError(f"cannot coerce GF({value.p}) element into GF({p})")
        return value
    if isinstance(value, Fraction):
        if value.denominator % p == 0:
            raise ZeroDivisionError(f"denominator divisible by {p}")
        num = value.numerator % p
        den = pow(value.denominator % p, p - 2, p)
        return GFElem(num * den, p)
    return GFElem(int(value), p)


def field_zero(p: Field = None) -> FieldElem:
    return Fraction(0) if p is None else GFElem(0, p)


def field_one(p: Field = None) -> FieldElem:
    return Fraction(1) if p is None else GFElem(1, p)


# ---------------------------------------------------------------------------
# sparse polynomials

@dataclass
class SparsePolynomial:
    """A multivariate polynomial as a map monomial -> nonzero coefficient.

    Values are treated as immutable after construction; all operations return
    new polynomials.  ``field`` is None for rationals or a prime modulus.
    """

    num_vars: int
    terms: Dict[Mon, FieldElem] = field(default_factory=dict)
    field_p: Field = None

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be nonnegative")
        if self.field_p is not None and not is_prime(self.field_p):
            raise ValueError(f"modulus {self.field_p} is not prime")
        clean: Dict[Mon, FieldElem] = {}
        for mon, c in self.terms.items():
            for v, e in mon:
                if v >= self.num_vars:
                    raise ValueError(
                        f"variable {v} out of range for num_vars={self.num_vars}")
                if e <= 0:
                    raise ValueError(f"nonpositive exponent on variable {v}")
            cc = coerce(c, self.field_p)
            if cc:
                clean[mon] = cc
        self.terms = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, num_vars: int, field_p: Field = None) -> "SparsePolynomial":
        return cls(num_vars, {}, field_p)

    @classmethod
    def const(cls, num_vars: int, value, field_p: Field = None) -> "SparsePolynomial":
        return cls(num_vars, {MON_ONE: value}, field_p)

    @classmethod
    def var(cls, num_vars: int, idx: int, field_p: Field = None) -> "SparsePolynomial":
        if not 0 <= idx < num_vars:
            raise ValueError(f"variable index {idx} out of range")
        return cls(num_vars, {((idx, 1),): 1}, field_p)

    @classmethod
    def from_terms(cls, num_vars: int, items, field_p: Field = None) -> "SparsePolynomial":
        """Build from (coefficient, pairs-of-(var, exp)) items, merging terms."""
        acc: Dict[Mon, FieldElem] = {}
        for c, pairs in items:
            mon = mon_make(pairs)
            cc = coerce(c, field_p)
            if mon in acc:
                acc[mon] = acc[mon] + cc
            else:
                acc[mon] = cc
        return cls(num_vars, acc, field_p)

    # -- inspection ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; the zero polynomial reports 0."""
        if not self.terms:
            return 0
        return max(mon_degree(m) for m in self.terms)

    def individual_degree(self, var: Optional[int] = None) -> int:
        """Largest exponent of ``var``, or over all variables when var is None."""
        best = 0
        for mon in self.terms:
            for v, e in mon:
                if (var is None or v == var) and e > best:
                    best = e
        return best

    def used_vars(self) -> Tuple[int, ...]:
        seen = set()
        for mon in self.terms:
            for v, _ in mon:
                seen.add(v)
        return tuple(sorted(seen))

    def is_multilinear(self) -> bool:
        return all(mon_is_multilinear(m) for m in self.terms)

    def is_homogeneous(self, deg: Optional[int] = None) -> bool:
        degs = {mon_degree(m) for m in self.terms}
        if not degs:
            return True
        if len(degs) > 1:
            return False
        return deg is None or degs == {deg}

    def constant_term(self) -> FieldElem:
        return self.terms.get(MON_ONE, field_zero(self.field_p))

    def _check_compatible(self, other: "SparsePolynomial") -> None:
        if not isinstance(other, SparsePolynomial):
            raise TypeError(f"expected a polynomial, got {type(other).__name__}")
        if other.num_vars != self.num_vars:
            raise ValueError(
                f"dimension mismatch: {self.num_vars} vs {other.num_vars} variables")
        if other.field_p != self.field_p:
            raise ValueError(
                f"field mismatch: {field_name(self.field_p)} vs {field_name(other.field_p)}")

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        self._check_compatible(other)
        out = dict(self.terms)
        for mon, c in other.terms.items():
            if mon in out:
                s = out[mon] + c
                if s:
                    out[mon] = s
                else:
                    del out[mon]
            else:
                out[mon] = c
        return SparsePolynomial(self.num_vars, out, self.field_p)

    def __neg__(self) -> "SparsePolynomial":
        return SparsePolynomial(
            self.num_vars, {m: -c for m, c in self.terms.items()}, self.field_p)

    def __sub__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        return self + (-other)

    def __mul__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        self._check_compatible(other)
        out: Dict[Mon, FieldElem] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                mon = mon_mul(ma, mb)
                prod = ca * cb
                if mon in out:
                    s = out[mon] + prod
                    if s:
                        out[mon] = s
                    else:
                        del out[mon]
                else:
                    if prod:
                        out[mon] = prod
        return SparsePolynomial(self.num_vars, out, self.field_p)

    def scale(self, c) -> "SparsePolynomial":
        cc = coerce(c, self.field_p)
        if not cc:
            return SparsePolynomial.zero(self.num_vars, self.field_p)
        return SparsePolynomial(
            self.num_vars, {m: v * cc for m, v in self.terms.items()}, self.field_p)

    def eval_at(self, point: Sequence) -> FieldElem:
        """Evaluate at a point with one value per variable."""
        if len(point) != self.num_vars:
            raise ValueError(
                f"dimension mismatch: point has {len(point)} values, "
                f"polynomial has {self.num_vars} variables")
        vals = [coerce(v, self.field_p) for v in point]
        total = field_zero(self.field_p)
        for mon, c in self.terms.items():
            term = c
            for v, e in mon:
                term = term * vals[v] ** e
            total = total + term
        return total

    def sorted_terms(self) -> List[Tuple[Mon, FieldElem]]:
        """Terms in descending graded-lexicographic order (canonical)."""
        return sorted(self.terms.items(),
                      key=lambda kv: mon_sort_key(kv[0], self.num_vars),
                      reverse=True)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for mon, c in self.sorted_terms():
            body = "*".join(f"x{v}" + (f"^{e}" if e > 1 else "") for v, e in mon)
            parts.append(f"{c}" + (f"*{body}" if body else ""))
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# polynomial operations

def hom_component(P: SparsePolynomial, i: int, mode: str = "eq") -> SparsePolynomial:
    """The homogeneous part of degree i ("eq"), or of degree <= i / >= i.

    For every P and i the low and high parts add back to P:
    hom_component(P, i, "le") + hom_component(P, i + 1, "ge") == P.
    """
    if i < 0:
        raise ValueError("degree must be nonnegative")
    if mode == "eq":
        keep = lambda d: d == i
    elif mode == "le":
        keep = lambda d: d <= i
    elif mode == "ge":
        keep = lambda d: d >= i
    else:
        raise ValueError(f"unknown mode {mode!r}")
    out = {m: c for m, c in P.terms.items() if keep(mon_degree(m))}
    return SparsePolynomial(P.num_vars, out, P.field_p)


def esym_all(inputs: Sequence[SparsePolynomial], lmax: int) -> List[SparsePolynomial]:
    """Elementary symmetric polynomials of the inputs, degrees 0..lmax.

    Computed by the prefix-by-degree dynamic program (coefficient extraction
    of the product of (1 + Y_i t) in t), not by enumerating subsets.
    """
    if lmax < 0:
        raise ValueError("degree must be nonnegative")
    if inputs:
        nv, fp = inputs[0].num_vars, inputs[0].field_p
        for q in inputs[1:]:
            inputs[0]._check_compatible(q)
    else:
        nv, fp = 0, None
    E = [SparsePolynomial.const(nv, 1, fp)] + [
        SparsePolynomial.zero(nv, fp) for _ in range(lmax)]
    for Y in inputs:
        for deg in range(min(len(E) - 1, lmax), 0, -1):
            E[deg] = E[deg] + Y * E[deg - 1]
    return E


def esym(inputs: Sequence[SparsePolynomial], l: int,
         num_vars: Optional[int] = None, field_p: Field = None) -> SparsePolynomial:
    """Sum over all size-l subsets of the product of the chosen inputs."""
    if not inputs:
        nv = 0 if num_vars is None else num_vars
        if l == 0:
            return SparsePolynomial.const(nv, 1, field_p)
        return SparsePolynomial.zero(nv, field_p)
    if l > len(inputs):
        return SparsePolynomial.zero(inputs[0].num_vars, inputs[0].field_p)
    return esym_all(inputs, l)[l]


def translate_poly(P: SparsePolynomial, a: Sequence) -> SparsePolynomial:
    """Return P(X + a).  Degree is preserved; translating back by -a undoes it."""
    if len(a) != P.num_vars:
        raise ValueError(
            f"dimension mismatch: shift has {len(a)} values, "
            f"polynomial has {P.num_vars} variables")
    shift = [coerce(v, P.field_p) for v in a]
    out = SparsePolynomial.zero(P.num_vars, P.field_p)
    one = field_one(P.field_p)
    for mon, c in P.terms.items():
        # expand prod_v (x_v + a_v)^e by the binomial theorem, variable by variable
        term = SparsePolynomial.const(P.num_vars, c, P.field_p)
        for v, e in mon:
            if not shift[v]:
                term = term * SparsePolynomial(
                    P.num_vars, {((v, e),): one}, P.field_p)
                continue
            binom: Dict[Mon, FieldElem] = {}
            for j in range(e + 1):
                coeff = coerce(math.comb(e, j), P.field_p) * shift[v] ** (e - j)
                if coeff:
                    binom[((v, j),) if j else MON_ONE] = coeff
            term = term * SparsePolynomial(P.num_vars, binom, P.field_p)
        out = out + term
    return out


def derivative_poly(P: SparsePolynomial, var: int, order: int = 1) -> SparsePolynomial:
    """Formal order-th partial derivative with respect to one variable."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    if P.field_p is not None and order >= P.field_p:
        raise ValueError(
            f"derivative order {order} not supported over GF({P.field_p})")
    if order == 0:
        return P
    out: Dict[Mon, FieldElem] = {}
    for mon, c in P.terms.items():
        e = dict(mon).get(var, 0)
        if e < order:
            continue
        # falling factorial e * (e-1) * ... * (e-order+1)
        fall = 1
        for t in range(order):
            fall *= e - t
        new = tuple((v, x) for v, x in mon if v != var)
        if e > order:
            new = tuple(sorted(new + ((var, e - order),)))
        coeff = c * coerce(fall, P.field_p)
        if new in out:
            s = out[new] + coeff
            if s:
                out[new] = s
            else:
                del out[new]
        elif coeff:
            out[new] = coeff
    return SparsePolynomial(P.num_vars, out, P.field_p)


def deriv_order_at_root(R: SparsePolynomial, a) -> int:
    """Given a univariate R with R(a) = 0, the number of extra derivatives
    that still vanish at a: the smallest j with the (j+1)-st derivative
    nonzero there.  A simple root reports j = 0.
    """
    if R.is_zero():
        raise ValueError("the zero polynomial has no well-defined root order")
    used = R.used_vars()
    if len(used) > 1:
        raise ValueError("deriv_order_at_root expects a univariate polynomial")
    var = used[0] if used else 0
    point = [field_zero(R.field_p)] * R.num_vars
    point[var] = coerce(a, R.field_p)
    if R.eval_at(point):
        raise ValueError(f"{a} is not a root")
    d = R
    for j in range(R.degree()):
        d = derivative_poly(d, var, 1)
        if d.eval_at(point):
            return j
    raise AssertionError("unreachable: a nonzero univariate has finite root order")


def multilinear_project(P: SparsePolynomial) -> SparsePolynomial:
    """Drop every monomial containing an exponent >= 2.  Linear, idempotent."""
    out = {m: c for m, c in P.terms.items() if mon_is_multilinear(m)}
    return SparsePolynomial(P.num_vars, out, P.field_p)


def substitute(P: SparsePolynomial, var: int, value) -> SparsePolynomial:
    """Substitute a scalar for one variable; num_vars is unchanged."""
    val = coerce(value, P.field_p)
    out: Dict[Mon, FieldElem] = {}
    for mon, c in P.terms.items():
        e = dict(mon).get(var, 0)
        if e:
            c = c * val ** e
            mon = tuple((v, x) for v, x in mon if v != var)
        if not c:
            continue
        if mon in out:
            s = out[mon] + c
            if s:
                out[mon] = s
            else:
                del out[mon]
        else:
            out[mon] = c
    return SparsePolynomial(P.num_vars, out, P.field_p)


def scale_all_vars(P: SparsePolynomial, t) -> SparsePolynomial:
    """Substitute x_v -> t * x_v for every variable: each degree-d monomial
    picks up a factor t^d."""
    tv = coerce(t, P.field_p)
    out: Dict[Mon, FieldElem] = {}
    for mon, c in P.terms.items():
        coeff = c * tv ** mon_degree(mon)
        if coeff:
            out[mon] = coeff
    return SparsePolynomial(P.num_vars, out, P.field_p)


def relabel_vars(P: SparsePolynomial, new_num_vars: int,
                 mapping: Dict[int, int]) -> SparsePolynomial:
    """Rename variables through an injective index map (used for embedding a
    local polynomial into a global variable space and back)."""
    out: Dict[Mon, FieldElem] = {}
    for mon, c in P.terms.items():
        new = tuple(sorted((mapping[v], e) for v, e in mon))
        out[new] = c
    return SparsePolynomial(new_num_vars, out, P.field_p)


def coeffs_in_var(P: SparsePolynomial, var: int) -> List[SparsePolynomial]:
    """Coefficient polynomials of powers of one variable, viewing P as a
    univariate in ``var`` over the remaining variables.  Entry i is the
    coefficient of var^i; the list has length deg_var(P) + 1."""
    k = P.individual_degree(var)
    outs: List[Dict[Mon, FieldElem]] = [{} for _ in range(k + 1)]
    for mon, c in P.terms.items():
        e = dict(mon).get(var, 0)
        rest = tuple((v, x) for v, x in mon if v != var)
        outs[e][rest] = c
    return [SparsePolynomial(P.num_vars, o, P.field_p) for o in outs]


def truncate_degree(P: SparsePolynomial, t: int) -> SparsePolynomial:
    return hom_component(P, t, "le")


def subst_var_poly(P: SparsePolynomial, var: int, Q: SparsePolynomial,
                   max_degree: Optional[int] = None) -> SparsePolynomial:
    """Substitute the polynomial Q for one variable of P, optionally truncating
    every intermediate product to total degree <= max_degree (Horner scheme)."""
    P._check_compatible(Q)
    layers = coeffs_in_var(P, var)
    acc = layers[-1]
    for i in range(len(layers) - 2, -1, -1):
        acc = acc * Q + layers[i]
        if max_degree is not None:
            acc = truncate_degree(acc, max_degree)
    if max_degree is not None:
        acc = truncate_degree(acc, max_degree)
    return acc


def series_inverse(U: SparsePolynomial, t: int) -> SparsePolynomial:
    """Multiplicative inverse of U as a power series, truncated to total
    degree t.  Requires a nonzero constant term."""
    c0 = U.constant_term()
    if not c0:
        raise ValueError("series inverse needs a nonzero constant term")
    one = SparsePolynomial.const(U.num_vars, 1, U.field_p)
    two = SparsePolynomial.const(U.num_vars, 2, U.field_p)
    g = SparsePolynomial.const(U.num_vars, field_one(U.field_p) / c0, U.field_p)
    # each step doubles the correct order; one extra pass for safety
    steps = max(1, math.ceil(math.log2(t + 1)) + 1) if t > 0 else 1
    for _ in range(steps):
        g = truncate_degree(g * (two - U * g), t)
    assert truncate_degree(U * g, t) == truncate_degree(one, t)
    return g


def root_lift(P: SparsePolynomial, y0, t: int) -> SparsePolynomial:
    """Truncated power-series root of P(X, Y) = 0 around X = 0, Y = y0.

    The last variable of P plays the unknown Y.  Requires P(0, y0) = 0 with a
    nonzero Y-derivative there (a simple root); returns the unique series f
    with f(0) = y0 and P(X, f(X)) = 0 modulo all monomials of degree > t,
    truncated to total degree t.  Computed by formal Newton iteration with
    degree-truncated arithmetic.
    """
    if P.num_vars < 1:
        raise ValueError("need at least the unknown variable")
    if t < 0:
        raise ValueError("truncation degree must be nonnegative")
    yvar = P.num_vars - 1
    nx = P.num_vars - 1
    origin = [field_zero(P.field_p)] * nx + [coerce(y0, P.field_p)]
    if P.eval_at(origin):
        raise ValueError(f"y0={y0} is not a root of P at the origin")
    dP = derivative_poly(P, yvar, 1)
    if not dP.eval_at(origin):
        raise ValueError(f"y0={y0} is not a simple root (zero derivative)")

    down = {v: v for v in range(nx)}
    f = SparsePolynomial.const(nx, y0, P.field_p)
    steps = max(1, math.ceil(math.log2(t + 1))) if t > 0 else 0
    for _ in range(steps):
        f_up = relabel_vars(f, P.num_vars, {v: v for v in range(nx)})
        num = subst_var_poly(P, yvar, f_up, max_degree=t)
        den = subst_var_poly(dP, yvar, f_up, max_degree=t)
        # both are Y-free now; bring them down to the X variables
        num_d = relabel_vars(num, nx, down)
        den_d = relabel_vars(den, nx, down)
        f = truncate_degree(f - num_d * series_inverse(den_d, t), t)
    return f


# ---------------------------------------------------------------------------
# primes

# Deterministic Miller-Rabin witness set, proven complete below this bound.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_PROVEN_BOUND = 3317044064679887385961981

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _miller_rabin(n: int, bases: Iterable[int]) -> bool:
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in bases:
        a %= n
        if a == 0:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _jacobi(a: int, n: int) -> int:
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _is_square(n: int) -> bool:
    r = math.isqrt(n)
    return r * r == n


def _strong_lucas(n: int) -> bool:
    """Strong Lucas probable-prime test with the standard parameter search
    (D = 5, -7, 9, -11, ... with Jacobi symbol -1; P = 1, Q = (1 - D) / 4)."""
    if _is_square(n):
        return False
    D = 5
    while True:
        j = _jacobi(D, n)
        if j == -1:
            break
        if j == 0 and abs(D) != n:
            return False
        D = -(D + 2) if D > 0 else -(D - 2)
    Q = (1 - D) // 4

    d = n + 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1

    # compute U_d, V_d by the binary double-and-add chain
    U, V, Qk = 1, 1, Q % n
    for bit in bin(d)[3:]:
        U, V = U * V % n, (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if bit == "1":
            U, V = (U + V) % n, (V + D * U) % n
            if U % 2:
                U += n
            if V % 2:
                V += n
            U, V = U // 2 % n, V // 2 % n
            Qk = Qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * Qk) % n
        if V == 0:
            return True
        Qk = Qk * Qk % n
    return False


def is_prime(n: int) -> bool:
    """Deterministic primality for n below the proven Miller-Rabin witness
    bound (about 3.3e24); beyond that, Miller-Rabin over the same witness set
    combined with a strong Lucas test (no counterexample to the combination
    is known).  Cross-checked against trial division in the test suite."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    if not _miller_rabin(n, _MR_WITNESSES):
        return False
    if n < _MR_PROVEN_BOUND:
        return True
    return _strong_lucas(n)


def is_prime_trial(n: int) -> bool:
    """Trial division, for use as an independent cross-check."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime_at_least(n: int) -> int:
    c = max(2, n)
    while not is_prime(c):
        c += 1
    return c


def bertrand_prime(lo: int, hi: int) -> int:
    """Smallest prime p with lo < p <= hi.

    The precondition hi >= 2 * lo (with lo >= 1) guarantees one exists; the
    search still verifies and raises if the window is somehow empty.
    """
    if lo < 1:
        raise ValueError("lo must be at least 1")
    if hi < 2 * lo:
        raise ValueError(f"window ({lo}, {hi}] too narrow: need hi >= 2*lo")
    c = lo + 1
    while c <= hi:
        if is_prime(c):
            return c
        c += 1
    raise ArithmeticError(f"no prime in ({lo}, {hi}]")


def int_floor_root(x: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer, by Newton iteration."""
    if x < 0 or k < 1:
        raise ValueError("need x >= 0 and k >= 1")
    if x in (0, 1) or k == 1:
        return x
    r = 1 << ((x.bit_length() + k - 1) // k)
    while True:
        nr = ((k - 1) * r + x // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    while r ** k > x:
        r -= 1
    return r


# ---------------------------------------------------------------------------
# text format

def _format_coeff(c: FieldElem) -> str:
    if isinstance(c, GFElem):
        return str(c.val)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def serialize_poly(P: SparsePolynomial) -> str:
    """Canonical text form: a header line, then one `coeff` line per term in
    descending graded-lexicographic order."""
    lines = [f"vars={P.num_vars} field={field_name(P.field_p)}"]
    for mon, c in P.sorted_terms():
        body = " ".join(f"{v}:{e}" for v, e in mon)
        lines.append(f"coeff {_format_coeff(c)} ; {body}".rstrip())
    return "\n".join(lines) + "\n"


def _parse_field(tag: str) -> Field:
    if tag == "Q":
        return None
    if tag.startswith("GF(") and tag.endswith(")"):
        p = int(tag[3:-1])
        if not is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        return p
    raise ValueError(f"unknown field tag {tag!r}")


def parse_coeff(text: str, field_p: Field) -> FieldElem:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return coerce(Fraction(int(num), int(den)), field_p)
    return coerce(int(text), field_p)


def parse_poly_lines(lines: Sequence[str], num_vars: int, field_p: Field,
                     where: str = "") -> SparsePolynomial:
    """Parse `coeff <c> ; v:e v:e ...` lines into a polynomial."""
    items = []
    for ln, raw in lines:
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if not body.startswith("coeff "):
            raise ValueError(f"{where}line {ln}: expected a `coeff` line, got {raw!r}")
        rest = body[len("coeff "):]
        if ";" not in rest:
            raise ValueError(f"{where}line {ln}: missing `;` separator")
        cpart, mpart = rest.split(";", 1)
        try:
            c = parse_coeff(cpart, field_p)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"{where}line {ln}: bad coefficient: {exc}") from None
        pairs = []
        for tok in mpart.split():
            if ":" not in tok:
                raise ValueError(f"{where}line {ln}: bad monomial token {tok!r}")
            v, e = tok.split(":", 1)
            pairs.append((int(v), int(e)))
        items.append((c, pairs))
    return SparsePolynomial.from_terms(num_vars, items, field_p)


def parse_poly(text: str) -> SparsePolynomial:
    """Parse the full polynomial document (header plus coeff lines)."""
    numbered = list(enumerate(text.splitlines(), start=1))
    header = None
    body = []
    for ln, raw in numbered:
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if header is None:
            header = (ln, stripped)
        else:
            body.append((ln, raw))
    if header is None:
        raise ValueError("empty document: missing `vars=... field=...` header")
    ln, head = header
    fields = dict(tok.split("=", 1) for tok in head.split() if "=" in tok)
    if "vars" not in fields or "field" not in fields:
        raise ValueError(f"line {ln}: header must declare vars= and field=")
    num_vars = int(fields["vars"])
    field_p = _parse_field(fields["field"])
    return parse_poly_lines(body, num_vars, field_p)


# ---------------------------------------------------------------------------
# enumeration helpers shared by the measure and circuit modules

def multilinear_monomials(num_vars: int, degree: int) -> Iterator[Mon]:
    """All multilinear monomials of the given degree, lexicographically."""
    for combo in itertools.combinations(range(num_vars), degree):
        yield tuple((v, 1) for v in combo)
