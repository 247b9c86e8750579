"""Finite Grassmann algebras over named families of anticommuting generators.

Monomials are stored as bitsets over a global generator order (the
concatenation of the family orders). A monomial ``m`` stands for the product of
its generators in increasing index order; every coefficient is attached to that
canonical ordering.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

import gmpy2

Site = Hashable

DEFAULT_BUDGET = 64


class SpaceMismatchError(ValueError):
    """Operands live over different generator spaces."""


class ShapeError(ValueError):
    """Families that must share a site set do not."""


def exact(x) -> gmpy2.mpq:
    return gmpy2.mpq(x)


def coerce_scalar(x, is_exact: bool):
    if is_exact:
        if isinstance(x, float):
            raise TypeError("float coefficient given to an exact element")
        return gmpy2.mpq(x)
    return float(x)


def to_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x)
    x = gmpy2.mpq(x)
    return Fraction(int(x.numerator), int(x.denominator))


def bits(mask: int) -> Iterator[int]:
    """Indices of set bits, increasing."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def merge_sign(a: int, b: int) -> int:
    """Sign of reordering (gens of a)(gens of b) into canonical order.

    a and b must be disjoint.
    """
    s = 0
    while b:
        low = b & -b
        s += (a & ~((low << 1) - 1)).bit_count()
        b ^= low
    return -1 if s & 1 else 1


def sequence_sign(indices: Sequence[int]) -> int:
    """Sign of the permutation sorting ``indices``; 0 if an index repeats."""
    n = len(indices)
    if len(set(indices)) != n:
        return 0
    inv = 0
    for i in range(n):
        for j in range(i + 1, n):
            if indices[i] > indices[j]:
                inv += 1
    return -1 if inv & 1 else 1


class GeneratorSpace:
    """Ordered families of generators, each family indexed by a site list."""

    def __init__(self, families: Sequence[tuple[str, Sequence[Site]]], budget: int = DEFAULT_BUDGET):
        names = [name for name, _ in families]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate family names in {names}")
        self.budget = budget
        self._families: dict[str, tuple[int, tuple]] = {}
        offset = 0
        for name, sites in families:
            sites = tuple(sites)
            if len(set(sites)) != len(sites):
                raise ValueError(f"family {name!r} has repeated sites")
            self._families[name] = (offset, sites)
            offset += len(sites)
        if offset > budget:
            raise ValueError(f"{offset} generators exceed the budget of {budget}")
        self.size = offset
        self._key = tuple((name, sites) for name, (_, sites) in self._families.items())
        self._site_pos = {name: {s: i for i, s in enumerate(sites)} for name, (_, sites) in self._families.items()}

    def __eq__(self, other):
        return isinstance(other, GeneratorSpace) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        desc = ", ".join(f"{name}[{len(s)}]" for name, s in self._key)
        return f"GeneratorSpace({desc})"

    @property
    def family_names(self) -> list[str]:
        return list(self._families)

    def sites(self, family: str) -> tuple:
        return self._families[family][1]

    def offset(self, family: str) -> int:
        return self._families[family][0]

    def family_mask(self, family: str) -> int:
        off, sites = self._families[family]
        return ((1 << len(sites)) - 1) << off

    def mask_of(self, families: Iterable[str]) -> int:
        m = 0
        for f in families:
            m |= self.family_mask(f)
        return m

    def index(self, family: str, site) -> int:
        """Global generator index; ``site`` may be a site label or an int position."""
        off, sites = self._families[family]
        pos = self._site_pos[family].get(site)
        if pos is None:
            if isinstance(site, int) and 0 <= site < len(sites):
                pos = site
            else:
                raise KeyError(f"no site {site!r} in family {family!r}")
        return off + pos

    def locate(self, gen: int) -> tuple[str, int]:
        for name, (off, sites) in self._families.items():
            if off <= gen < off + len(sites):
                return name, gen - off
        raise IndexError(gen)

    def same_sites(self, fam_a: str, fam_b: str) -> bool:
        return self.sites(fam_a) == self.sites(fam_b)

    # element constructors

    def zero(self, exact: bool = True) -> GrassmannElement:
        return GrassmannElement(self, {}, exact=exact)

    def one(self, exact: bool = True) -> GrassmannElement:
        return GrassmannElement(self, {0: 1}, exact=exact)

    def scalar(self, value, exact: bool = True) -> GrassmannElement:
        return GrassmannElement(self, {0: value}, exact=exact)

    def gen(self, family: str, site, exact: bool = True) -> GrassmannElement:
        return GrassmannElement(self, {1 << self.index(family, site): 1}, exact=exact)

    def monomial(self, gens: Sequence[tuple[str, object]], coeff=1, exact: bool = True) -> GrassmannElement:
        """coeff times the product of the listed generators, in the listed order."""
        idx = [self.index(f, s) for f, s in gens]
        sign = sequence_sign(idx)
        if sign == 0:
            return self.zero(exact)
        mask = 0
        for i in idx:
            mask |= 1 << i
        return GrassmannElement(self, {mask: coeff * sign}, exact=exact)

    def describe(self, mask: int) -> str:
        if mask == 0:
            return "1"
        parts = []
        for g in bits(mask):
            fam, pos = self.locate(g)
            parts.append(f"{fam}{self.sites(fam)[pos]}")
        return "*".join(parts)


class GrassmannElement:
    """Immutable sparse element: monomial bitset -> nonzero coefficient."""

    __slots__ = ("space", "terms", "exact")

    def __init__(self, space: GeneratorSpace, terms: Mapping[int, object], exact: bool = True, _trusted: bool = False):
        self.space = space
        self.exact = exact
        if _trusted:
            self.terms = terms
        else:
            clean = {}
            for m, v in terms.items():
                if m >> space.size:
                    raise ValueError(f"monomial {m:b} outside the space")
                v = coerce_scalar(v, exact)
                if v != 0:
                    clean[m] = v
            self.terms = clean

    # basic protocol

    def __repr__(self):
        if not self.terms:
            return "0"
        items = sorted(self.terms.items(), key=lambda kv: (kv[0].bit_count(), kv[0]))
        return " + ".join(f"({v})*{self.space.describe(m)}" for m, v in items)

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, GrassmannElement):
            return self.space == other.space and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    __hash__ = None

    def _check(self, other: GrassmannElement):
        if self.space != other.space:
            raise SpaceMismatchError(f"{self.space} vs {other.space}")
        if self.exact != other.exact:
            raise TypeError("cannot mix exact and float elements")

    def _new(self, terms: dict) -> GrassmannElement:
        return GrassmannElement(self.space, terms, exact=self.exact, _trusted=True)

    # linear structure

    def __add__(self, other):
        if not isinstance(other, GrassmannElement):
            other = self.space.scalar(other, self.exact)
        self._check(other)
        out = dict(self.terms)
        _accumulate(out, other.terms)
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({m: -v for m, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> GrassmannElement:
        c = coerce_scalar(c, self.exact)
        if c == 0:
            return self._new({})
        return self._new({m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, GrassmannElement):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, c):
        c = coerce_scalar(c, self.exact)
        return self._new({m: v / c for m, v in self.terms.items()})

    # inspection

    @property
    def constant(self):
        return self.terms.get(0, coerce_scalar(0, self.exact))

    def coefficient(self, gens: Sequence[tuple[str, object]]):
        """Coefficient of the product of ``gens`` taken in the listed order."""
        idx = [self.space.index(f, s) for f, s in gens]
        sign = sequence_sign(idx)
        mask = 0
        for i in idx:
            mask |= 1 << i
        return sign * self.terms.get(mask, 0) if sign else coerce_scalar(0, self.exact)

    def is_even(self) -> bool:
        return all(m.bit_count() % 2 == 0 for m in self.terms)

    def grades(self) -> set[int]:
        return {m.bit_count() for m in self.terms}

    def families_present(self) -> set[str]:
        out = set()
        for name in self.space.family_names:
            fm = self.space.family_mask(name)
            if any(m & fm for m in self.terms):
                out.add(name)
        return out

    def max_abs_coefficient(self):
        return max((abs(v) for v in self.terms.values()), default=0)

    def allclose(self, other: GrassmannElement, atol: float = 1e-12, rtol: float = 1e-9) -> bool:
        if self.space != other.space:
            return False
        for m in set(self.terms) | set(other.terms):
            a = float(self.terms.get(m, 0))
            b = float(other.terms.get(m, 0))
            if abs(a - b) > atol + rtol * max(abs(a), abs(b)):
                return False
        return True

    def to_float(self) -> GrassmannElement:
        return GrassmannElement(self.space, {m: float(v) for m, v in self.terms.items()}, exact=False)

    def to_exact(self) -> GrassmannElement:
        return GrassmannElement(self.space, {m: gmpy2.mpq(v) for m, v in self.terms.items()}, exact=True)

    def to_dict(self) -> dict[str, str]:
        """JSON-friendly view: monomial description -> coefficient string."""
        items = sorted(self.terms.items(), key=lambda kv: (kv[0].bit_count(), kv[0]))
        return {self.space.describe(m): str(v) for m, v in items}


def _accumulate(out: dict, terms: Mapping[int, object], factor=None):
    for m, v in terms.items():
        if factor is not None:
            v = factor * v
        s = out.get(m)
        if s is None:
            if v != 0:
                out[m] = v
        else:
            s = s + v
            if s == 0:
                del out[m]
            else:
                out[m] = s


def multiply(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    """Exterior product, bilinear, signs normalized to the canonical order."""
    a._check(b)
    out: dict = {}
    bt = list(b.terms.items())
    for ma, va in a.terms.items():
        for mb, vb in bt:
            if ma & mb:
                continue
            v = va * vb
            if merge_sign(ma, mb) < 0:
                v = -v
            m = ma | mb
            s = out.get(m)
            if s is None:
                out[m] = v
            else:
                s = s + v
                if s == 0:
                    del out[m]
                else:
                    out[m] = s
    return a._new(out)


def linear_substitute(f: GrassmannElement, images: Mapping[int, Mapping[int, object]]) -> GrassmannElement:
    """Apply the algebra homomorphism sending generator g to sum_j c_j gen_j.

    ``images`` maps generator index -> {target index: coefficient}; generators
    not listed are fixed. Odd linear images keep this a homomorphism.
    """
    out: dict = {}
    for m, v in f.terms.items():
        partial = {0: v}
        for g in bits(m):
            img = images.get(g)
            if img is None:
                img = {g: 1}
            nxt: dict = {}
            for pm, pv in partial.items():
                for j, c in img.items():
                    if pm >> j & 1:
                        continue
                    w = pv * c
                    if (pm >> (j + 1)).bit_count() & 1:
                        w = -w
                    nm = pm | (1 << j)
                    nxt[nm] = nxt.get(nm, 0) + w
            partial = nxt
        _accumulate(out, partial)
    return GrassmannElement(f.space, out, exact=f.exact)


def split_field(f: GrassmannElement, family: str, parts: Sequence[str]) -> GrassmannElement:
    """Substitute every generator of ``family`` by the sum of its copies in ``parts``.

    ``parts`` may include ``family`` itself.
    """
    space = f.space
    for p in parts:
        if not space.same_sites(family, p):
            raise ShapeError(f"family {p!r} does not share the sites of {family!r}")
    off = space.offset(family)
    n = len(space.sites(family))
    images = {}
    for i in range(n):
        images[off + i] = {space.offset(p) + i: 1 for p in parts}
    return linear_substitute(f, images)


def rename(f: GrassmannElement, mapping: Mapping[str, str]) -> GrassmannElement:
    """Relabel families (same sites), re-canonicalizing signs."""
    space = f.space
    images = {}
    for src, dst in mapping.items():
        if not space.same_sites(src, dst):
            raise ShapeError(f"family {dst!r} does not share the sites of {src!r}")
        so, do = space.offset(src), space.offset(dst)
        for i in range(len(space.sites(src))):
            images[so + i] = {do + i: 1}
    return linear_substitute(f, images)


def set_to_zero(f: GrassmannElement, families: Iterable[str]) -> GrassmannElement:
    kill = f.space.mask_of(families)
    return f._new({m: v for m, v in f.terms.items() if not m & kill})


def degree_component(f: GrassmannElement, family: str, n: int) -> GrassmannElement:
    """Part of f with exactly n generators from ``family``."""
    return component(f, {family: n})


def component(f: GrassmannElement, degrees: Mapping[str, int]) -> GrassmannElement:
    """Part of f with the prescribed degree in each listed family."""
    if any(n < 0 for n in degrees.values()):
        raise ValueError("degrees must be nonnegative")
    masks = [(f.space.family_mask(fam), n) for fam, n in degrees.items()]
    return f._new({m: v for m, v in f.terms.items() if all((m & fm).bit_count() == n for fm, n in masks)})


def grade_component(f: GrassmannElement, n: int) -> GrassmannElement:
    """Part of f of total degree n."""
    return f._new({m: v for m, v in f.terms.items() if m.bit_count() == n})


def _nilpotent_series(n: GrassmannElement, coeffs) -> GrassmannElement:
    """sum_k coeffs(k) n^k for nilpotent n, stopping when the power vanishes."""
    total = n.space.scalar(coeffs(0), n.exact) if coeffs(0) else n.space.zero(n.exact)
    power = n.space.one(n.exact)
    k = 0
    while True:
        k += 1
        power = multiply(power, n)
        if not power:
            return total
        c = coeffs(k)
        if c:
            total = total + power.scale(c)


def exp_even(f: GrassmannElement) -> GrassmannElement:
    """exp of an even element; the nilpotent part's series terminates.

    In exact mode the constant term must be zero (e**c is not rational).
    """
    if not f.is_even():
        raise ValueError("exp_even needs an even element")
    c = f.constant
    n = f._new({m: v for m, v in f.terms.items() if m})
    if f.exact:
        if c != 0:
            raise ValueError("exact exp needs a vanishing constant term")
        series = _nilpotent_series(n, lambda k: gmpy2.mpq(1, math.factorial(k)))
        return series
    series = _nilpotent_series(n, lambda k: 1.0 / math.factorial(k))
    return series.scale(math.exp(c))


def log_near_one(g: GrassmannElement) -> GrassmannElement:
    """log of an even element with nonzero constant term.

    In exact mode the constant term must equal 1.
    """
    if not g.is_even():
        raise ValueError("log_near_one needs an even element")
    c = g.constant
    if c == 0:
        raise ValueError("log of an element with zero constant term")
    if g.exact and c != 1:
        raise ValueError("exact log needs constant term 1; normalize first")
    n = g._new({m: v / c for m, v in g.terms.items() if m})
    if g.exact:
        return _nilpotent_series(n, lambda k: gmpy2.mpq((-1) ** (k + 1), k) if k else 0)
    if c < 0:
        raise ValueError(f"constant term {c} is negative; log would be complex")
    out = _nilpotent_series(n, lambda k: (-1) ** (k + 1) / k if k else 0.0)
    return out + math.log(c)
