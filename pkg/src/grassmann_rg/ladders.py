"""Four-legged kernels, ends, rungs and ladders.

Kernels are dense numpy arrays of rank 4 over an index set of size N (object
dtype holding mpq in exact mode, float64 otherwise). Grassmann realizations
live in a fixed five-family space:

    psi          external field
    zeta, xi     D- and C-fields on the left of a rung
    zeta1, xi1   D- and C-fields on the right of a rung (primed fields)
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import gmpy2
import numpy as np

from .algebra import (
    GeneratorSpace,
    GrassmannElement,
    ShapeError,
    bits,
    component,
    rename,
    sequence_sign,
    split_field,
)
from .gaussian import Covariance, integrate_product, wick_order

PSI, ZETA, XI, ZETA1, XI1 = "psi", "zeta", "xi", "zeta1", "xi1"
LADDER_FAMILIES = (PSI, ZETA, XI, ZETA1, XI1)

# degree patterns over (zeta, xi, zeta1, xi1)
RUNG_PATTERNS = ((0, 2, 0, 2), (1, 1, 0, 2), (0, 2, 1, 1), (1, 1, 1, 1))
# degree patterns over (psi, zeta1, xi1)
END_PATTERNS = ((2, 0, 2), (2, 1, 1))

_END_SLOTS = {
    (2, 0, 2): (PSI, PSI, XI1, XI1),
    (2, 1, 1): (PSI, PSI, ZETA1, XI1),
}
_RUNG_SLOTS = {
    (0, 2, 0, 2): (XI, XI, XI1, XI1),
    (1, 1, 0, 2): (ZETA, XI, XI1, XI1),
    (0, 2, 1, 1): (XI, XI, ZETA1, XI1),
    (1, 1, 1, 1): (ZETA, XI, ZETA1, XI1),
}


class HypothesisError(ValueError):
    """An input violates a stated hypothesis of the construction."""


def ladder_space(sites: Sequence, budget: int = 64) -> GeneratorSpace:
    return GeneratorSpace([(name, sites) for name in LADDER_FAMILIES], budget=budget)


def _zeros(n: int, rank: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty((n,) * rank, dtype=object)
        out.fill(gmpy2.mpq(0))
        return out
    return np.zeros((n,) * rank)


def _as_matrix(c) -> np.ndarray:
    return c.matrix if isinstance(c, Covariance) else np.asarray(c)


def antisymmetrize(t: np.ndarray) -> np.ndarray:
    """Signed average over all permutations of the slots."""
    n = t.ndim
    acc = None
    for perm in itertools.permutations(range(n)):
        term = np.transpose(t, perm)
        if sequence_sign(perm) < 0:
            term = -term
        acc = term if acc is None else acc + term
    if acc is None:
        return t.copy()
    if t.dtype == object:
        return acc * gmpy2.mpq(1, math.factorial(n))
    return acc / math.factorial(n)


def is_antisymmetric(t: np.ndarray) -> bool:
    return bool(np.all(antisymmetrize(t) == t))


def op_product(f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """(f1 o f2)(i1,i2,i3,i4) = sum_{j1,j2} f1(i1,i2,j1,j2) f2(j1,j2,i3,i4)."""
    if f1.ndim != 4 or f2.ndim != 4 or f1.shape != f2.shape or len(set(f1.shape)) != 1:
        raise ShapeError(f"op_product needs equal cubic rank-4 kernels, got {f1.shape} and {f2.shape}")
    n = f1.shape[0]
    return np.dot(f1.reshape(n * n, n * n), f2.reshape(n * n, n * n)).reshape(n, n, n, n)


def identity_kernel(n: int, exact: bool = True) -> np.ndarray:
    out = _zeros(n, 4, exact)
    for i in range(n):
        for j in range(n):
            out[i, j, i, j] = 1
    return out


def bubble(a, b) -> np.ndarray:
    """(A (x) B)(i1,i2,i3,i4) = A(i1,i3) B(i2,i4)."""
    return np.multiply.outer(_as_matrix(a), _as_matrix(b)).transpose(0, 2, 1, 3)


def standard_bubble(c, d) -> np.ndarray:
    """C(x)C + C(x)D + D(x)C."""
    return bubble(c, c) + bubble(c, d) + bubble(d, c)


def tensor_to_element(t: np.ndarray, space: GeneratorSpace, slot_families: Sequence[str],
                      exact: bool = True) -> GrassmannElement:
    """sum_idx t[idx] g_{fam_1, idx_1} ... g_{fam_n, idx_n}."""
    if len(slot_families) != t.ndim:
        raise ShapeError("one family per slot required")
    offs = [space.offset(f) for f in slot_families]
    out: dict = {}
    for idx in zip(*np.nonzero(t)):
        gens = [o + int(i) for o, i in zip(offs, idx)]
        s = sequence_sign(gens)
        if not s:
            continue
        m = 0
        for g in gens:
            m |= 1 << g
        out[m] = out.get(m, 0) + s * t[idx]
    return GrassmannElement(space, out, exact=exact)


def element_to_tensor(f: GrassmannElement, slot_families: Sequence[str], factor=1) -> np.ndarray:
    """Inverse of ``factor * tensor_to_element`` for tensors antisymmetric within each family.

    ``f`` must be homogeneous with the degrees implied by ``slot_families``.
    """
    space = f.space
    n = len(space.sites(slot_families[0]))
    groups: dict[str, list[int]] = {}
    for k, fam in enumerate(slot_families):
        if len(space.sites(fam)) != n:
            raise ShapeError("slot families must share a site count")
        groups.setdefault(fam, []).append(k)
    perms_per_monomial = math.prod(math.factorial(len(v)) for v in groups.values())
    out = _zeros(n, len(slot_families), f.exact)
    scale = gmpy2.mpq(1, perms_per_monomial) / gmpy2.mpq(factor) if f.exact else 1.0 / (perms_per_monomial * factor)
    for m, v in f.terms.items():
        fam_gens = {}
        for fam, slots in groups.items():
            gens = [g - space.offset(fam) for g in bits(m & space.family_mask(fam))]
            if len(gens) != len(slots):
                raise ValueError("element is not homogeneous in the requested slot degrees")
            fam_gens[fam] = gens
        if sum(len(g) for g in fam_gens.values()) != m.bit_count():
            raise ValueError("element has generators outside the slot families")
        orderings = [itertools.permutations(fam_gens[fam]) for fam in groups]
        for combo in itertools.product(*orderings):
            idx = [0] * len(slot_families)
            for fam, perm in zip(groups, combo):
                for slot, site in zip(groups[fam], perm):
                    idx[slot] = site
            gens = [space.offset(fam) + i for fam, i in zip(slot_families, idx)]
            out[tuple(idx)] = sequence_sign(gens) * v * scale
    return out


def Gr(space: GeneratorSpace, family: str, f: np.ndarray, exact: bool = True) -> GrassmannElement:
    """Gr(family; f) = sum f(i1..i4) g_i1 g_i2 g_i3 g_i4."""
    return tensor_to_element(f, space, [family] * f.ndim, exact)


def kernel_of(F: GrassmannElement, family: str, rank: int = 4) -> np.ndarray:
    """The antisymmetric kernel f with F = Gr(family; f)."""
    return element_to_tensor(F, [family] * rank)


@dataclass
class End:
    """Kernels of sum e202 psi psi xi1 xi1 + 2 e211 psi psi zeta1 xi1."""

    e202: np.ndarray
    e211: np.ndarray

    def element(self, space: GeneratorSpace, exact: bool = True) -> GrassmannElement:
        return (tensor_to_element(self.e202, space, _END_SLOTS[(2, 0, 2)], exact)
                + tensor_to_element(self.e211, space, _END_SLOTS[(2, 1, 1)], exact).scale(2))

    @classmethod
    def from_element(cls, E: GrassmannElement) -> End:
        deg = lambda p: component(E, {PSI: p[0], ZETA: 0, XI: 0, ZETA1: p[1], XI1: p[2]})
        return cls(element_to_tensor(deg((2, 0, 2)), _END_SLOTS[(2, 0, 2)]),
                   element_to_tensor(deg((2, 1, 1)), _END_SLOTS[(2, 1, 1)], factor=2))


@dataclass
class Rung:
    """Kernels of rho0202 xi xi xi1 xi1 + 2 rho1102 zeta xi xi1 xi1 + 2 rho0211 xi xi zeta1 xi1
    + 4 rho1111 zeta xi zeta1 xi1."""

    r0202: np.ndarray
    r1102: np.ndarray
    r0211: np.ndarray
    r1111: np.ndarray

    _FACTORS = (1, 2, 2, 4)

    def kernels(self):
        return (self.r0202, self.r1102, self.r0211, self.r1111)

    def element(self, space: GeneratorSpace, exact: bool = True) -> GrassmannElement:
        out = space.zero(exact)
        for pat, k, fac in zip(RUNG_PATTERNS, self.kernels(), self._FACTORS):
            out = out + tensor_to_element(k, space, _RUNG_SLOTS[pat], exact).scale(fac)
        return out

    @classmethod
    def from_element(cls, R: GrassmannElement) -> Rung:
        ks = []
        for pat, fac in zip(RUNG_PATTERNS, cls._FACTORS):
            piece = component(R, {PSI: 0, ZETA: pat[0], XI: pat[1], ZETA1: pat[2], XI1: pat[3]})
            ks.append(element_to_tensor(piece, _RUNG_SLOTS[pat], factor=fac))
        return cls(*ks)


def _require_quartic(F: GrassmannElement, family: str):
    others = [f for f in F.space.family_names if f != family]
    if component(F, {family: 4, **{o: 0 for o in others}}) != F:
        raise ValueError(f"vertex must be homogeneous quartic in {family!r}")


def end_of(F: GrassmannElement, family: str) -> GrassmannElement:
    """E(F)(psi; zeta1, xi1) = F_{2,0,2} + F_{2,1,1} of F(psi + zeta1 + xi1)."""
    _require_quartic(F, family)
    split = split_field(F, family, [PSI, ZETA1, XI1])
    out = F.space.zero(F.exact)
    for p, z1, x1 in END_PATTERNS:
        out = out + component(split, {PSI: p, ZETA: 0, XI: 0, ZETA1: z1, XI1: x1})
    return out


def rung_of(F: GrassmannElement, family: str) -> GrassmannElement:
    """rho(F) = F_{0,2,0,2} + F_{1,1,0,2} + F_{0,2,1,1} + F_{1,1,1,1} of F(zeta + xi + zeta1 + xi1)."""
    _require_quartic(F, family)
    split = split_field(F, family, [ZETA, XI, ZETA1, XI1])
    out = F.space.zero(F.exact)
    for z, x, z1, x1 in RUNG_PATTERNS:
        out = out + component(split, {PSI: 0, ZETA: z, XI: x, ZETA1: z1, XI1: x1})
    return out


def compose_end_rung(E: GrassmannElement, rho: GrassmannElement, C: Covariance, D: Covariance) -> GrassmannElement:
    """(E o rho)(psi; zeta1, xi1): Wick-order both factors in (zeta, xi), multiply, integrate."""
    covs = {XI: C, ZETA: D}
    left = wick_order(rename(E, {ZETA1: ZETA, XI1: XI}), covs)
    right = wick_order(rho, covs)
    return integrate_product(left, right, covs)


def compose_end_end(E1: GrassmannElement, E2: GrassmannElement, C: Covariance, D: Covariance) -> GrassmannElement:
    """(E1 o E2)(psi): Wick-order both ends in (zeta1, xi1), multiply, integrate."""
    covs = {XI1: C, ZETA1: D}
    return integrate_product(wick_order(E1, covs), wick_order(E2, covs), covs)


def ladder_direct(F: GrassmannElement, family: str, r: int, C: Covariance, D: Covariance) -> GrassmannElement:
    """L_r(F) = E o rho o ... o rho o E with r - 1 rungs, by Gaussian integration."""
    if r < 1:
        raise ValueError("ladder length must be at least 1")
    E = end_of(F, family)
    rho = rung_of(F, family) if r > 1 else None
    T = E
    for _ in range(r - 1):
        T = compose_end_rung(T, rho, C, D)
    return compose_end_end(T, E, C, D)


def ladder_coefficient(r: int):
    """((-1)^r / 2) 12^(r+1), exact."""
    return gmpy2.mpq((-1) ** r * 12 ** (r + 1), 2)


def ladder_series_kernels(f: np.ndarray, bub: np.ndarray, r_max: int):
    """Yield (r, f o (bub o f)^r) for r = 1 .. r_max."""
    step = op_product(bub, f)
    term = f
    for r in range(1, r_max + 1):
        term = op_product(term, step)
        yield r, term


def ladder_kernel_term(f: np.ndarray, C: Covariance, D: Covariance, r: int) -> np.ndarray:
    """Kernel of L_r: ((-1)^r / 2) 12^(r+1) f o (bubble o f)^r."""
    if r < 1:
        raise ValueError("ladder length must be at least 1")
    term = None
    for _, term in ladder_series_kernels(f, standard_bubble(C, D), r):
        pass
    c = ladder_coefficient(r)
    return term * (c if f.dtype == object else float(c))


def ladder_kernel(f: np.ndarray, C: Covariance, D: Covariance, r: int, space: GeneratorSpace,
                  exact: bool = True) -> GrassmannElement:
    return Gr(space, PSI, ladder_kernel_term(f, C, D, r), exact)


def end_end_kernel(E1: End, E2: End, C: Covariance, D: Covariance) -> np.ndarray:
    """Kernel g with E1 o E2 = Gr(psi; g) for antisymmetric end kernels."""
    cc = bubble(C, C)
    mixed = bubble(C, D) + bubble(D, C)
    return -2 * (op_product(op_product(E1.e202, cc), E2.e202) + op_product(op_product(E1.e211, mixed), E2.e211))


def end_rung_kernels(E: End, rho: Rung, C: Covariance, D: Covariance) -> End:
    """Kernels of the end E o rho for antisymmetric kernels."""
    cc = bubble(C, C)
    mixed = bubble(C, D) + bubble(D, C)
    left202 = op_product(E.e202, cc)
    left211 = op_product(E.e211, mixed)
    eps202 = op_product(left202, rho.r0202) + op_product(left211, rho.r1102)
    eps211 = op_product(left202, rho.r0211) + op_product(left211, rho.r1111)
    return End(-2 * eps202, -2 * eps211)


def rung_of_U(U: GrassmannElement, psi: str = PSI, xi: str = XI) -> GrassmannElement:
    """Rung(U): pieces of U(psi + zeta + zeta1; xi + xi1) of psi-degree 0 and rung shape."""
    s = split_field(split_field(U, psi, [PSI, ZETA, ZETA1]), xi, [XI, XI1])
    out = U.space.zero(U.exact)
    for z, x, z1, x1 in RUNG_PATTERNS:
        out = out + component(s, {PSI: 0, ZETA: z, XI: x, ZETA1: z1, XI1: x1})
    return out


def tail_T(U: GrassmannElement, ell: int, C: Covariance, D: Covariance,
           psi: str = PSI, xi: str = XI) -> GrassmannElement:
    """T_ell(U): T_1 takes the pieces of U(psi + zeta + zeta1; xi + xi1) of psi-degree 2,
    no (zeta, xi) and end shape in (zeta1, xi1); T_{ell+1} = T_ell o Rung(U)."""
    if ell < 1:
        raise ValueError("tail length must be at least 1")
    s = split_field(split_field(U, psi, [PSI, ZETA, ZETA1]), xi, [XI, XI1])
    T = U.space.zero(U.exact)
    for p, z1, x1 in END_PATTERNS:
        T = T + component(s, {PSI: p, ZETA: 0, XI: 0, ZETA1: z1, XI1: x1})
    if ell > 1:
        R = rung_of_U(U, psi, xi)
        for _ in range(ell - 1):
            T = compose_end_rung(T, R, C, D)
    return T
