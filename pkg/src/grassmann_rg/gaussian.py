"""Grassmann Gaussian integrals, Wick ordering and tensor contractions.

Conventions: ``integral(xi_i xi_j dmu_C) = C[i, j]`` and, more generally, the
moment of an ordered product of generators is the Pfaffian of the covariance
restricted to them. For a monomial that mixes integrated and spectator
generators, the integrated generators are first moved to the front (collecting
the permutation sign) and then replaced by their moment.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import gmpy2
import numpy as np

from .algebra import (
    GeneratorSpace,
    GrassmannElement,
    ShapeError,
    _accumulate,
    bits,
    coerce_scalar,
    merge_sign,
)


class ValidationError(ValueError):
    pass


def as_array(matrix, exact: bool = True) -> np.ndarray:
    """Copy ``matrix`` into an object array of mpq (exact) or a float64 array."""
    arr = np.array(matrix, dtype=object)
    if exact:
        out = np.empty(arr.shape, dtype=object)
        for idx in np.ndindex(arr.shape):
            v = arr[idx]
            if isinstance(v, float):
                raise TypeError("float entry in an exact array")
            out[idx] = gmpy2.mpq(v)
        return out
    return np.array(arr, dtype=float)


def is_exact_array(a: np.ndarray) -> bool:
    return a.dtype == object


def _pfaffian_masked(lookup, mask: int, memo: dict):
    if mask == 0:
        return 1
    if mask.bit_count() & 1:
        return 0
    hit = memo.get(mask)
    if hit is not None:
        return hit
    low = mask & -mask
    i = low.bit_length() - 1
    rest = mask ^ low
    total = 0
    sign = 1
    for j in bits(rest):
        a = lookup(i, j)
        if a:
            sub = _pfaffian_masked(lookup, rest ^ (1 << j), memo)
            if sub:
                total = total + sign * a * sub
        sign = -sign
    memo[mask] = total
    return total


def pfaffian(m) -> object:
    """Pfaffian of an antisymmetric matrix by expansion along the first row.

    Odd dimension gives 0 (the Gaussian moment of an odd monomial).
    """
    a = np.asarray(m, dtype=object)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("pfaffian needs a square matrix")
    n = a.shape[0]
    for i in range(n):
        if a[i, i] != 0:
            raise ValidationError("diagonal must vanish")
        for j in range(i + 1, n):
            if a[i, j] != -a[j, i]:
                raise ValidationError(f"matrix not antisymmetric at ({i}, {j})")
    if n % 2:
        return 0
    return _pfaffian_masked(lambda i, j: a[i, j], (1 << n) - 1, {})


class Covariance:
    """Antisymmetric pairing matrix over a site list.

    ``family`` optionally pins the covariance to one generator family; when it
    is None the covariance applies to any family with the same sites.
    """

    def __init__(self, matrix, sites: Sequence | None = None, family: str | None = None, exact: bool | None = None):
        arr = np.asarray(matrix, dtype=object)
        if exact is None:
            exact = not any(isinstance(v, float) for v in arr.flat)
        self.matrix = as_array(arr, exact)
        self.exact = exact
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n):
            raise ValidationError("covariance matrix must be square")
        for i in range(n):
            if self.matrix[i, i] != 0:
                raise ValidationError("covariance diagonal must vanish")
            for j in range(i + 1, n):
                if self.matrix[i, j] != -self.matrix[j, i]:
                    raise ValidationError(f"covariance not antisymmetric at ({i}, {j})")
        self.sites = tuple(sites) if sites is not None else tuple(range(n))
        if len(self.sites) != n:
            raise ValidationError("site list does not match matrix size")
        self.family = family
        self._memo: dict = {}

    @classmethod
    def zero(cls, sites: Sequence, family: str | None = None, exact: bool = True) -> Covariance:
        n = len(sites)
        return cls(np.zeros((n, n), dtype=object) if exact else np.zeros((n, n)), sites, family, exact)

    @classmethod
    def colour_diagonal(cls, point_matrix, colours: Sequence, points: Sequence, family: str | None = None,
                        exact: bool | None = None) -> Covariance:
        """Lift C(x, x') to C((c, x), (c', x')) = delta_{c c'} C(x, x')."""
        pm = np.asarray(point_matrix, dtype=object)
        nx = len(points)
        sites = [(c, x) for c in colours for x in points]
        n = len(sites)
        big = np.zeros((n, n), dtype=object)
        for ci in range(len(colours)):
            big[ci * nx:(ci + 1) * nx, ci * nx:(ci + 1) * nx] = pm
        if exact is None:
            exact = not any(isinstance(v, float) for v in pm.flat)
        if not exact:
            big = big.astype(float)
        return cls(big, sites, family, exact)

    def on(self, family: str) -> Covariance:
        return Covariance(self.matrix, self.sites, family, self.exact)

    def __repr__(self):
        return f"Covariance(n={len(self.sites)}, family={self.family!r}, exact={self.exact})"

    def _combine(self, other: Covariance, sign: int) -> Covariance:
        if self.sites != other.sites:
            raise ShapeError("covariances over different sites")
        if self.exact != other.exact:
            raise TypeError("cannot mix exact and float covariances")
        fam = self.family if self.family == other.family else None
        return Covariance(self.matrix + sign * other.matrix, self.sites, fam, self.exact)

    def __add__(self, other: Covariance) -> Covariance:
        return self._combine(other, 1)

    def __sub__(self, other: Covariance) -> Covariance:
        return self._combine(other, -1)

    def __neg__(self) -> Covariance:
        return Covariance(-self.matrix, self.sites, self.family, self.exact)

    def scale(self, c) -> Covariance:
        return Covariance(self.matrix * coerce_scalar(c, self.exact), self.sites, self.family, self.exact)

    def __eq__(self, other):
        return (isinstance(other, Covariance) and self.sites == other.sites
                and bool(np.all(self.matrix == other.matrix)))

    __hash__ = None

    def is_zero(self) -> bool:
        return not any(v != 0 for v in self.matrix.flat)

    def moment(self, positions: Sequence[int]):
        """integral of xi_{p1} ... xi_{pk} dmu for increasing site positions."""
        mask = 0
        for p in positions:
            mask |= 1 << p
        return _pfaffian_masked(lambda i, j: self.matrix[i, j], mask, self._memo)

    def moment_mask(self, mask: int):
        return _pfaffian_masked(lambda i, j: self.matrix[i, j], mask, self._memo)


class _JointMeasure:
    """Product measure over several families, addressed by global generator index."""

    def __init__(self, space: GeneratorSpace, covs: Mapping[str, Covariance]):
        self.space = space
        self.exact = None
        self._fam_of: dict[int, tuple[int, Covariance]] = {}
        self.mask = 0
        for fam, cov in covs.items():
            if cov.family is not None and cov.family != fam:
                raise ValidationError(f"covariance pinned to {cov.family!r} used on {fam!r}")
            if cov.sites != space.sites(fam):
                raise ShapeError(f"covariance sites do not match family {fam!r}")
            if self.exact is None:
                self.exact = cov.exact
            elif self.exact != cov.exact:
                raise TypeError("cannot mix exact and float covariances")
            off = space.offset(fam)
            for k in range(len(cov.sites)):
                self._fam_of[off + k] = (off, cov)
            self.mask |= space.family_mask(fam)
        self._memo: dict = {}

    def _lookup(self, i: int, j: int):
        oi, ci = self._fam_of[i]
        oj, _ = self._fam_of[j]
        if oi != oj:
            return 0
        return ci.matrix[i - oi, j - oi]

    def moment(self, mask: int):
        return _pfaffian_masked(self._lookup, mask, self._memo)


def _normalize_covs(family, cov) -> dict:
    if isinstance(family, Mapping):
        return dict(family)
    return {family: cov}


def integrate(f: GrassmannElement, family, cov: Covariance | None = None) -> GrassmannElement:
    """Integrate out every generator of ``family`` (or of each family in a mapping)."""
    covs = _normalize_covs(family, cov)
    meas = _JointMeasure(f.space, covs)
    _check_mode(f, meas)
    K = meas.mask
    out: dict = {}
    for m, v in f.terms.items():
        alpha = m & K
        if alpha.bit_count() & 1:
            continue
        mom = meas.moment(alpha)
        if not mom:
            continue
        spect = m ^ alpha
        w = v * mom
        if merge_sign(alpha, spect) < 0:
            w = -w
        _accumulate(out, {spect: w})
    return GrassmannElement(f.space, out, exact=f.exact)


def _check_mode(f: GrassmannElement, meas: _JointMeasure):
    if meas.exact is not None and meas.exact != f.exact:
        raise TypeError("element and covariance disagree on exact/float mode")


def _group(f: GrassmannElement, K: int) -> dict[int, dict[int, object]]:
    """f = sum_alpha alpha * A_alpha with alpha the integrated part."""
    groups: dict[int, dict[int, object]] = {}
    for m, v in f.terms.items():
        alpha = m & K
        spect = m ^ alpha
        if merge_sign(alpha, spect) < 0:
            v = -v
        groups.setdefault(alpha, {})[spect] = v
    return groups


def integrate_product(a: GrassmannElement, b: GrassmannElement, family, cov: Covariance | None = None) -> GrassmannElement:
    """integrate(a * b) without forming the full product.

    Both factors are grouped by their integrated part; pairings of the groups
    are evaluated once and the spectator parts combined afterwards.
    """
    a._check(b)
    covs = _normalize_covs(family, cov)
    meas = _JointMeasure(a.space, covs)
    _check_mode(a, meas)
    K = meas.mask
    ga = _group(a, K)
    gb = _group(b, K)
    zero = coerce_scalar(0, a.exact)
    out: dict = {}
    for alpha, A in ga.items():
        a_even = {s: v for s, v in A.items() if not s.bit_count() & 1}
        a_odd = {s: v for s, v in A.items() if s.bit_count() & 1}
        t_even: dict = {}
        t_odd: dict = {}
        for beta, B in gb.items():
            if alpha & beta:
                continue
            gamma = alpha | beta
            if gamma.bit_count() & 1:
                continue
            mom = meas.moment(gamma)
            if not mom:
                continue
            w = mom if merge_sign(alpha, beta) > 0 else -mom
            if a_even:
                _accumulate(t_even, B, w)
            if a_odd:
                _accumulate(t_odd, B, -w if beta.bit_count() & 1 else w)
        for part, t in ((a_even, t_even), (a_odd, t_odd)):
            if not part or not t:
                continue
            for sa, va in part.items():
                for sb, vb in t.items():
                    if sa & sb:
                        continue
                    v = va * vb
                    if merge_sign(sa, sb) < 0:
                        v = -v
                    m = sa | sb
                    s = out.get(m, zero) + v
                    if s == 0:
                        out.pop(m, None)
                    else:
                        out[m] = s
    return GrassmannElement(a.space, out, exact=a.exact)


def convolve(f: GrassmannElement, family, cov: Covariance | None = None) -> GrassmannElement:
    """g(xi) = integral f(xi + zeta) dmu_cov(zeta), evaluated monomial by monomial.

    Replacing the generators T of a monomial by zeta and integrating gives
    sign(T to front) * moment(T) * (monomial without T), which is what the
    subset sum below computes; no auxiliary zeta family is needed.
    """
    covs = _normalize_covs(family, cov)
    meas = _JointMeasure(f.space, covs)
    _check_mode(f, meas)
    K = meas.mask
    out: dict = {}
    for m, v in f.terms.items():
        inside = m & K
        sub = inside
        # all subsets of the integrated part, including empty
        while True:
            if not sub.bit_count() & 1:
                mom = meas.moment(sub)
                if mom:
                    rest = m ^ sub
                    w = v * mom
                    if merge_sign(sub, rest) < 0:
                        w = -w
                    _accumulate(out, {rest: w})
            if sub == 0:
                break
            sub = (sub - 1) & inside
    return GrassmannElement(f.space, out, exact=f.exact)


def wick_order(f: GrassmannElement, family, cov: Covariance | None = None) -> GrassmannElement:
    """:f:_{family, cov}(xi) = integral f(xi + zeta) dmu_{-cov}(zeta)."""
    covs = _normalize_covs(family, cov)
    return convolve(f, {fam: -c for fam, c in covs.items()})


def unwick(f: GrassmannElement, family, cov: Covariance | None = None) -> GrassmannElement:
    """Inverse of wick_order with the same covariance."""
    return convolve(f, _normalize_covs(family, cov))


def moment_tensor(cov: Covariance, rank: int) -> np.ndarray:
    """Dense antisymmetric tensor M[s1..sk] = integral xi_s1 ... xi_sk dmu."""
    n = len(cov.sites)
    out = np.zeros((n,) * rank, dtype=object if cov.exact else float)
    if rank == 0:
        out[()] = 1
        return out
    for idx in np.ndindex(*out.shape):
        if len(set(idx)) != rank:
            continue
        order = sorted(range(rank), key=lambda k: idx[k])
        # sign of the permutation sorting idx
        sign = 1
        seen = [False] * rank
        for start in range(rank):
            if seen[start]:
                continue
            length = 0
            k = start
            while not seen[k]:
                seen[k] = True
                k = order[k]
                length += 1
            if length % 2 == 0:
                sign = -sign
        out[idx] = sign * cov.moment(sorted(idx))
    return out


def contract(t: np.ndarray, i: int, j: int, cov: Covariance) -> np.ndarray:
    """Con_{i,j,C}: sum_{a,b} t[.., a@i, .., b@j, ..] C[a, b]; other slots keep their order."""
    n = t.ndim
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise IndexError(f"bad contraction slots ({i}, {j}) for rank {n}")
    moved = np.moveaxis(t, (i, j), (0, 1))
    return np.tensordot(cov.matrix, moved, axes=([0, 1], [0, 1]))


def contract_pair(f: np.ndarray, fp: np.ndarray, slots_f: Sequence[int], slots_fp: Sequence[int],
                  covs: Sequence[Covariance]) -> np.ndarray:
    """Iterated contractions Con_{i1, n+j1, C1} ... (f (x) f') without forming f (x) f'.

    Remaining slots: those of f in order, then those of f' in order.
    """
    if not (len(slots_f) == len(slots_fp) == len(covs)):
        raise ValueError("slot lists and covariances must have equal length")
    if len(set(slots_f)) != len(slots_f) or len(set(slots_fp)) != len(slots_fp):
        raise ValueError("contraction slots must be distinct")
    h = fp
    for j, cov in zip(slots_fp, covs):
        # h[.., a@j, ..] = sum_b C[a, b] fp[.., b@j, ..]
        h = np.moveaxis(np.tensordot(cov.matrix, h, axes=([1], [j])), 0, j)
    return np.tensordot(f, h, axes=(list(slots_f), list(slots_fp)))


def outer(f: np.ndarray, fp: np.ndarray) -> np.ndarray:
    return np.multiply.outer(f, fp)
