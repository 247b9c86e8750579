"""Colour/position seminorms, combined norms, |||.|||, N(.; alpha) and
inequality fuzzing of the configuration axioms.

Sites of the index set F x X are ordered colour-major: site s has colour
s // |X| and point s % |X|. Tensors are dense numpy arrays over sites, or
sparse ``{site tuple: value}`` maps; Grassmann elements are expanded into
their antisymmetric coefficient functions.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import gmpy2
import numpy as np

from .algebra import GrassmannElement, bits, component, sequence_sign
from .gaussian import Covariance, contract_pair, moment_tensor
from .ladders import antisymmetrize


@dataclass(frozen=True)
class ColourGeometry:
    n_colours: int
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if self.n_colours < 1:
            raise ValueError("need at least one colour")

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_sites(self) -> int:
        return self.n_colours * self.n_points

    def sites(self) -> list:
        return [(c, x) for c in range(self.n_colours) for x in self.points]

    def split(self, s: int) -> tuple[int, int]:
        return divmod(s, self.n_points)


# seminorms


def _check_p(p: int, n: int):
    if p < 1:
        raise ValueError("p must be positive")
    if p > n:
        raise ValueError(f"p = {p} exceeds the rank {n}")


def _dense_phis(t: np.ndarray, geom: ColourGeometry) -> list[np.ndarray]:
    """Phi_k(c_1..c_n) = sup_{x_k} sum_{x_j, j != k} |t|, for every k."""
    n = t.ndim
    F, X = geom.n_colours, geom.n_points
    if t.shape != (F * X,) * n:
        raise ValueError(f"tensor shape {t.shape} does not match the geometry")
    a = np.abs(t).reshape([F, X] * n)
    a = a.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2)))
    phis = []
    for k in range(n):
        others = tuple(n + j for j in range(n) if j != k)
        s = a.sum(axis=others) if others else a
        phis.append(s.max(axis=n))
    return phis


def _phi_norm(phis: Sequence[np.ndarray], n: int, p: int, symmetric: bool):
    best = 0
    if symmetric:
        # for a symmetric |t| only whether k is a held slot matters
        cases = [(tuple(range(p)), 0)]
        if p < n:
            cases.append((tuple(range(1, p + 1)), 0))
    else:
        cases = [(S, k) for S in itertools.combinations(range(n), p) for k in range(n)]
    for S, k in cases:
        free = tuple(i for i in range(n) if i not in S)
        v = phis[k].sum(axis=free) if free else phis[k]
        m = v.max()
        if m > best:
            best = m
    return best


def seminorm_p(t, p: int, geom: ColourGeometry, symmetric: bool = False):
    """||t||_p for odd p; even p gives 0 (only the odd configuration is used).

    ``t`` is a dense array or a sparse {site tuple: value} map.
    ``symmetric`` asserts |t| is invariant under slot permutations.
    """
    if isinstance(t, Mapping):
        return _sparse_norms(t, [p], geom, symmetric)[p]
    n = t.ndim
    _check_p(p, n)
    if p % 2 == 0:
        return 0
    return _phi_norm(_dense_phis(t, geom), n, p, symmetric)


def seminorms(t, ps: Iterable[int], geom: ColourGeometry, symmetric: bool = False) -> dict:
    """Several ||t||_p at once, sharing the Phi_k computation; p > rank gives 0."""
    ps = list(ps)
    if isinstance(t, Mapping):
        return _sparse_norms(t, ps, geom, symmetric, clip=True)
    n = t.ndim
    phis = _dense_phis(t, geom) if any(p <= n and p % 2 for p in ps) else None
    return {p: (_phi_norm(phis, n, p, symmetric) if p <= n and p % 2 else 0) for p in ps}


def _sparse_norms(entries: Mapping[tuple, object], ps, geom: ColourGeometry, symmetric: bool, clip: bool = False):
    rank = None
    for idx in entries:
        rank = len(idx)
        break
    out = {}
    if rank is None:
        return {p: 0 for p in ps}
    for p in ps:
        if not clip:
            _check_p(p, rank)
    cols = {}
    for idx, v in entries.items():
        cs = tuple(geom.split(s)[0] for s in idx)
        xs = tuple(geom.split(s)[1] for s in idx)
        cols.setdefault(cs, []).append((xs, abs(v)))
    ks = [0] if symmetric else list(range(rank))
    phis = {}
    for k in ks:
        phi = {}
        for cs, items in cols.items():
            acc: dict = {}
            for xs, v in items:
                acc[xs[k]] = acc.get(xs[k], 0) + v
            phi[cs] = max(acc.values())
        phis[k] = phi
    for p in ps:
        if p > rank or p % 2 == 0:
            out[p] = 0
            continue
        if symmetric:
            cases = [(tuple(range(p)), 0)] + ([(tuple(range(1, p + 1)), 0)] if p < rank else [])
        else:
            cases = [(S, k) for S in itertools.combinations(range(rank), p) for k in range(rank)]
        best = 0
        for S, k in cases:
            acc = {}
            for cs, v in phis[k].items():
                key = tuple(cs[i] for i in S)
                acc[key] = acc.get(key, 0) + v
            m = max(acc.values())
            if m > best:
                best = m
        out[p] = best
    return out


def element_entries(f: GrassmannElement, families: Sequence[str]) -> dict:
    """Coefficient function of a homogeneous element, slots grouped family by family.

    Antisymmetric within each family: each monomial spreads over all orderings
    with weight coeff / prod(n_i!).
    """
    space = f.space
    out: dict = {}
    for m, v in f.terms.items():
        per_fam = []
        for fam in families:
            off = space.offset(fam)
            per_fam.append([g - off for g in bits(m & space.family_mask(fam))])
        if sum(len(g) for g in per_fam) != m.bit_count():
            raise ValueError("element has generators outside the listed families")
        weight = v / math.prod(math.factorial(len(g)) for g in per_fam)
        offs = [space.offset(fam) for fam in families]
        for combo in itertools.product(*(itertools.permutations(g) for g in per_fam)):
            idx = tuple(s for part in combo for s in part)
            gens = [o + s for o, part in zip(offs, combo) for s in part]
            out[idx] = sequence_sign(gens) * weight
    return out


def _count_vectors(total: int, k: int):
    if k == 1:
        yield (total,)
        return
    for a in range(total + 1):
        for rest in _count_vectors(total - a, k - 1):
            yield (a,) + rest


def _multinomial(counts) -> int:
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out


def antisymmetric_norms(f: GrassmannElement, family: str, geom: ColourGeometry, ps: Iterable[int]) -> dict:
    """||.||_p of the antisymmetric kernel of a homogeneous one-family element.

    For an antisymmetric kernel only slot 0 needs to be the position slot, and
    the sum over x_1..x_{n-1} depends on the colours of those slots only
    through their counts. Monomials are grouped accordingly, so the n!
    orderings of each monomial are never listed.
    """
    ps = list(ps)
    space = f.space
    off = space.offset(family)
    F = geom.n_colours
    degs = {m.bit_count() for m in f.terms}
    if not degs:
        return {p: 0 for p in ps}
    if len(degs) != 1:
        raise ValueError("element is not homogeneous")
    n = degs.pop()
    if f.terms.keys() and any(m & ~space.family_mask(family) for m in f.terms):
        raise ValueError(f"element has generators outside {family}")
    nfact = math.factorial(n)
    A: dict = {}
    for m, v in f.terms.items():
        cols = [geom.split(g - off) for g in bits(m)]
        counts = [0] * F
        for c, _ in cols:
            counts[c] += 1
        av = abs(v)
        for c0, x0 in cols:
            counts[c0] -= 1
            mult = math.prod(math.factorial(k) for k in counts)
            w = av * gmpy2.mpq(mult, nfact) if f.exact else av * mult / nfact
            key = (c0, tuple(counts), x0)
            A[key] = A.get(key, 0) + w
            counts[c0] += 1
    phi: dict = {}
    for (c0, cnt, _), w in A.items():
        if w > phi.get((c0, cnt), 0):
            phi[(c0, cnt)] = w

    def add(a, b):
        return tuple(x + y for x, y in zip(a, b))

    free_cache = {}

    def free(k):
        if k not in free_cache:
            free_cache[k] = [(kap, _multinomial(kap)) for kap in _count_vectors(k, F)]
        return free_cache[k]

    out = {}
    for p in ps:
        if p > n or p % 2 == 0:
            out[p] = 0
            continue
        best = 0
        # held slots 0..p-1, position slot 0 among them
        for c0 in range(F):
            for h in _count_vectors(p - 1, F):
                val = sum(mu * phi.get((c0, add(h, kap)), 0) for kap, mu in free(n - p))
                if val > best:
                    best = val
        # held slots 1..p, position slot 0 summed over its colour
        if p < n:
            for h in _count_vectors(p, F):
                val = sum(mu * phi.get((c0, add(h, kap)), 0)
                          for c0 in range(F) for kap, mu in free(n - p - 1))
                if val > best:
                    best = val
        out[p] = best
    return out


def combined_norm(t, J, q: int, geom: ColourGeometry, symmetric: bool = False):
    """||t|| = sum_{p odd <= q} J^{(1-p)/2} ||t||_p."""
    return _weighted(t, J, q, geom, symmetric)


def improved_norm(t, J, q: int, geom: ColourGeometry, symmetric: bool = False):
    """Same sum truncated at q - 2."""
    return _weighted(t, J, q - 2, geom, symmetric)


def _weighted(t, J, top: int, geom: ColourGeometry, symmetric: bool):
    if top % 2 == 0:
        raise ValueError("q must be odd")
    ps = list(range(1, top + 1, 2))
    vals = seminorms(t, ps, geom, symmetric)
    inv = 1 / J
    return sum(vals[p] * inv ** ((p - 1) // 2) for p in ps)


# colour-preserving kernels


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def position_norm(w: np.ndarray):
    """max_k sup_{x_k} sum_{x_j, j != k} |w|."""
    a = np.abs(w)
    n = a.ndim
    best = 0
    for k in range(n):
        others = tuple(j for j in range(n) if j != k)
        m = (a.sum(axis=others) if others else a).max()
        if m > best:
            best = m
    return best


@dataclass
class ColourPreservingKernel:
    """Ant[delta_{c1 c2} ... delta_{c_{n-1} c_n} w(x_1..x_n)] over F x X."""

    w: np.ndarray
    geom: ColourGeometry

    @property
    def n(self) -> int:
        return self.w.ndim

    def __post_init__(self):
        if self.n % 2:
            raise ValueError("colour preserving kernels have even arity")
        if self.w.shape != (self.geom.n_points,) * self.n:
            raise ValueError("representative shape does not match the points")

    def realize(self) -> np.ndarray:
        n, F, X = self.n, self.geom.n_colours, self.geom.n_points
        exact = self.w.dtype == object
        delta = np.zeros((F,) * n, dtype=object if exact else float)
        for cs in itertools.product(range(F), repeat=n // 2):
            delta[tuple(c for c in cs for _ in (0, 1))] = 1
        full = np.multiply.outer(delta, self.w)
        order = [a for k in range(n) for a in (k, n + k)]
        full = full.transpose(order).reshape((F * X,) * n)
        return antisymmetrize(full)

    def representative_norm(self):
        """The |||.||| functional on the stored representative (an upper bound)."""
        return position_norm(self.w)


def canonical_representative(W: np.ndarray, geom: ColourGeometry) -> np.ndarray:
    """w(x) = (n-1)!! W((a1,x1),(a1,x2),(a2,x3),(a2,x4),...) with distinct colours a_i.

    This is the signed average of any representative over the permutations
    preserving the colour pairing; it represents W and minimizes the |||.|||
    functional, so its value is the infimum. Needs |F| >= n/2.
    """
    n = W.ndim
    F, X = geom.n_colours, geom.n_points
    if F < n // 2:
        raise ValueError("canonical representative needs at least n/2 colours")
    cols = [c for c in range(n // 2) for _ in (0, 1)]
    Wr = W.reshape((F, X) * n)
    sel = Wr[tuple(a for c in cols for a in (c, slice(None)))]
    return sel * double_factorial(n - 1)


def triple_bar_norm(W, geom: ColourGeometry):
    """|||W||| for a colour-preserving antisymmetric kernel (dense) or a ColourPreservingKernel.

    Kernels are evaluated on their canonical representative, which attains the
    infimum; a ColourPreservingKernel therefore reports the exact value too.
    """
    if isinstance(W, ColourPreservingKernel):
        W = W.realize()
    return position_norm(canonical_representative(W, geom))


# integration constants and N(.; alpha)


@dataclass(frozen=True)
class IntegrationConstants:
    """(b, c, J); b is carried through b^2 so even powers stay exact."""

    b_sq: object
    c: object
    J: object

    def __post_init__(self):
        if self.b_sq < 0 or self.c < 0:
            raise ValueError("b and c must be nonnegative")
        if self.J <= 0:
            raise ValueError("J must be positive")

    @property
    def b(self) -> float:
        return math.sqrt(float(self.b_sq))

    def b_power(self, n: int):
        if n % 2 == 0:
            return self.b_sq ** (n // 2)
        return self.b ** n


def _grade_pieces(f: GrassmannElement, families: Sequence[str]):
    """Yield (degree tuple, component) for every nonzero multi-degree."""
    space = f.space
    masks = [space.family_mask(fam) for fam in families]
    degs = set()
    for m in f.terms:
        degs.add(tuple((m & fm).bit_count() for fm in masks))
    for d in sorted(degs):
        yield d, component(f, dict(zip(families, d)))


def element_norm(f: GrassmannElement, families: Sequence[str], geom: ColourGeometry, J, q: int,
                 improved: bool = False):
    """Combined (or improved) norm of a homogeneous element's coefficient function."""
    top = q - 2 if improved else q
    ps = list(range(1, top + 1, 2))
    if len(families) == 1:
        vals = antisymmetric_norms(f, families[0], geom, ps)
    else:
        vals = seminorms(element_entries(f, families), ps, geom)
    inv = 1 / J
    return sum(vals[p] * inv ** ((p - 1) // 2) for p in ps)


def N_alpha(f: GrassmannElement, alpha, consts: IntegrationConstants, geom: ColourGeometry,
            families: Sequence[str] = ("psi",), improved: bool = False, q: int = 5):
    """(c / b^2) sum_n alpha^|n| b^|n| ||f_n||; the constant part does not enter."""
    total = 0
    for d, piece in _grade_pieces(f, families):
        n = sum(d)
        if n == 0:
            continue
        total = total + alpha ** n * consts.b_power(n) * element_norm(piece, families, geom, consts.J, q, improved)
    if total == 0:
        return total
    return consts.c * total / consts.b_sq


# fuzzing of the configuration axioms


def estimate_J(samples: Sequence[np.ndarray], geom: ColourGeometry, q: int = 5) -> float:
    """Smallest J with ||t||_p <= J^{(p-1)/2} ||t||_1 over the sample, for odd 3 <= p <= q."""
    if not samples:
        raise ValueError("empty sample")
    best = 0.0
    for t in samples:
        vals = seminorms(t, range(1, q + 1, 2), geom)
        base = vals[1]
        if base == 0:
            continue
        for p in range(3, min(q, t.ndim) + 1, 2):
            ratio = float(vals[p]) / float(base)
            best = max(best, ratio ** (2.0 / (p - 1)))
    return best


def _odd_splits(total: int):
    return [(p1, total - p1) for p1 in range(1, total, 2) if (total - p1) % 2 == 1]


def _random_tensor(rng: random.Random, n_sites: int, rank: int, density: float, exact: bool,
                   lo: int = -3, hi: int = 3):
    vals = [rng.randint(lo, hi) if rng.random() < density else 0 for _ in range(n_sites ** rank)]
    if exact:
        return np.array([gmpy2.mpq(v) for v in vals], dtype=object).reshape((n_sites,) * rank)
    return np.array(vals, dtype=float).reshape((n_sites,) * rank)


@dataclass
class CheckTally:
    checks: int = 0
    violations: int = 0
    worst_ratio: float = 0.0
    worst_case: dict = field(default_factory=dict)
    rel_slack: float = 0.0

    def record(self, lhs, rhs, case: dict):
        self.checks += 1
        if lhs > (rhs * (1 + self.rel_slack) if self.rel_slack else rhs):
            self.violations += 1
        if rhs > 0:
            r = float(lhs) / float(rhs)
        else:
            r = 0.0 if lhs == 0 else math.inf
        if r > self.worst_ratio:
            self.worst_ratio = r
            self.worst_case = case

    def as_dict(self) -> dict:
        return {"checks": self.checks, "violations": self.violations,
                "worst_ratio": self.worst_ratio, "worst_case": self.worst_case}



def verify_configuration(C: Covariance, D: Covariance, consts: IntegrationConstants, geom: ColourGeometry,
                         trials: int = 100, ranks: Sequence[int] = (3, 4, 5), q: int = 5,
                         seed: int = 0, density: float = 0.6, rel_slack: float = 0.0) -> dict:
    """Fuzz the simple and triple contraction estimates and the integral bound.

    Random tensors have small integer entries; arithmetic follows the mode of C.
    ``rel_slack`` loosens comparisons for float runs only.
    """
    rng = random.Random(seed)
    n_sites = geom.n_sites
    exact = C.exact
    simple, triple, integral = (CheckTally(rel_slack=rel_slack) for _ in range(3))
    b4c = consts.b_sq ** 2 * consts.c
    moments = {}
    for _ in range(trials):
        n, n2 = rng.choice(ranks), rng.choice(ranks)
        f = _random_tensor(rng, n_sites, n, density, exact)
        g = _random_tensor(rng, n_sites, n2, density, exact)
        nf = seminorms(f, range(1, q + 1, 2), geom)
        ng = seminorms(g, range(1, q + 1, 2), geom)

        i, j = rng.randrange(n), rng.randrange(n2)
        res = contract_pair(f, g, [i], [j], [C])
        rank = res.ndim
        if rank:
            vals = seminorms(res, range(1, q + 1, 2), geom)
            for p in range(1, min(q, rank) + 1, 2):
                rhs = consts.c * sum(nf[a] * ng[b] for a, b in _odd_splits(p + 1) if a <= q and b <= q)
                simple.record(vals[p], rhs, {"n": n, "n2": n2, "i": i, "j": j, "p": p})

        if n >= 3 and n2 >= 3:
            iis = rng.sample(range(n), 3)
            jjs = rng.sample(range(n2), 3)
            cv = [C, rng.choice([C, D]), rng.choice([C, D])]
            res = contract_pair(f, g, iis, jjs, cv)
            rank = res.ndim
            if rank:
                vals = seminorms(res, range(1, q + 1, 2), geom)
                for p in range(1, min(q - 2, rank) + 1, 2):
                    rhs = b4c * sum(nf[a] * ng[b] for a, b in _odd_splits(p + 3) if a <= q and b <= q)
                    triple.record(vals[p], rhs, {"n": n, "n2": n2, "i": iis, "j": jjs, "p": p,
                                                 "covs": ["C" if c is C else "D" for c in cv]})

        for k in (2, 4):
            if k >= n:
                continue
            for name, cov in (("C", C), ("D", D)):
                key = (name, k)
                if key not in moments:
                    moments[key] = moment_tensor(cov, k)
                res = np.tensordot(moments[key], f, axes=(list(range(k)), list(range(k))))
                vals = seminorms(res, range(1, q + 1, 2), geom)
                scale = (consts.b_sq / 4) ** (k // 2)
                for p in range(1, min(q, res.ndim) + 1, 2):
                    integral.record(vals[p], scale * nf[p], {"n": n, "k": k, "cov": name, "p": p})
    report = {"simple": simple.as_dict(), "triple": triple.as_dict(), "integral": integral.as_dict()}
    report["passed"] = all(v["violations"] == 0 for v in report.values())
    return report


def moment_bound_check(cov: Covariance, b_sq, max_degree: int = 8) -> dict:
    """|moment of any m distinct generators| <= (b/2)^m, compared through squares."""
    n = len(cov.sites)
    worst = 0.0
    violations = 0
    checks = 0
    quarter = gmpy2.mpq(b_sq) / 4 if cov.exact else float(b_sq) / 4
    for m in range(2, min(max_degree, n) + 1, 2):
        bound_sq = quarter ** m
        for subset in itertools.combinations(range(n), m):
            mom = cov.moment(subset)
            checks += 1
            sq = mom * mom
            if sq > bound_sq:
                violations += 1
            if bound_sq:
                worst = max(worst, math.sqrt(float(sq / bound_sq)))
    return {"checks": checks, "violations": violations, "worst_ratio": worst}
