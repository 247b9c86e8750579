"""The renormalization-group map, the Schwinger functional and the
ladder-subtracted four-point part.

All maps act on a single external family (default ``psi``). The shift
psi -> psi + xi followed by integration over xi is evaluated with
:func:`convolve`, which equals split_field + integrate but needs no auxiliary
family. Since the shift is an algebra homomorphism,
exp(V)(psi + xi) = exp(V(psi + xi)), so the exponential is taken before
shifting, in the smaller algebra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np

from .algebra import GrassmannElement, degree_component, exp_even, log_near_one
from .gaussian import Covariance, convolve, integrate, unwick, wick_order
from .ladders import (
    PSI,
    Gr,
    HypothesisError,
    kernel_of,
    ladder_coefficient,
    ladder_series_kernels,
    standard_bubble,
)


class DegenerateNormalizationError(ZeroDivisionError):
    pass


@dataclass
class RgResult:
    Wprime: GrassmannElement
    components: dict[int, GrassmannElement]
    logZ: float
    Z: object
    ladder_sum: GrassmannElement | None = None
    g: GrassmannElement | None = None
    truncation: dict = field(default_factory=dict)


def _split_constant(f: GrassmannElement):
    c = f.constant
    return c, f - c if c else f


def inverse(g: GrassmannElement) -> GrassmannElement:
    """Multiplicative inverse of an even element with nonzero constant term."""
    c = g.constant
    if c == 0:
        raise DegenerateNormalizationError("constant term vanishes")
    n = (g - c) / c
    total = g.space.one(g.exact)
    power = total
    k = 0
    while True:
        k += 1
        power = power * n
        if not power:
            break
        total = total + (power if k % 2 == 0 else -power)
    return total / c


def schwinger(U: GrassmannElement, cov: Covariance, f: GrassmannElement, family: str) -> GrassmannElement:
    """S(f) = (1/Z) int f e^U dmu_cov with Z = int e^U dmu_cov.

    A constant in U cancels between numerator and Z, so it is dropped first.
    """
    if not U.is_even():
        raise ValueError("U must be even")
    _, U0 = _split_constant(U)
    eU = exp_even(U0)
    Z = integrate(eU, family, cov)
    if Z.constant == 0:
        raise DegenerateNormalizationError("int e^U dmu has zero constant term")
    return inverse(Z) * integrate(f * eU, family, cov)


def plain_rg_map(W: GrassmannElement, C: Covariance, family: str = PSI) -> GrassmannElement:
    """log (1/Z) int e^{W(psi + xi)} dmu_C(xi), with no Wick ordering."""
    _, W0 = _split_constant(W)
    G = convolve(exp_even(W0), family, C)
    Z = G.constant
    if Z == 0:
        raise DegenerateNormalizationError("normalization vanishes")
    return log_near_one(G / Z)


def _log_abs(x) -> float:
    if x == 0:
        return -math.inf
    if isinstance(x, float):
        return math.log(abs(x))
    x = gmpy2.mpq(x)
    return math.log(abs(int(x.numerator))) - math.log(int(x.denominator))


def omega(W: GrassmannElement, C: Covariance, D: Covariance, family: str = PSI) -> RgResult:
    """W' with :W':_D = Omega_C(:W:_{C+D}); constants of W' are dropped and reported as log Z."""
    if not W.is_even():
        raise ValueError("W must be even")
    V = wick_order(W, family, C + D)
    v0, V0 = _split_constant(V)
    G = convolve(exp_even(V0), family, C)
    Z = G.constant
    if Z == 0:
        raise DegenerateNormalizationError("normalization vanishes")
    Om = log_near_one(G / Z)
    Wp = unwick(Om, family, D)
    Wp = Wp - Wp.constant
    # Z itself is kept exactly; logZ is log|Z| so a negative Z stays representable
    logZ = float(v0) + _log_abs(Z)
    comps = {}
    for n in sorted(Wp.grades()):
        comps[n] = degree_component(Wp, family, n)
    return RgResult(Wprime=Wp, components=comps, logZ=logZ, Z=Z)


def kernel_size(t: np.ndarray):
    """Max absolute entry, used as a cheap operator-size proxy for truncation."""
    return max((abs(v) for v in t.flat), default=0)


def ladder_sum(f: np.ndarray, C: Covariance, D: Covariance, r_max: int = 12, tol: float = 1e-12):
    """Kernel of sum_{r <= r_max} L_r together with the truncation data.

    Exact kernels stop early only when a term is exactly zero; float kernels
    stop once a term's max entry drops below ``tol`` times the first term's.
    """
    exact = f.dtype == object
    bub = standard_bubble(C, D)
    total = None
    used = 0
    first = None
    reason = "r_max"
    for r, term in ladder_series_kernels(f, bub, r_max):
        c = ladder_coefficient(r)
        piece = term * (c if exact else float(c))
        size = kernel_size(piece)
        if exact and size == 0:
            reason = "exact_zero"
            break
        total = piece if total is None else total + piece
        used = r
        if not exact:
            first = size if first is None else first
            if first == 0 or size <= tol * first:
                reason = "tol"
                break
    if total is None:
        total = f * 0
    return total, {"radius": used, "r_max": r_max, "stop": reason, "tol": None if exact else tol}


def ladder_subtracted_fourpoint(W: GrassmannElement, C: Covariance, D: Covariance, r_max: int = 12,
                                tol: float = 1e-12, family: str = PSI, result: RgResult | None = None) -> RgResult:
    """g = W'_4 - W_4 - 1/2 sum_{r=1}^{r_max} L_r(W_4)."""
    if degree_component(W, family, 2):
        raise HypothesisError("W has a nonzero two-point part; the ladder subtraction requires W_2 = 0")
    res = result if result is not None else omega(W, C, D, family)
    W4 = degree_component(W, family, 4)
    f = kernel_of(W4, family) if W4 else None
    if f is None:
        n = len(W.space.sites(family))
        f = np.zeros((n,) * 4, dtype=object if W.exact else float)
        if W.exact:
            f.fill(gmpy2.mpq(0))
    total, info = ladder_sum(f, C, D, r_max, tol)
    L = Gr(W.space, family, total, W.exact)
    half = gmpy2.mpq(1, 2) if W.exact else 0.5
    Wp4 = res.components.get(4, W.space.zero(W.exact))
    res.ladder_sum = L
    res.g = Wp4 - W4 - L.scale(half)
    res.truncation = info
    return res
