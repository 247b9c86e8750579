import itertools
import math
import random

import gmpy2
import numpy as np
import pytest

from grassmann_rg.algebra import GrassmannElement
from grassmann_rg.gaussian import Covariance


def bubble_parity(seq):
    """Sort a copy by adjacent swaps and return (-1)**swaps."""
    s = list(seq)
    swaps = 0
    for i in range(len(s)):
        for j in range(len(s) - 1 - i):
            if s[j] > s[j + 1]:
                s[j], s[j + 1] = s[j + 1], s[j]
                swaps += 1
    return -1 if swaps % 2 else 1


def rand_q(rng, lo=-5, hi=5, den=3):
    return gmpy2.mpq(rng.randint(lo, hi), rng.randint(1, den))


def random_element(space, rng, nterms=6, degrees=None, exact=True):
    terms = {}
    n = space.size
    for _ in range(nterms):
        k = rng.choice(degrees) if degrees else rng.randint(0, min(n, 4))
        k = min(k, n)
        gens = rng.sample(range(n), k)
        m = 0
        for g in gens:
            m |= 1 << g
        terms[m] = rand_q(rng) if exact else rng.uniform(-1, 1)
    return GrassmannElement(space, terms, exact=exact)


def random_skew(n, rng, exact=True):
    a = np.zeros((n, n), dtype=object)
    for i in range(n):
        for j in range(i + 1, n):
            v = rand_q(rng) if exact else rng.uniform(-1, 1)
            a[i, j] = v
            a[j, i] = -v
    return a if exact else a.astype(float)


def random_cov(sites, rng, exact=True):
    return Covariance(random_skew(len(sites), rng, exact), sites, exact=exact)


def brute_pairing(seq, lookup):
    """Moment of an ordered generator sequence: signed sum over all permutations."""
    k = len(seq)
    if k % 2:
        return 0
    if k == 0:
        return 1
    total = 0
    for perm in itertools.permutations(range(k)):
        prod = 1
        for t in range(0, k, 2):
            prod *= lookup(seq[perm[t]], seq[perm[t + 1]])
            if prod == 0:
                break
        if prod:
            total += bubble_parity(perm) * prod
    return gmpy2.mpq(total, 2 ** (k // 2) * math.factorial(k // 2))


def brute_integrate(f, integrated_mask, lookup):
    """Reference integrator: move integrated generators to the front, parity by full sort."""
    out = {}
    for m, v in f.terms.items():
        seq = [g for g in range(f.space.size) if m >> g & 1]
        inside = [g for g in seq if integrated_mask >> g & 1]
        outside = [g for g in seq if not integrated_mask >> g & 1]
        pos = {g: i for i, g in enumerate(seq)}
        perm = [pos[g] for g in inside + outside]
        sign = bubble_parity(perm)
        mom = brute_pairing(inside, lookup)
        if mom:
            sm = 0
            for g in outside:
                sm |= 1 << g
            out[sm] = out.get(sm, 0) + sign * v * mom
    return GrassmannElement(f.space, out, exact=f.exact)


@pytest.fixture
def rng():
    return random.Random(20261016)


# acceptance lines, filled by test_acceptance and echoed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for tag in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[tag])
