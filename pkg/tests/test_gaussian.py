import itertools

import gmpy2
import numpy as np
import pytest
import sympy

from grassmann_rg.algebra import GeneratorSpace, GrassmannElement, split_field, set_to_zero, component
from grassmann_rg.gaussian import (
    Covariance,
    ValidationError,
    contract,
    contract_pair,
    convolve,
    integrate,
    integrate_product,
    moment_tensor,
    outer,
    pfaffian,
    unwick,
    wick_order,
)

from conftest import brute_integrate, brute_pairing, random_cov, random_element, random_skew, rand_q

Q = gmpy2.mpq


def test_pfaffian_small():
    c = Q(5, 3)
    assert pfaffian([[0, c], [-c, 0]]) == c
    a, b, cc, d, e, f = (Q(k) for k in (2, 3, 5, 7, 11, 13))
    m = [[0, a, b, cc], [-a, 0, d, e], [-b, -d, 0, f], [-cc, -e, -f, 0]]
    assert pfaffian(m) == a * f - b * e + cc * d
    assert pfaffian(np.zeros((3, 3), dtype=object)) == 0
    with pytest.raises(ValidationError):
        pfaffian([[0, 1], [1, 0]])


def test_pfaffian_squared_is_det(rng):
    for n in (2, 4, 6, 8):
        for _ in range(4):
            a = random_skew(n, rng)
            m = sympy.Matrix(n, n, lambda i, j: sympy.Rational(int(a[i, j].numerator), int(a[i, j].denominator)))
            pf = pfaffian(a)
            assert sympy.Rational(int(pf.numerator), int(pf.denominator)) ** 2 == m.det()


def test_pfaffian_matches_matching_sum(rng):
    for n in (2, 4, 6):
        a = random_skew(n, rng)
        assert pfaffian(a) == brute_pairing(list(range(n)), lambda i, j: a[i, j])


def test_covariance_validation():
    with pytest.raises(ValidationError):
        Covariance([[0, 1], [2, 0]])
    with pytest.raises(ValidationError):
        Covariance([[1, 0], [0, 1]])
    c = Covariance([[0, 1], [-1, 0]])
    assert (c + c).matrix[0, 1] == 2
    assert (c - c).is_zero()
    assert (-c).matrix[0, 1] == -1


def test_colour_diagonal():
    c = Covariance.colour_diagonal([[0, 2], [-2, 0]], ["r", "g"], ["a", "b"])
    assert c.sites == (("r", "a"), ("r", "b"), ("g", "a"), ("g", "b"))
    assert c.matrix[0, 1] == 2 and c.matrix[2, 3] == 2 and c.matrix[0, 3] == 0


def test_integrate_basic(rng):
    sp = GeneratorSpace([("xi", range(4))])
    cov = random_cov(range(4), rng)
    g = lambda i: sp.gen("xi", i)
    assert integrate(sp.one(), "xi", cov) == sp.one()
    assert integrate(g(0) * g(2), "xi", cov).constant == cov.matrix[0, 2]
    C = cov.matrix
    want = C[0, 1] * C[2, 3] - C[0, 2] * C[1, 3] + C[0, 3] * C[1, 2]
    assert integrate(g(0) * g(1) * g(2) * g(3), "xi", cov).constant == want
    assert integrate(g(1), "xi", cov) == 0


def _joint_lookup(space, covs):
    table = {}
    for fam, cov in covs.items():
        off = space.offset(fam)
        for i in range(len(cov.sites)):
            table[off + i] = (off, cov)

    def lookup(i, j):
        oi, c = table[i]
        oj, _ = table[j]
        return c.matrix[i - oi, j - oi] if oi == oj else 0
    return lookup


def test_spectator_signs_against_brute_force(rng):
    sp = GeneratorSpace([("psi", range(3)), ("xi", range(3)), ("zeta", range(2))])
    for _ in range(40):
        f = random_element(sp, rng, nterms=10, degrees=[2, 3, 4, 5, 6, 7, 8])
        covs = {"xi": random_cov(range(3), rng), "zeta": random_cov(range(2), rng)}
        mask = sp.mask_of(covs)
        assert integrate(f, covs) == brute_integrate(f, mask, _joint_lookup(sp, covs))
        single = {"xi": covs["xi"]}
        assert integrate(f, single) == brute_integrate(f, sp.family_mask("xi"), _joint_lookup(sp, single))


def test_integrate_product_matches_product(rng):
    sp = GeneratorSpace([("psi", range(3)), ("xi", range(3)), ("zeta", range(3))])
    for _ in range(40):
        a = random_element(sp, rng, nterms=8)
        b = random_element(sp, rng, nterms=8)
        covs = {"xi": random_cov(range(3), rng), "zeta": random_cov(range(3), rng)}
        assert integrate_product(a, b, covs) == integrate(a * b, covs)


def test_wick_examples(rng):
    sp = GeneratorSpace([("xi", range(4))])
    cov = random_cov(range(4), rng)
    g = lambda i: sp.gen("xi", i)
    assert wick_order(sp.one(), "xi", cov) == sp.one()
    assert wick_order(g(2), "xi", cov) == g(2)
    assert wick_order(g(0) * g(1), "xi", cov) == g(0) * g(1) - cov.matrix[0, 1]


def test_convolve_is_split_then_integrate(rng):
    sp = GeneratorSpace([("xi", range(4)), ("zeta", range(4)), ("eta", range(2))])
    for _ in range(20):
        f = set_to_zero(random_element(sp, rng, nterms=8, degrees=[1, 2, 3, 4, 5]), ["zeta"])
        cov = random_cov(range(4), rng)
        literal = integrate(split_field(f, "xi", ["xi", "zeta"]), "zeta", cov)
        assert convolve(f, "xi", cov) == literal


def test_wick_properties(rng):
    sp = GeneratorSpace([("xi", range(8))])
    for _ in range(10):
        cov = random_cov(range(8), rng)
        other = random_cov(range(8), rng)
        f = random_element(sp, rng, nterms=8, degrees=[0, 2, 3, 4, 6, 8])
        assert unwick(wick_order(f, "xi", cov), "xi", cov) == f
        assert wick_order(wick_order(f, "xi", cov), "xi", other) == wick_order(f, "xi", cov + other)
        assert integrate(wick_order(f, "xi", cov), "xi", cov) == component(f, {"xi": 0})


def test_wick_kills_all_nonconstant_moments(rng):
    sp = GeneratorSpace([("xi", range(8))])
    cov = random_cov(range(8), rng)
    for k in range(1, 9):
        for gens in itertools.combinations(range(8), k):
            m = GrassmannElement(sp, {sum(1 << g for g in gens): 1})
            assert integrate(wick_order(m, "xi", cov), "xi", cov) == 0


def test_mode_mixing_rejected(rng):
    sp = GeneratorSpace([("xi", range(2))])
    fcov = Covariance(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    with pytest.raises(TypeError):
        integrate(sp.gen("xi", 0), "xi", fcov)


def test_pinned_family_and_shape():
    sp = GeneratorSpace([("xi", range(2)), ("eta", range(3))])
    cov = Covariance([[0, 1], [-1, 0]], family="zeta")
    with pytest.raises(ValidationError):
        integrate(sp.gen("xi", 0), "xi", cov)
    with pytest.raises(ValueError):
        integrate(sp.gen("eta", 0), "eta", Covariance([[0, 1], [-1, 0]]))


def test_contract_examples(rng):
    cov = random_cov(range(3), rng)
    e = lambda i: np.array([Q(int(k == i)) for k in range(3)], dtype=object)
    assert contract(outer(e(0), e(2)), 0, 1, cov)[()] == cov.matrix[0, 2]
    z = np.zeros((3, 3, 3), dtype=object)
    assert not np.any(contract(z, 0, 2, cov) != 0)
    with pytest.raises(IndexError):
        contract(z, 0, 3, cov)


def test_triple_contraction_single_entries(rng):
    cov = random_cov(range(4), rng)
    C = cov.matrix
    f = np.zeros((4,) * 4, dtype=object)
    fp = np.zeros((4,) * 4, dtype=object)
    s, t = Q(2, 3), Q(-5, 7)
    f[0, 1, 2, 3] = s
    fp[2, 3, 0, 1] = t
    got = contract_pair(f, fp, [1, 2, 3], [0, 1, 2], [cov, cov, cov])
    want = np.zeros((4, 4), dtype=object)
    want[0, 1] = s * t * C[1, 2] * C[2, 3] * C[3, 0]
    assert want[0, 1] != 0
    assert np.all(got == want)
    # permuted slot lists pair different legs
    got = contract_pair(f, fp, [3, 1, 2], [0, 1, 2], [cov] * 3)
    assert got[0, 1] == s * t * C[3, 2] * C[1, 3] * C[2, 0]


def test_contract_pair_matches_outer_then_contract(rng):
    cov = random_cov(range(3), rng)
    f = np.array([rand_q(rng) for _ in range(27)], dtype=object).reshape(3, 3, 3)
    fp = np.array([rand_q(rng) for _ in range(9)], dtype=object).reshape(3, 3)
    direct = contract(outer(f, fp), 1, 4, cov)
    assert np.all(direct == contract_pair(f, fp, [1], [1], [cov]))


def test_moment_tensor(rng):
    cov = random_cov(range(4), rng)
    m2 = moment_tensor(cov, 2)
    assert np.all(m2 == cov.matrix)
    m4 = moment_tensor(cov, 4)
    assert m4[1, 0, 2, 3] == -cov.moment([0, 1, 2, 3])
