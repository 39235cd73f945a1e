"""Weyl algebra unit tests.

The independent oracle realises generators as differential operators
acting on exact sympy polynomials: a_j -> i x_j (multiplication),
b_j -> d/dx_j.  Every algebraic identity asserted here is checked
against that model, never against the package's own arithmetic.
"""

from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from spinortheta.weyl import (
    QC,
    WeylElement,
    ad_to_sp,
    gen_a,
    gen_b,
    is_sp,
    J0,
    omega0,
    oscillator_element,
    sp_to_weyl,
    weyl_commutator,
    weyl_mul,
)

X = sp.symbols("x0:4")


def op_apply(elem: WeylElement, expr):
    """Apply the differential-operator realisation of elem to expr."""
    n = elem.n
    out = sp.Integer(0)
    for (p, q), c in elem.terms.items():
        piece = expr
        for j in range(n):
            piece = sp.diff(piece, X[j], q[j]) if q[j] else piece
        for j in range(n):
            piece = (sp.I * X[j]) ** p[j] * piece
        out += sp.nsimplify(sp.Rational(c.re) + sp.I * sp.Rational(c.im)) * piece
    return sp.expand(out)


def poly_basis(n, deg):
    if n == 1:
        return [X[0] ** d for d in range(deg + 1)]
    basis = []
    for d0 in range(deg + 1):
        for d1 in range(deg + 1 - d0):
            basis.append(X[0] ** d0 * X[1] ** d1)
    return basis


def assert_same_operator(e1, e2, deg=6):
    for f in poly_basis(e1.n, deg):
        assert sp.simplify(op_apply(e1, f) - op_apply(e2, f)) == 0


# -- ground truth on the generators -----------------------------------

def test_commutator_a_b_is_minus_i():
    n = 1
    c = weyl_commutator(gen_a(n, 0), gen_b(n, 0))
    assert c == WeylElement.one(n) * QC(0, -1)
    # oracle: [i x, d/dx] f = i x f' - (x f)' i = -i f
    f = X[0] ** 3
    lhs = op_apply(gen_a(n, 0), op_apply(gen_b(n, 0), f)) - op_apply(
        gen_b(n, 0), op_apply(gen_a(n, 0), f))
    assert sp.simplify(lhs + sp.I * f) == 0


def test_cross_axis_generators_commute():
    n = 2
    assert weyl_commutator(gen_a(n, 0), gen_b(n, 1)) == WeylElement.zero(n)
    assert weyl_commutator(gen_a(n, 0), gen_a(n, 1)) == WeylElement.zero(n)
    assert weyl_commutator(gen_b(n, 0), gen_b(n, 1)) == WeylElement.zero(n)


def test_reorder_b_after_a():
    # b_j a_k = a_k b_j + i delta_jk
    n = 2
    for j in range(n):
        for k in range(n):
            prod = weyl_mul(gen_b(n, j), gen_a(n, k))
            expect = weyl_mul(gen_a(n, k), gen_b(n, j))
            if j == k:
                expect = expect + WeylElement.one(n) * QC(0, 1)
            assert prod == expect


def test_square_of_a_plus_b():
    n = 1
    s = gen_a(n, 0) + gen_b(n, 0)
    sq = weyl_mul(s, s)
    expect = (WeylElement.monomial(n, (2,), (0,))
              + WeylElement.monomial(n, (1,), (1,), 2)
              + WeylElement.monomial(n, (0,), (2,))
              + WeylElement.one(n) * QC(0, 1))
    assert sq == expect
    assert_same_operator(sq, expect)
    # and directly against the operator model
    f = X[0] ** 4
    twice = op_apply(s, op_apply(s, f))
    assert sp.simplify(twice - op_apply(sq, f)) == 0


def test_quadratic_bracket_example():
    # [a1 a1, a1 b1 + b1 a1] = -4i a1 a1
    n = 1
    q1 = WeylElement.monomial(n, (2,), (0,))
    q2 = weyl_mul(gen_a(n, 0), gen_b(n, 0)) + weyl_mul(gen_b(n, 0), gen_a(n, 0))
    assert weyl_commutator(q1, q2) == q1 * QC(0, -4)


def test_linear_commutator_reproduces_symplectic_form():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(1, 3))
        v = rng.integers(-3, 4, size=2 * n)
        w = rng.integers(-3, 4, size=2 * n)
        c = weyl_commutator(WeylElement.from_vector(v), WeylElement.from_vector(w))
        assert c == WeylElement.one(n) * QC(0, -int(omega0(v, w)))


# -- multiplication against the oracle --------------------------------

@st.composite
def small_elements(draw, n=1, max_deg=2, max_terms=3):
    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        p = tuple(draw(st.integers(0, max_deg)) for _ in range(n))
        q = tuple(draw(st.integers(0, max_deg)) for _ in range(n))
        re = draw(st.integers(-3, 3))
        im = draw(st.integers(-3, 3))
        terms[(p, q)] = QC(re, im)
    return WeylElement(n, terms)


@settings(max_examples=25, deadline=None)
@given(small_elements(), small_elements())
def test_product_matches_operator_composition(x, y):
    prod = weyl_mul(x, y)
    f = X[0] ** 5
    assert sp.simplify(op_apply(prod, f) - op_apply(x, op_apply(y, f))) == 0


@settings(max_examples=15, deadline=None)
@given(small_elements(max_deg=1), small_elements(max_deg=1), small_elements(max_deg=1))
def test_product_is_associative(x, y, z):
    assert weyl_mul(weyl_mul(x, y), z) == weyl_mul(x, weyl_mul(y, z))


# -- the sp(2n) dictionary --------------------------------------------

def _unit(n, j):
    e = [0] * n
    e[j] = 1
    return tuple(e)


def test_ad_table_small():
    # ad(a_j a_k) = -Y_jk, ad(b_j b_k) = Z_jk, ad(a_j b_k + b_k a_j) = 2 X_jk
    for n in (1, 2, 3):
        for j in range(n):
            for k in range(n):
                E = np.zeros((n, n), dtype=int)
                E[j, k] = 1
                S = E + E.T

                pj = [0] * n
                pj[j] += 1
                pj[k] += 1
                aa = WeylElement.monomial(n, tuple(pj), (0,) * n)
                Y = np.zeros((2 * n, 2 * n), dtype=int)
                Y[:n, n:] = S
                assert np.array_equal(ad_to_sp(aa).astype(object), (-Y).astype(object))

                bb = WeylElement.monomial(n, (0,) * n, tuple(pj))
                Z = np.zeros((2 * n, 2 * n), dtype=int)
                Z[n:, :n] = S
                assert np.array_equal(ad_to_sp(bb).astype(object), Z.astype(object))

                mixed = (weyl_mul(gen_a(n, j), gen_b(n, k))
                         + weyl_mul(gen_b(n, k), gen_a(n, j)))
                Xm = np.zeros((2 * n, 2 * n), dtype=int)
                Xm[:n, :n] = E
                Xm[n:, n:] = -E.T
                assert np.array_equal(ad_to_sp(mixed).astype(object), (2 * Xm).astype(object))


def test_ad_of_oscillator_is_minus_J0():
    for n in (1, 2):
        m = ad_to_sp(oscillator_element(n)).astype(float)
        assert np.array_equal(m, -J0(n))


def test_ad_is_a_lie_homomorphism():
    rng = np.random.default_rng(3)
    n = 2
    for _ in range(10):
        m1 = _random_sp(rng, n)
        m2 = _random_sp(rng, n)
        q1, q2 = sp_to_weyl(m1), sp_to_weyl(m2)
        lhs = ad_to_sp(weyl_commutator(q1, q2) * QC(0, -1)).astype(float)
        rhs = (ad_to_sp(q1).astype(float) @ ad_to_sp(q2).astype(float)
               - ad_to_sp(q2).astype(float) @ ad_to_sp(q1).astype(float))
        assert np.array_equal(lhs, rhs)


def _random_sp(rng, n):
    A = rng.integers(-2, 3, size=(n, n))
    B = rng.integers(-2, 3, size=(n, n))
    C = rng.integers(-2, 3, size=(n, n))
    B = B + B.T
    C = C + C.T
    m = np.zeros((2 * n, 2 * n), dtype=int)
    m[:n, :n] = A
    m[:n, n:] = B
    m[n:, :n] = C
    m[n:, n:] = -A.T
    return m


def test_sp_round_trip_exact():
    rng = np.random.default_rng(11)
    for n in (1, 2, 3, 4):
        for _ in range(5):
            m = _random_sp(rng, n)
            back = ad_to_sp(sp_to_weyl(m))
            assert np.array_equal(back.astype(object), m.astype(object))


def test_sp_to_weyl_rejects_non_sp():
    bad = np.eye(2)
    with pytest.raises(ValueError):
        sp_to_weyl(bad)


def test_sp_to_weyl_symmetrised_central_term():
    # (a b + b a)/2 = a b + i/2 in normal order
    m = np.zeros((2, 2), dtype=int)
    m[0, 0] = 1
    m[1, 1] = -1
    q = sp_to_weyl(m)
    assert q.coefficient((1,), (1,)) == QC(1)
    assert q.coefficient((0,), (0,)) == QC(0, Fraction(1, 2))


def test_is_sp_accepts_J0_and_shears():
    assert is_sp(J0(2))
    shear = np.eye(4)
    shear[:2, 2:] = [[1.0, 0.5], [0.5, -2.0]]
    assert is_sp(shear)
    assert not is_sp(np.diag([2.0, 1.0, 1.0, 1.0]))
