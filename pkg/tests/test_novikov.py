import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinortheta.novikov import (CohomologyClassXi, FilteredComplex,
                                 Generator, NovikovSeries, WindowError,
                                 betti_torsion_from_complex, boundary_apply,
                                 chain_level, complex_from_json,
                                 complex_to_json, fixed_point_bound,
                                 monodromy, monomial, nov_add, nov_mul,
                                 nov_neg, nov_one, spectral_rho)

CUT = -6.0

dyadic = st.integers(-24, 24).map(lambda k: k / 4.0)
dyadic_neg = st.integers(-20, 0).map(lambda k: k / 4.0)


def series_strategy(exponents=dyadic):
    pairs = st.tuples(exponents, st.integers(-5, 5))
    return st.lists(pairs, max_size=5).map(
        lambda ts: NovikovSeries(tuple(ts), CUT))


def test_series_canonical_form():
    s = NovikovSeries(((1.0, 2), (0.5, 0), (1.0, -2), (-7.0, 3), (0.0, 4)),
                      CUT)
    assert s.terms == ((0.0, 4),)
    assert NovikovSeries((), CUT).is_zero
    with pytest.raises(ValueError):
        NovikovSeries(((0.0, 1.5),), CUT)


def test_series_shift_and_truncate():
    s = NovikovSeries(((0.0, 1), (-2.0, 3)), -4.0)
    assert s.shift(1.5).terms == ((1.5, 1), (-0.5, 3))
    assert s.truncated(-1.0).terms == ((0.0, 1),)


@given(series_strategy())
def test_mul_unit(a):
    assert nov_mul(a, nov_one(CUT)) == a
    assert nov_mul(nov_one(CUT), a) == a


@given(series_strategy(), series_strategy())
def test_commutativity(a, b):
    assert nov_add(a, b) == nov_add(b, a)
    assert nov_mul(a, b) == nov_mul(b, a)


@given(series_strategy(), series_strategy(), series_strategy())
def test_distributivity(a, b, c):
    assert nov_mul(a, nov_add(b, c)) == nov_add(nov_mul(a, b),
                                                nov_mul(a, c))


@given(series_strategy(dyadic_neg), series_strategy(dyadic_neg),
       series_strategy(dyadic_neg))
def test_associativity_descending(a, b, c):
    # with nonpositive exponents nothing truncated can ever resurface
    assert nov_mul(nov_mul(a, b), c) == nov_mul(a, nov_mul(b, c))
    assert nov_add(nov_add(a, b), c) == nov_add(a, nov_add(b, c))


def test_geometric_series_window():
    cutoff = -10.5
    a = NovikovSeries(((0.0, 1), (-1.0, -1)), cutoff)
    geo = NovikovSeries(tuple((-float(k), 1) for k in range(11)), cutoff)
    assert nov_mul(a, geo) == nov_one(cutoff)


def test_monodromy_weights():
    xi = CohomologyClassXi(np.array([0.5, 1.0]))
    assert monodromy(xi, (0, 0)).terms == ((0.0, 1),)
    assert monodromy(xi, (1, 2)).terms == ((2.5, 1),)
    assert not xi.integral
    assert CohomologyClassXi(np.array([2.0, -1.0])).integral
    with pytest.raises(ValueError):
        CohomologyClassXi(np.array([0.5]), integral=True)
    with pytest.raises(ValueError):
        xi.pairing((1,))


def test_monodromy_homomorphism():
    rng = np.random.default_rng(7)
    xi = CohomologyClassXi(np.array([0.5, -1.25, 3.0]))
    for _ in range(25):
        g = rng.integers(-4, 5, 3)
        h = rng.integers(-4, 5, 3)
        assert monodromy(xi, g + h) == nov_mul(monodromy(xi, g),
                                               monodromy(xi, h))


def two_generator_complex(cutoff=-10.0):
    # one 1-cell whose boundary cancels the higher 0-generator
    degrees = ((Generator("x", 2.0), Generator("y", 0.0)),
               (Generator("e", 2.0),))
    boundaries = {("e", "x"): nov_one(cutoff),
                  ("e", "y"): nov_neg(nov_one(cutoff))}
    return FilteredComplex(degrees, boundaries, cutoff)


def test_complex_validation():
    cutoff = -8.0
    with pytest.raises(ValueError, match="duplicate"):
        FilteredComplex(((Generator("x", 0.0), Generator("x", 1.0)),),
                        {}, cutoff)
    with pytest.raises(ValueError, match="unknown"):
        FilteredComplex(((Generator("x", 0.0),),),
                        {("e", "x"): nov_one(cutoff)}, cutoff)
    with pytest.raises(ValueError, match="degree"):
        FilteredComplex(((Generator("x", 0.0),), (Generator("e", 0.0),),
                         (Generator("f", 0.0),)),
                        {("f", "x"): nov_one(cutoff)}, cutoff)
    with pytest.raises(ValueError, match="level"):
        FilteredComplex(((Generator("x", 0.0),), (Generator("e", 0.0),)),
                        {("e", "x"): monomial(2.5, 1, cutoff)}, cutoff)
    with pytest.raises(ValueError, match="square"):
        FilteredComplex(((Generator("v", 0.0),), (Generator("e", 0.0),),
                         (Generator("f", 0.0),)),
                        {("f", "e"): nov_one(cutoff),
                         ("e", "v"): nov_one(cutoff)}, cutoff)


def test_boundary_apply_and_square():
    cutoff = -8.0
    degrees = ((Generator("v", 0.0),),
               (Generator("e1", 0.0), Generator("e2", 0.0)),
               (Generator("f", 0.0),))
    boundaries = {("f", "e1"): nov_one(cutoff),
                  ("f", "e2"): nov_neg(nov_one(cutoff)),
                  ("e1", "v"): nov_one(cutoff),
                  ("e2", "v"): nov_one(cutoff)}
    C = FilteredComplex(degrees, boundaries, cutoff)
    image = boundary_apply(C, {"f": nov_one(cutoff)})
    assert set(image) == {"e1", "e2"}
    assert boundary_apply(C, image) == {}


def test_chain_level_examples():
    C = two_generator_complex()
    one = nov_one(C.cutoff)
    assert chain_level(C, {"y": one}) == 0.0
    assert chain_level(C, {"x": monomial(-2.0, 1, C.cutoff)}) == 0.0
    assert chain_level(C, {"x": monomial(-3.0, 5, C.cutoff),
                           "y": monomial(0.5, 1, C.cutoff)}) == 0.5
    assert chain_level(C, {}) == -math.inf
    # a generator of level 1.0 carrying t^{-2} sits at level -1.0
    D = FilteredComplex(((Generator("z", 1.0),),), {}, C.cutoff)
    assert chain_level(D, {"z": monomial(-2.0, 1, C.cutoff)}) == -1.0


def test_rho_zero_boundary_is_chain_level():
    cutoff = -10.0
    C = FilteredComplex(((Generator("x", 1.5), Generator("y", 0.25)),),
                        {}, cutoff)
    a = {"x": monomial(0.5, 2, cutoff)}
    assert spectral_rho(C, a) == chain_level(C, a) == 2.0


def test_rho_drops_to_second_level():
    C = two_generator_complex()
    one = nov_one(C.cutoff)
    rho, (name, gamma) = spectral_rho(C, {"x": one}, return_witness=True)
    assert rho == 0.0
    assert (name, gamma) == ("y", 0.0)
    assert C.level_of(name) + gamma == rho


def test_rho_shift_equivariance_exact():
    C = two_generator_complex()
    base = spectral_rho(C, {"x": nov_one(C.cutoff)})
    for gamma in (0.75, -1.5, 2.0, -3.25):
        shifted = spectral_rho(C, {"x": monomial(gamma, 1, C.cutoff)})
        assert shifted == base + gamma


def test_rho_non_archimedean():
    C = two_generator_complex()
    rng = np.random.default_rng(5)

    def random_chain():
        chain = {}
        for name in ("x", "y"):
            terms = tuple((k / 2.0, int(c)) for k, c in
                          zip(rng.integers(-6, 7, 3), rng.integers(-3, 4, 3)))
            s = NovikovSeries(terms, C.cutoff)
            if not s.is_zero:
                chain[name] = s
        return chain

    def rho_or_bottom(chain):
        if not chain:
            return -math.inf
        try:
            return spectral_rho(C, chain)
        except WindowError:
            return -math.inf

    for _ in range(25):
        a, b = random_chain(), random_chain()
        total = {}
        for name in set(a) | set(b):
            s = nov_add(a.get(name, NovikovSeries((), C.cutoff)),
                        b.get(name, NovikovSeries((), C.cutoff)))
            if not s.is_zero:
                total[name] = s
        assert rho_or_bottom(total) <= max(rho_or_bottom(a),
                                           rho_or_bottom(b)) + 1e-12


def test_rho_rejects_non_cycles_and_boundaries():
    C = two_generator_complex()
    one = nov_one(C.cutoff)
    with pytest.raises(ValueError, match="cycle"):
        spectral_rho(C, {"e": one})
    with pytest.raises(WindowError):
        spectral_rho(C, {"x": one, "y": nov_neg(one)})


def circle_complex(boundary, cutoff, e_level=0.0):
    degrees = ((Generator("v", 0.0),), (Generator("e", e_level),))
    entries = {("e", "v"): boundary} if not boundary.is_zero else {}
    return FilteredComplex(degrees, entries, cutoff)


def test_circle_nonzero_class_kills_homology():
    cutoff = -8.0
    down = NovikovSeries(((0.0, 1), (-2.5, -1)), cutoff)
    b, q = betti_torsion_from_complex(circle_complex(down, cutoff))
    assert (b, q) == ([0, 0], [0, 0])
    # positive period, built from the monodromy weight of the loop
    xi = CohomologyClassXi(np.array([2.5]))
    up = nov_add(nov_one(cutoff), nov_neg(monodromy(xi, (1,), cutoff)))
    b, q = betti_torsion_from_complex(circle_complex(up, cutoff, 2.5))
    assert (b, q) == ([0, 0], [0, 0])


def test_circle_zero_class_ordinary_homology():
    cutoff = -8.0
    zero = NovikovSeries((), cutoff)
    b, q = betti_torsion_from_complex(circle_complex(zero, cutoff))
    assert (b, q) == ([1, 1], [0, 0])


def test_empty_complex():
    assert betti_torsion_from_complex(FilteredComplex((), {}, -5.0)) \
        == ([], [])


def test_torsion_counts():
    cutoff = -10.0
    b, q = betti_torsion_from_complex(
        circle_complex(monomial(0.0, 2, cutoff), cutoff))
    assert (b, q) == ([0, 0], [1, 0])
    tail = NovikovSeries(((0.0, 2), (-1.0, 1)), cutoff)
    b, q = betti_torsion_from_complex(circle_complex(tail, cutoff))
    assert (b, q) == ([0, 0], [1, 0])


def diag_complex(d1, d2, cutoff):
    degrees = ((Generator("v1", 0.0), Generator("v2", 0.0)),
               (Generator("e1", 0.0), Generator("e2", 0.0)))
    return FilteredComplex(degrees, {("e1", "v1"): d1, ("e2", "v2"): d2},
                           cutoff)


def test_divisor_chain_is_enforced():
    cutoff = -10.0
    C = diag_complex(monomial(0.0, 2, cutoff), monomial(0.0, 3, cutoff),
                     cutoff)
    # diag(2, 3) presents one torsion generator, not two
    assert betti_torsion_from_complex(C) == ([0, 0], [1, 0])
    D = diag_complex(monomial(0.0, 2, cutoff),
                     NovikovSeries(((0.0, 2), (-1.0, 1)), cutoff), cutoff)
    # a unit combination hides in the tails: still one generator
    assert betti_torsion_from_complex(D) == ([0, 0], [1, 0])


def test_window_instability_is_reported():
    cutoff = -5.5
    degrees = ((Generator("v1", 0.0), Generator("v2", 0.0)),
               (Generator("e1", 0.0), Generator("e2", 0.0)))
    boundaries = {("e1", "v1"): monomial(0.0, 2, cutoff),
                  ("e2", "v1"): monomial(-5.0, 1, cutoff),
                  ("e2", "v2"): monomial(0.0, 2, cutoff)}
    C = FilteredComplex(degrees, boundaries, cutoff)
    with pytest.raises(WindowError, match="window"):
        betti_torsion_from_complex(C, margin=1.0)
    # deep window: the unit pivot is certified and one divisor remains
    wide = FilteredComplex(degrees, boundaries, -20.0)
    assert betti_torsion_from_complex(wide) == ([0, 0], [1, 0])


def test_enlarging_the_window_preserves_certified_answers():
    down = NovikovSeries(((0.0, 1), (-2.5, -1)), -8.0)
    for cutoff in (-8.0, -16.0, -32.0):
        C = circle_complex(down.truncated(cutoff) if cutoff > -8.0
                           else NovikovSeries(down.terms, cutoff), cutoff)
        assert betti_torsion_from_complex(C) == ([0, 0], [0, 0])
    for cutoff in (-10.0, -30.0):
        C = two_generator_complex(cutoff)
        assert spectral_rho(C, {"x": nov_one(cutoff)}) == 0.0


def test_fixed_point_bound_arithmetic():
    assert fixed_point_bound((1, 2, 1), (0, 1, 0)) == 6
    assert fixed_point_bound((0, 0, 0), (0, 0, 0)) == 0
    assert fixed_point_bound((2, 3, 4), (0, 0, 0)) == 9
    assert fixed_point_bound((0, 0, 0), (1, 1, 1)) == 5
    with pytest.raises(ValueError):
        fixed_point_bound((1, -1, 1), (0, 0, 0))
    with pytest.raises(ValueError):
        fixed_point_bound((1, 1), (0, 0))
    with pytest.raises(ValueError):
        fixed_point_bound((1, 2, 1), (0, 1))
    with pytest.raises(ValueError):
        fixed_point_bound((1.5, 0, 0), (0, 0, 0))


def test_json_round_trip():
    cutoff = -8.0
    down = NovikovSeries(((0.0, 1), (-2.5, -1)), cutoff)
    C = circle_complex(down, cutoff)
    text = complex_to_json(C)
    C2 = complex_from_json(text)
    assert complex_to_json(C2) == text
    assert betti_torsion_from_complex(C2) == ([0, 0], [0, 0])
