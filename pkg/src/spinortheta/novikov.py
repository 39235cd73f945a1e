"""Windowed Novikov ring arithmetic and half-infinite chain invariants.

Series sum n_i t^{gamma_i} with integer coefficients and real exponents
going down; a desk computation can only ever hold finitely many terms,
so every series carries a cutoff and all arithmetic silently truncates
below it.  On top of the ring sit filtered complexes whose generators
are critical values on a cyclic cover, the level filtration, the
spectral invariant rho obtained by pushing a cycle down through the
boundary image, and the Betti/torsion counts that enter the fixed
point bound.

Two elimination engines share the term-merging kernel.  Ranks and rho
work over the field obtained by inverting leading terms (geometric
expansion, truncated), with exact rational coefficients.  Torsion
counts need the integer structure, so they use a windowed Smith-type
normal form with unimodular operations only.  Every answer is
recomputed in a narrowed window; a disagreement raises instead of
returning a silently window-dependent number.

The fundamental group is taken abelian throughout: deck
transformations are integer vectors, and a cohomology class is its
period vector.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

__all__ = [
    "WindowError",
    "NovikovSeries",
    "monomial",
    "nov_one",
    "nov_neg",
    "nov_add",
    "nov_mul",
    "CohomologyClassXi",
    "monodromy",
    "Generator",
    "FilteredComplex",
    "boundary_apply",
    "chain_level",
    "spectral_rho",
    "betti_torsion_from_complex",
    "fixed_point_bound",
    "complex_to_json",
    "complex_from_json",
]

# cap on elementary elimination steps; real exponents can in principle
# generate very long descents inside a window
_MAX_STEPS = 20000


class WindowError(ArithmeticError):
    """The answer depends on terms at or below the cutoff."""


def _merge(dst, src, coeff, delta, pin=None):
    """dst + coeff * t^delta * src as sorted term lists.

    Terms are (exponent, coefficient) with exponents strictly
    decreasing.  When pin is given, the leading exponent of src is
    mapped to pin exactly instead of to lead + delta, so that the
    cancellation this call was made for is exact in floating point.
    """
    shifted = []
    for j, (g, c) in enumerate(src):
        e = pin if (pin is not None and j == 0) else g + delta
        shifted.append((e, coeff * c))
    out = []
    i = j = 0
    while i < len(dst) and j < len(shifted):
        gi, ci = dst[i]
        gj, cj = shifted[j]
        if gi > gj:
            out.append((gi, ci))
            i += 1
        elif gj > gi:
            out.append((gj, cj))
            j += 1
        else:
            s = ci + cj
            if s:
                out.append((gi, s))
            i += 1
            j += 1
    out.extend(dst[i:])
    out.extend(shifted[j:])
    return out


def _truncate(terms, cutoff):
    return [(g, c) for (g, c) in terms if g > cutoff]


@dataclass(frozen=True)
class NovikovSeries:
    """Finite window of a formal sum sum n_i t^{gamma_i}.

    Exponents are strictly decreasing reals, coefficients nonzero
    integers; everything at or below the cutoff has been dropped.
    """

    terms: tuple
    cutoff: float = -math.inf

    def __post_init__(self):
        merged: dict = {}
        for g, c in self.terms:
            g = float(g)
            if isinstance(c, float):
                if not c.is_integer():
                    raise ValueError("coefficients must be integers")
                c = int(c)
            elif not isinstance(c, (int, np.integer)):
                raise ValueError("coefficients must be integers")
            merged[g] = merged.get(g, 0) + int(c)
        clean = tuple(sorted(
            ((g, c) for g, c in merged.items() if c and g > self.cutoff),
            reverse=True))
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "cutoff", float(self.cutoff))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def leading(self):
        """(exponent, coefficient) of the top term, or None."""
        return self.terms[0] if self.terms else None

    def shift(self, delta: float) -> "NovikovSeries":
        return NovikovSeries(tuple((g + delta, c) for g, c in self.terms),
                             self.cutoff + delta)

    def truncated(self, cutoff: float) -> "NovikovSeries":
        return NovikovSeries(self.terms, max(self.cutoff, cutoff))


def monomial(gamma: float, coeff: int = 1,
             cutoff: float = -math.inf) -> NovikovSeries:
    return NovikovSeries(((float(gamma), coeff),), cutoff)


def nov_one(cutoff: float = -math.inf) -> NovikovSeries:
    return monomial(0.0, 1, cutoff)


def nov_neg(a: NovikovSeries) -> NovikovSeries:
    return NovikovSeries(tuple((g, -c) for g, c in a.terms), a.cutoff)


def nov_add(a: NovikovSeries, b: NovikovSeries) -> NovikovSeries:
    cutoff = max(a.cutoff, b.cutoff)
    return NovikovSeries(tuple(_merge(list(a.terms), list(b.terms), 1, 0.0)),
                         cutoff)


def nov_mul(a: NovikovSeries, b: NovikovSeries) -> NovikovSeries:
    cutoff = max(a.cutoff, b.cutoff)
    acc: list = []
    for g, c in a.terms:
        acc = _merge(acc, list(b.terms), c, g)
    return NovikovSeries(tuple(_truncate(acc, cutoff)), cutoff)


@dataclass(frozen=True)
class CohomologyClassXi:
    """A degree-one class on a torus-like space, as its period vector.

    periods[j] is the evaluation against the j-th basis loop of the
    first homology; integral records whether all periods are integers
    (the class of a circle-valued map).
    """

    periods: np.ndarray
    integral: bool = None

    def __post_init__(self):
        periods = np.atleast_1d(np.asarray(self.periods, dtype=float))
        if periods.ndim != 1:
            raise ValueError("periods must form a vector")
        near = bool(np.all(np.abs(periods - np.round(periods)) < 1e-9))
        if self.integral is None:
            object.__setattr__(self, "integral", near)
        elif self.integral and not near:
            raise ValueError("class declared integral but periods are not")
        object.__setattr__(self, "periods", periods)

    @property
    def rank(self) -> int:
        return self.periods.shape[0]

    def pairing(self, loop) -> float:
        loop = np.asarray(loop)
        if loop.shape != self.periods.shape:
            raise ValueError("loop vector has the wrong length")
        return float(np.dot(self.periods, loop))


def monodromy(xi: CohomologyClassXi, loop,
              cutoff: float = -math.inf) -> NovikovSeries:
    """Weight of a deck transformation, the single term t^<xi, loop>."""
    return monomial(xi.pairing(loop), 1, cutoff)


@dataclass(frozen=True)
class Generator:
    name: str
    level: float


@dataclass(frozen=True)
class FilteredComplex:
    """Free windowed complex with level-filtered generators.

    degrees[d] lists the generators of chain degree d; each carries
    the filtration value of its chosen representative on the cover.
    boundaries maps (from, to) generator names to series entries of
    the differential, which lowers degree by one.  The square of the
    differential must vanish inside the window, and no boundary term
    may raise the level.
    """

    degrees: tuple
    boundaries: Mapping
    cutoff: float

    def __post_init__(self):
        degrees = tuple(tuple(gens) for gens in self.degrees)
        index: dict = {}
        for d, gens in enumerate(degrees):
            for gen in gens:
                if gen.name in index:
                    raise ValueError(f"duplicate generator {gen.name!r}")
                index[gen.name] = (d, float(gen.level))
        entries: dict = {}
        for (frm, to), series in dict(self.boundaries).items():
            if frm not in index or to not in index:
                raise ValueError(f"boundary {frm!r} -> {to!r} references "
                                 "an unknown generator")
            if index[frm][0] != index[to][0] + 1:
                raise ValueError(f"boundary {frm!r} -> {to!r} must lower "
                                 "the degree by one")
            series = series.truncated(self.cutoff)
            if series.is_zero:
                continue
            lead = series.leading()
            if index[to][1] + lead[0] > index[frm][1] + 1e-9:
                raise ValueError(
                    f"boundary {frm!r} -> {to!r} raises the level: "
                    f"{index[to][1]} + {lead[0]} > {index[frm][1]}")
            entries[(frm, to)] = series
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "boundaries", entries)
        object.__setattr__(self, "cutoff", float(self.cutoff))
        object.__setattr__(self, "_index", index)
        self._check_square()

    def _check_square(self):
        for d in range(2, len(self.degrees)):
            for gen in self.degrees[d]:
                acc: dict = {}
                for mid in self.degrees[d - 1]:
                    s = self.boundaries.get((gen.name, mid.name))
                    if s is None:
                        continue
                    for low in self.degrees[d - 2]:
                        t = self.boundaries.get((mid.name, low.name))
                        if t is None:
                            continue
                        prod = nov_mul(s, t)
                        prev = acc.get(low.name)
                        acc[low.name] = prod if prev is None \
                            else nov_add(prev, prod)
                for low, series in acc.items():
                    if not series.is_zero:
                        raise ValueError(
                            f"differential does not square to zero in the "
                            f"window: {gen.name!r} -> {low!r}")

    @property
    def top_degree(self) -> int:
        return len(self.degrees) - 1

    def degree_of(self, name: str) -> int:
        return self._index[name][0]

    def level_of(self, name: str) -> float:
        return self._index[name][1]

    def restricted(self, cutoff: float) -> "FilteredComplex":
        """The same data seen through a narrower window."""
        return FilteredComplex(self.degrees, self.boundaries,
                               max(self.cutoff, cutoff))


def _chain_degree(C: FilteredComplex, chain: Mapping) -> int:
    degs = {C.degree_of(name) for name in chain}
    if len(degs) != 1:
        raise ValueError("chain must be homogeneous in one degree")
    return degs.pop()


def boundary_apply(C: FilteredComplex, chain: Mapping) -> dict:
    """Differential of a chain, as a generator -> series mapping."""
    out: dict = {}
    for name, series in chain.items():
        d = C.degree_of(name)
        if d == 0:
            continue
        for low in C.degrees[d - 1]:
            entry = C.boundaries.get((name, low.name))
            if entry is None:
                continue
            prod = nov_mul(series, entry)
            prev = out.get(low.name)
            acc = prod if prev is None else nov_add(prev, prod)
            if acc.is_zero:
                out.pop(low.name, None)
            else:
                out[low.name] = acc
    return out


def chain_level(C: FilteredComplex, chain: Mapping) -> float:
    """max of level + exponent over the support; -inf on zero chains."""
    best = -math.inf
    for name, series in chain.items():
        level = C.level_of(name)
        lead = series.truncated(C.cutoff).leading()
        if lead is not None:
            best = max(best, level + lead[0])
    return best


# -- field elimination ------------------------------------------------
#
# Vectors are dicts generator -> term list with Fraction coefficients.
# The valuation of a term (gamma, c) sitting on g is level(g) + gamma;
# a pivot is the generator attaining the maximal valuation, ties
# broken by name.


def _vec_from_chain(C, chain):
    vec = {}
    for name, series in chain.items():
        terms = [(g, Fraction(c)) for g, c in
                 series.truncated(C.cutoff).terms]
        if terms:
            vec[name] = terms
    return vec


def _vec_lead(C, vec):
    best = None
    for name, terms in vec.items():
        eff = C.level_of(name) + terms[0][0]
        if best is None or eff > best[0] or (eff == best[0]
                                             and name < best[1]):
            best = (eff, name)
    return best


def _cancel_at(C, vec, name, col, steps):
    """Remove the top term of vec at name using col (pivot there)."""
    gv, cv = vec[name][0]
    gp, cp = col[name][0]
    coeff = -cv / cp
    delta = gv - gp
    for g, terms in col.items():
        merged = _truncate(_merge(vec.get(g, []), terms, coeff, delta,
                                  pin=gv if g == name else None), C.cutoff)
        if merged:
            vec[g] = merged
        else:
            vec.pop(g, None)
    steps[0] += 1
    if steps[0] > _MAX_STEPS:
        raise WindowError("elimination did not stabilize; widen the cutoff")


def _divide(C, vec, basis, steps):
    """Clear every component of vec sitting on a basis pivot."""
    while True:
        target = None
        for name in vec:
            if name not in basis:
                continue
            eff = C.level_of(name) + vec[name][0][0]
            if target is None or eff > target[0] or (eff == target[0]
                                                     and name < target[1]):
                target = (eff, name)
        if target is None:
            return vec
        _cancel_at(C, vec, target[1], basis[target[1]], steps)


def _column_basis(C, degree):
    """Echelon basis of the boundary image in the given degree."""
    basis: dict = {}
    steps = [0]
    if degree + 1 >= len(C.degrees):
        return basis
    for gen in C.degrees[degree + 1]:
        chain = {}
        for low in C.degrees[degree]:
            entry = C.boundaries.get((gen.name, low.name))
            if entry is not None:
                chain[low.name] = entry
        vec = _divide(C, _vec_from_chain(C, chain), basis, steps)
        if not vec:
            continue
        pivot = _vec_lead(C, vec)[1]
        for other in list(basis):
            if pivot in basis[other]:
                _divide(C, basis[other], {pivot: vec}, steps)
        basis[pivot] = vec
    return basis


def _rho_once(C: FilteredComplex, a: Mapping, degree: int):
    basis = _column_basis(C, degree)
    steps = [0]
    vec = _divide(C, _vec_from_chain(C, a), basis, steps)
    if not vec:
        raise WindowError(
            "the class reduces to zero in the window: it is a boundary "
            "there, or the cutoff must be widened")
    eff, name = _vec_lead(C, vec)
    return eff, (name, vec[name][0][0])


def spectral_rho(C: FilteredComplex, a: Mapping, *, margin: float = 1.0,
                 return_witness: bool = False):
    """Least level in the homology class of the cycle a.

    Pivoted elimination over the field: the top of a is cancelled
    against the boundary image for as long as the window certifies
    it.  The result is the level of the reduced representative and
    is always attained by one of its terms, whose generator and
    exponent are reported as the witness.
    """
    degree = _chain_degree(C, a)
    remainder = boundary_apply(C, a)
    if any(not s.is_zero for s in remainder.values()):
        raise ValueError("a is not a cycle in the window")
    rho, witness = _rho_once(C, a, degree)
    if math.isfinite(C.cutoff) and margin > 0:
        narrowed = C.restricted(C.cutoff + margin)
        rho2, _ = _rho_once(narrowed,
                            {k: v.truncated(narrowed.cutoff)
                             for k, v in a.items()}, degree)
        if abs(rho - rho2) > 1e-9:
            raise WindowError(
                f"rho is window-sensitive ({rho} vs {rho2} after "
                f"narrowing by {margin}); widen the cutoff")
    return (rho, witness) if return_witness else rho


# -- integral normal form ---------------------------------------------
#
# Matrices over the windowed ring with integer coefficients, reduced
# by unimodular operations only.  Division happens on leading
# coefficients, with exponent alignment by unit monomials.


def _mat_sub(rows, i, k, q, delta, cutoff, pin_col=None, pin=None):
    # row_i -= q * t^delta * row_k
    for j in range(len(rows[i])):
        p = pin if j == pin_col else None
        rows[i][j] = _truncate(
            _merge(rows[i][j], rows[k][j], -q, delta, pin=p), cutoff)


def _snf_clear(rows, t, cutoff, steps, transpose):
    """Clear the pivot column (or row) below/right of the corner."""
    m = len(rows) if not transpose else len(rows[0])
    for i in range(t + 1, m):
        while True:
            entry = rows[i][t] if not transpose else rows[t][i]
            if not entry:
                break
            pivot = rows[t][t]
            gb, cb = entry[0]
            gp, cp = pivot[0]
            q = round(cb / cp)
            if q == 0:
                # strictly smaller leading coefficient: promote it
                if not transpose:
                    rows[i], rows[t] = rows[t], rows[i]
                else:
                    for row in rows:
                        row[i], row[t] = row[t], row[i]
                return True
            if not transpose:
                _mat_sub(rows, i, t, q, gb - gp, cutoff,
                         pin_col=t, pin=gb)
            else:
                cols = [[rows[r][c] for r in range(len(rows))]
                        for c in range(len(rows[0]))]
                _mat_sub(cols, i, t, q, gb - gp, cutoff,
                         pin_col=t, pin=gb)
                for c in range(len(cols)):
                    for r in range(len(rows)):
                        rows[r][c] = cols[c][r]
            steps[0] += 1
            if steps[0] > _MAX_STEPS:
                raise WindowError("normal form did not stabilize; "
                                  "widen the cutoff")
    return False


def _snf_diagonal(rows, cutoff):
    """Diagonalize by unimodular operations; returns the diagonal."""
    rows = [[list(e) for e in row] for row in rows]
    steps = [0]
    t = 0
    nr = len(rows)
    nc = len(rows[0]) if rows else 0
    while t < min(nr, nc):
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                if rows[i][j]:
                    key = (abs(rows[i][j][0][1]), -rows[i][j][0][0], i, j)
                    if best is None or key < best[0]:
                        best = (key, i, j)
        if best is None:
            break
        _, bi, bj = best
        rows[t], rows[bi] = rows[bi], rows[t]
        for row in rows:
            row[t], row[bj] = row[bj], row[t]
        while True:
            if _snf_clear(rows, t, cutoff, steps, transpose=False):
                continue
            if _snf_clear(rows, t, cutoff, steps, transpose=True):
                continue
            off = [i for i in range(t + 1, nr) if rows[i][t]]
            off += [j for j in range(t + 1, nc) if rows[t][j]]
            if not off:
                break
        t += 1
    return rows, [rows[i][i] for i in range(min(nr, nc)) if rows[i][i]]


def _divides(d, e, cutoff, steps):
    """Whether d divides e in the window (leading-term division)."""
    gp, cp = d[0]
    r = [list(x) for x in e]
    while r:
        gb, cb = r[0]
        if cb % cp:
            return False
        r = _truncate(_merge(r, d, -(cb // cp), gb - gp, pin=gb), cutoff)
        steps[0] += 1
        if steps[0] > _MAX_STEPS:
            raise WindowError("division did not stabilize; widen the cutoff")
    return True


def _elementary_divisors(rows, cutoff):
    """Windowed diagonal with the divisibility chain enforced."""
    if not rows or not rows[0]:
        return []
    _, diag = _snf_diagonal(rows, cutoff)
    steps = [0]
    for _ in range(100):
        diag.sort(key=lambda d: (abs(d[0][1]), -d[0][0]))
        bad = None
        for i in range(len(diag)):
            for j in range(i + 1, len(diag)):
                if not _divides(diag[i], diag[j], cutoff, steps):
                    bad = (i, j)
                    break
            if bad:
                break
        if bad is None:
            return diag
        i, j = bad
        zero: list = []
        coupled = [[diag[i], zero], [diag[j], diag[j]]]
        _, pair = _snf_diagonal(coupled, cutoff)
        diag[i:j + 1] = [pair[0]] + diag[i + 1:j] + pair[1:]
    raise WindowError("divisor chain did not stabilize; widen the cutoff")


def _boundary_rows(C, degree):
    """Matrix of the differential out of the given degree."""
    if degree == 0 or degree >= len(C.degrees):
        return []
    rows = []
    for gen in C.degrees[degree]:
        row = []
        for low in C.degrees[degree - 1]:
            entry = C.boundaries.get((gen.name, low.name))
            row.append(list(entry.terms) if entry is not None else [])
        rows.append(row)
    return rows


def _betti_torsion_once(C: FilteredComplex):
    top = len(C.degrees)
    divisors = {}
    for d in range(top + 1):
        rows = _boundary_rows(C, d)
        divisors[d] = _elementary_divisors(rows, C.cutoff) \
            if rows and rows[0] else []
    b, q = [], []
    for d in range(top):
        dim = len(C.degrees[d])
        rank_out = len(divisors[d])
        rank_in = len(divisors[d + 1]) if d + 1 <= top else 0
        b.append(dim - rank_out - rank_in)
        q.append(sum(1 for e in divisors.get(d + 1, [])
                     if abs(e[0][1]) > 1))
    return b, q


def betti_torsion_from_complex(C: FilteredComplex,
                               margin: float = 1.0) -> tuple:
    """Ranks and torsion generator counts of the windowed homology.

    b[d] is the free rank of H_d over the Novikov ring, q[d] the
    number of non-unit elementary divisors of the incoming boundary,
    which present the torsion part since the chain modules are free.
    The computation is repeated in a window narrowed by margin and
    any disagreement raises.
    """
    if not C.degrees:
        return [], []
    b, q = _betti_torsion_once(C)
    if math.isfinite(C.cutoff) and margin > 0:
        b2, q2 = _betti_torsion_once(C.restricted(C.cutoff + margin))
        if b != b2 or q != q2:
            raise WindowError(
                f"betti/torsion are window-sensitive: {(b, q)} vs "
                f"{(b2, q2)} after narrowing by {margin}; widen the cutoff")
    return b, q


def _count_list(values, label):
    out = []
    for x in values:
        if float(x) != int(x):
            raise ValueError(f"{label} must contain integers")
        out.append(int(x))
    return out


def fixed_point_bound(b, q) -> int:
    """sum b_i + 2 sum_{i>=1} q_i + q_0, the critical point estimate."""
    b = _count_list(b, "b")
    q = _count_list(q, "q")
    if len(b) != len(q):
        raise ValueError("b and q must have equal length")
    if len(b) % 2 == 0:
        raise ValueError("expected lengths 2n + 1")
    if any(x < 0 for x in b) or any(x < 0 for x in q):
        raise ValueError("negative counts are not allowed")
    return sum(b) + 2 * sum(q[1:]) + q[0]


def complex_to_json(C: FilteredComplex) -> str:
    doc = {
        "degrees": [{"gens": [{"name": g.name, "level": g.level}
                              for g in gens]}
                    for gens in C.degrees],
        "boundaries": [{"from": frm, "to": to,
                        "terms": [[g, c] for g, c in series.terms]}
                       for (frm, to), series in
                       sorted(C.boundaries.items())],
        "cutoff": C.cutoff,
    }
    return json.dumps(doc, sort_keys=True)


def complex_from_json(text: str) -> FilteredComplex:
    doc = json.loads(text)
    cutoff = float(doc["cutoff"])
    degrees = tuple(
        tuple(Generator(g["name"], float(g["level"]))
              for g in entry["gens"])
        for entry in doc["degrees"])
    boundaries = {
        (entry["from"], entry["to"]): NovikovSeries(
            tuple((float(g), int(c)) for g, c in entry["terms"]), cutoff)
        for entry in doc["boundaries"]}
    return FilteredComplex(degrees, boundaries, cutoff)
