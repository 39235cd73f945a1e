"""Exact symplectic Weyl algebra in 2n generators.

The algebra W_n is generated by a_1..a_n, b_1..b_n subject to

    v w - w v = -i omega0(v, w) 1,

where omega0 is the standard symplectic form with omega0(a_j, b_k) =
delta_jk.  Elements are kept in normal order (all a's to the left of
all b's) with coefficients in the Gaussian rationals Q(i), so every
computation here is exact.  The quadratic part of W_n is a Lie algebra
isomorphic to sp(2n); `ad_to_sp` and `sp_to_weyl` realise the two
directions of that isomorphism.

Vectors in the underlying phase space R^{2n} are stored as length-2n
arrays laid out (x; y) = (a-coordinates; b-coordinates).
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "QC",
    "WeylElement",
    "gen_a",
    "gen_b",
    "weyl_mul",
    "weyl_commutator",
    "ad_to_sp",
    "sp_to_weyl",
    "oscillator_element",
    "omega0",
    "J0",
    "is_sp",
]


class QC:
    """A Gaussian rational re + im*i with exact Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, z) -> "QC":
        if isinstance(z, QC):
            return z
        if isinstance(z, (int, Fraction)):
            return cls(z, 0)
        if isinstance(z, complex):
            # only exact float components survive the round trip
            re, im = Fraction(z.real), Fraction(z.imag)
            return cls(re, im)
        raise TypeError(f"cannot coerce {type(z).__name__} to QC")

    def __add__(self, other):
        o = QC.coerce(other)
        return QC(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QC(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-QC.coerce(other))

    def __rsub__(self, other):
        return QC.coerce(other) + (-self)

    def __mul__(self, other):
        o = QC.coerce(other)
        return QC(self.re * o.re - self.im * o.im,
                  self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QC.coerce(other)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return QC((self.re * o.re + self.im * o.im) / d,
                  (self.im * o.re - self.re * o.im) / d)

    def conj(self) -> "QC":
        return QC(self.re, -self.im)

    def __eq__(self, other):
        try:
            o = QC.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __complex__(self):
        return float(self.re) + 1j * float(self.im)

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


QC_I = QC(0, 1)
QC_ONE = QC(1, 0)


def _merge(dst: dict, key: tuple, val: QC) -> None:
    acc = dst.get(key)
    acc = val if acc is None else acc + val
    if acc:
        dst[key] = acc
    else:
        dst.pop(key, None)


class WeylElement:
    """A finite Q(i)-combination of normal-ordered monomials a^p b^q.

    `terms` maps (p, q) with p, q in N^n to QC coefficients; the
    monomial a^p b^q stands for a_1^{p_1}..a_n^{p_n} b_1^{q_1}..b_n^{q_n}.
    Instances should be treated as immutable.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[tuple, object] | None = None):
        if n < 1:
            raise ValueError("need at least one pair of generators")
        self.n = n
        clean: dict[tuple, QC] = {}
        for (p, q), c in (terms or {}).items():
            p, q = tuple(p), tuple(q)
            if len(p) != n or len(q) != n:
                raise ValueError("exponent tuples must have length n")
            if any(e < 0 for e in p + q):
                raise ValueError("negative exponent")
            _merge(clean, (p, q), QC.coerce(c))
        self.terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "WeylElement":
        return cls(n, {})

    @classmethod
    def one(cls, n: int) -> "WeylElement":
        z = (0,) * n
        return cls(n, {(z, z): QC_ONE})

    @classmethod
    def monomial(cls, n: int, p: Iterable[int], q: Iterable[int], coeff=1) -> "WeylElement":
        return cls(n, {(tuple(p), tuple(q)): QC.coerce(coeff)})

    @classmethod
    def from_vector(cls, v) -> "WeylElement":
        """Linear element sum v_j a_j + v_{n+j} b_j; v may be complex."""
        v = np.asarray(v)
        if v.ndim != 1 or v.size % 2:
            raise ValueError("phase vector must have even length")
        n = v.size // 2
        terms: dict[tuple, QC] = {}
        for j in range(n):
            if v[j] != 0:
                _merge(terms, (_unit(n, j), (0,) * n), QC.coerce(complex(v[j])))
            if v[n + j] != 0:
                _merge(terms, ((0,) * n, _unit(n, j)), QC.coerce(complex(v[n + j])))
        return cls(n, terms)

    # -- ring structure -----------------------------------------------

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            _merge(out, k, c)
        return WeylElement(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return WeylElement(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, WeylElement):
            return weyl_mul(self, other)
        return WeylElement(self.n, {k: c * QC.coerce(other) for k, c in self.terms.items()})

    def __rmul__(self, other):
        # scalars commute with everything
        return self.__mul__(other)

    def _lift(self, other) -> "WeylElement":
        if isinstance(other, WeylElement):
            if other.n != self.n:
                raise ValueError("mixed generator counts")
            return other
        z = (0,) * self.n
        return WeylElement(self.n, {(z, z): QC.coerce(other)})

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            try:
                other = self._lift(other)
            except TypeError:
                return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    # -- inspection ---------------------------------------------------

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(p) + sum(q) for p, q in self.terms)

    def is_quadratic(self) -> bool:
        """True when every monomial has total degree exactly two."""
        return all(sum(p) + sum(q) == 2 for p, q in self.terms)

    def coefficient(self, p, q) -> QC:
        return self.terms.get((tuple(p), tuple(q)), QC())

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for (p, q) in sorted(self.terms, key=lambda k: (sum(k[0]) + sum(k[1]), k)):
            c = self.terms[(p, q)]
            mono = []
            for j, e in enumerate(p):
                if e:
                    mono.append(f"a{j + 1}" + (f"^{e}" if e > 1 else ""))
            for j, e in enumerate(q):
                if e:
                    mono.append(f"b{j + 1}" + (f"^{e}" if e > 1 else ""))
            lead = "*".join(mono) if mono else "1"
            bits.append(f"{c!r}*{lead}" if mono else f"{c!r}")
        return " + ".join(bits)


def _unit(n: int, j: int) -> tuple:
    e = [0] * n
    e[j] = 1
    return tuple(e)


def gen_a(n: int, j: int) -> WeylElement:
    """The generator a_j (0-based j) in W_n."""
    return WeylElement.monomial(n, _unit(n, j), (0,) * n)


def gen_b(n: int, j: int) -> WeylElement:
    """The generator b_j (0-based j) in W_n."""
    return WeylElement.monomial(n, (0,) * n, _unit(n, j))


def _reorder_axis(m: int, k: int):
    """Expand b^m a^k in normal order along one axis.

    Uses b a = a b + i repeatedly:
        b^m a^k = sum_t t! C(m,t) C(k,t) i^t a^{k-t} b^{m-t}.
    Yields (k - t, m - t, coeff) triples.
    """
    it = QC(1, 0)
    for t in range(min(m, k) + 1):
        c = Fraction(factorial(t) * comb(m, t) * comb(k, t))
        yield k - t, m - t, it * c
        it = it * QC_I


def weyl_mul(x: WeylElement, y: WeylElement) -> WeylElement:
    """Product in W_n, renormal-ordered exactly."""
    if x.n != y.n:
        raise ValueError("mixed generator counts")
    n = x.n
    out: dict[tuple, QC] = {}
    for (p1, q1), c1 in x.terms.items():
        for (p2, q2), c2 in y.terms.items():
            c12 = c1 * c2
            # move b^{q1} through a^{p2}, axis by axis
            parts = [list(_reorder_axis(q1[j], p2[j])) for j in range(n)]
            idx = [0] * n
            while True:
                coeff = c12
                p = list(p1)
                q = list(q2)
                for j in range(n):
                    ka, mb, cc = parts[j][idx[j]]
                    p[j] += ka
                    q[j] += mb
                    coeff = coeff * cc
                _merge(out, (tuple(p), tuple(q)), coeff)
                for j in range(n):
                    idx[j] += 1
                    if idx[j] < len(parts[j]):
                        break
                    idx[j] = 0
                else:
                    break
    return WeylElement(n, out)


def weyl_commutator(x: WeylElement, y: WeylElement) -> WeylElement:
    """Commutator x y - y x."""
    return weyl_mul(x, y) - weyl_mul(y, x)


def oscillator_element(n: int) -> WeylElement:
    """The harmonic element (1/2) sum_j (a_j^2 + b_j^2)."""
    half = Fraction(1, 2)
    acc = WeylElement.zero(n)
    for j in range(n):
        acc = acc + WeylElement.monomial(n, _scaled(n, j, 2), (0,) * n, half)
        acc = acc + WeylElement.monomial(n, (0,) * n, _scaled(n, j, 2), half)
    return acc


def _scaled(n: int, j: int, e: int) -> tuple:
    t = [0] * n
    t[j] = e
    return tuple(t)


# -- symplectic side ---------------------------------------------------

def J0(n: int) -> np.ndarray:
    """Standard complex structure [[0, I], [-I, 0]] on R^{2n}."""
    m = np.zeros((2 * n, 2 * n))
    m[:n, n:] = np.eye(n)
    m[n:, :n] = -np.eye(n)
    return m


def omega0(v, w) -> float | complex:
    """omega0(v, w) = <v_x, w_y> - <v_y, w_x>."""
    v = np.asarray(v)
    w = np.asarray(w)
    n = v.size // 2
    return v[:n] @ w[n:] - v[n:] @ w[:n]


def is_sp(m, tol: float = 1e-12) -> bool:
    """Check m^T J0 m = J0 to within tol."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0] // 2
    j = J0(n)
    return bool(np.max(np.abs(m.T @ j @ m - j)) <= tol)


def ad_to_sp(q: WeylElement):
    """Matrix of v -> -i [q, v] on span{a_1..a_n, b_1..b_n}.

    For quadratic q this lands in sp(2n); coefficients are returned as
    an object array of exact Fractions.  Raises if q fails to preserve
    the linear span (i.e. q is not quadratic plus central).
    """
    n = q.n
    quad = WeylElement(n, {k: c for k, c in q.terms.items() if sum(k[0]) + sum(k[1]) == 2})
    rest = WeylElement(n, {k: c for k, c in q.terms.items() if sum(k[0]) + sum(k[1]) != 2})
    if any(sum(p) + sum(qq) != 0 for p, qq in rest.terms):
        raise ValueError("ad is only defined for quadratic (plus central) elements")
    mat = np.empty((2 * n, 2 * n), dtype=object)
    mat[:] = Fraction(0)
    basis = [gen_a(n, j) for j in range(n)] + [gen_b(n, j) for j in range(n)]
    for col, v in enumerate(basis):
        w = weyl_commutator(quad, v) * QC(0, -1)
        for (p, qq), c in w.terms.items():
            d = sum(p) + sum(qq)
            if d != 1:
                raise ValueError("ad image left the linear span")
            if c.im != 0:
                raise ValueError("ad image has non-real coordinates")
            if sum(p) == 1:
                row = p.index(1)
            else:
                row = n + qq.index(1)
            mat[row, col] += c.re
    return mat


def sp_to_weyl(m) -> WeylElement:
    """Quadratic element with ad_to_sp(sp_to_weyl(m)) = m.

    m must be in sp(2n) for J0, i.e. m = [[A, B], [C, -A^T]] with B, C
    symmetric.  Entries may be Fractions or floats with exact binary
    representations; coefficients are formed exactly.
    """
    m = np.asarray(m)
    d = m.shape[0]
    if m.shape != (d, d) or d % 2:
        raise ValueError("need a square matrix of even size")
    n = d // 2
    A = m[:n, :n]
    B = m[:n, n:]
    C = m[n:, :n]
    D = m[n:, n:]

    def fr(x) -> Fraction:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, (int, np.integer)):
            return Fraction(int(x))
        return Fraction(float(x))

    for j in range(n):
        for k in range(n):
            if fr(B[j, k]) != fr(B[k, j]) or fr(C[j, k]) != fr(C[k, j]):
                raise ValueError("off-diagonal blocks must be symmetric")
            if fr(D[j, k]) != -fr(A[k, j]):
                raise ValueError("lower-right block must be -A^T")

    terms: dict[tuple, QC] = {}
    half = Fraction(1, 2)
    for j in range(n):
        for k in range(n):
            ajk = fr(A[j, k])
            if ajk:
                # (a_j b_k + b_k a_j)/2 = a_j b_k + (i/2) delta_jk
                _merge(terms, (_unit(n, j), _unit(n, k)), QC(ajk))
                if j == k:
                    _merge(terms, ((0,) * n, (0,) * n), QC(0, half * ajk))
        bjj = fr(B[j, j])
        if bjj:
            _merge(terms, (_scaled(n, j, 2), (0,) * n), QC(-half * bjj))
        cjj = fr(C[j, j])
        if cjj:
            _merge(terms, ((0,) * n, _scaled(n, j, 2)), QC(half * cjj))
        for k in range(j + 1, n):
            bjk = fr(B[j, k])
            if bjk:
                e = [0] * n
                e[j] += 1
                e[k] += 1
                _merge(terms, (tuple(e), (0,) * n), QC(-bjk))
            cjk = fr(C[j, k])
            if cjk:
                e = [0] * n
                e[j] += 1
                e[k] += 1
                _merge(terms, ((0,) * n, tuple(e)), QC(cjk))
    return WeylElement(n, terms)
