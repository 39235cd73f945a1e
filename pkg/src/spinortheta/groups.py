"""Heisenberg group, metaplectic words, and the Siegel half space.

The Heisenberg group H_n is R^{2n} x R in exponential coordinates with

    (v, t) (w, s) = (v + w, t + s + omega0(v, w)/2).

The metaplectic group is presented by words in three letter types,

    gl(A, r)   with r^2 = det A,       quad(B) with B symmetric,
    four       (a fixed Fourier-type letter),

whose images in Sp(2n, R) are diag(A, (A^T)^-1), [[I, B], [0, I]] and
[[0, -I], [I, 0]].  A word [l1, ..., lm] stands for the operator
product L(l1) ... L(lm), so the rightmost letter acts first.

Two symplectic avatars of a word appear throughout: `mp_to_sp` is the
frame/flow matrix used for the Siegel action and the cocycle, while
`schrodinger_sp` = K mp_to_sp K with K = diag(I, -I) is the matrix
that transports Heisenberg labels under conjugation in the state
models.  The two agree on gl letters and differ by the K-twist on the
off-diagonal blocks.

Points of the Siegel space h_n are complex symmetric n x n matrices
with positive definite imaginary part; words act on labels through

    g<T> = (D T - C)(-B T + A)^{-1},

which is the classical Siegel action of J0 g J0^{-1} and therefore has
everywhere invertible denominators on h_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .weyl import J0, omega0

__all__ = [
    "HeisenbergElement",
    "heis_mul",
    "heis_inv",
    "MpLetter",
    "gl_letter",
    "quad_letter",
    "four_letter",
    "MpWord",
    "word_inverse",
    "mp_to_sp",
    "schrodinger_sp",
    "check_siegel",
    "siegel_act",
    "siegel_left_act",
    "cocycle_transport",
    "mp_cocycle",
    "GElement",
    "g_mul",
    "g_inv",
    "random_word",
]


# -- Heisenberg layer -------------------------------------------------

@dataclass(frozen=True)
class HeisenbergElement:
    """Group element (v, t) in exponential coordinates."""

    v: np.ndarray
    t: float

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        if v.ndim != 1 or v.size % 2:
            raise ValueError("phase vector must have even length")
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.v.size // 2


def heis_mul(g: HeisenbergElement, h: HeisenbergElement) -> HeisenbergElement:
    if g.n != h.n:
        raise ValueError("mixed degrees")
    return HeisenbergElement(g.v + h.v, g.t + h.t + 0.5 * omega0(g.v, h.v))


def heis_inv(g: HeisenbergElement) -> HeisenbergElement:
    return HeisenbergElement(-g.v, -g.t)


# -- metaplectic letters and words ------------------------------------

@dataclass(frozen=True)
class MpLetter:
    """One generator of the metaplectic presentation.

    kind is "gl", "quad" or "four".  For gl the datum is (A, r) with
    r^2 = det A, the sign of r selecting the sheet; for quad it is a
    real symmetric B; four carries no datum beyond the dimension.
    """

    kind: str
    n: int
    A: np.ndarray | None = None
    r: complex = 1.0
    B: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("gl", "quad", "four"):
            raise ValueError(f"unknown letter kind {self.kind!r}")
        if self.kind == "gl":
            A = np.asarray(self.A, dtype=float)
            if A.shape != (self.n, self.n):
                raise ValueError("gl letter needs an n x n matrix")
            det = np.linalg.det(A)
            if abs(det) < 1e-14:
                raise ValueError("gl letter must be invertible")
            if abs(self.r ** 2 - det) > 1e-9 * max(1.0, abs(det)):
                raise ValueError("sheet datum r must satisfy r^2 = det A")
            object.__setattr__(self, "A", A)
        elif self.kind == "quad":
            B = np.asarray(self.B, dtype=float)
            if B.shape != (self.n, self.n) or np.max(np.abs(B - B.T)) > 1e-12:
                raise ValueError("quad letter needs a symmetric matrix")
            object.__setattr__(self, "B", B)


def gl_letter(A, r=None) -> MpLetter:
    A = np.asarray(A, dtype=float)
    if r is None:
        det = np.linalg.det(A)
        if det <= 0:
            raise ValueError("default sheet needs det A > 0")
        r = float(np.sqrt(det))
    return MpLetter("gl", A.shape[0], A=A, r=complex(r))


def quad_letter(B) -> MpLetter:
    B = np.asarray(B, dtype=float)
    return MpLetter("quad", B.shape[0], B=B)


def four_letter(n: int) -> MpLetter:
    return MpLetter("four", n)


@dataclass(frozen=True)
class MpWord:
    """A finite product of letters; composition is concatenation."""

    n: int
    letters: tuple = field(default_factory=tuple)

    def __post_init__(self):
        letters = tuple(self.letters)
        for l in letters:
            if not isinstance(l, MpLetter) or l.n != self.n:
                raise ValueError("letters must share the word's dimension")
        object.__setattr__(self, "letters", letters)

    def __mul__(self, other: "MpWord") -> "MpWord":
        if self.n != other.n:
            raise ValueError("mixed dimensions")
        return MpWord(self.n, self.letters + other.letters)

    def __len__(self):
        return len(self.letters)


def _letter_inverse(l: MpLetter) -> tuple:
    if l.kind == "gl":
        return (MpLetter("gl", l.n, A=np.linalg.inv(l.A), r=1.0 / l.r),)
    if l.kind == "quad":
        return (quad_letter(-l.B),)
    # four has order four in Sp but order eight in the double cover
    # (four^4 = (-1)^n as an operator), so the honest inverse is seven
    # more applications
    f = four_letter(l.n)
    return (f,) * 7


def word_inverse(w: MpWord) -> MpWord:
    out: list = []
    for l in reversed(w.letters):
        out.extend(_letter_inverse(l))
    return MpWord(w.n, tuple(out))


def _letter_sp(l: MpLetter) -> np.ndarray:
    n = l.n
    m = np.zeros((2 * n, 2 * n))
    if l.kind == "gl":
        m[:n, :n] = l.A
        m[n:, n:] = np.linalg.inv(l.A).T
    elif l.kind == "quad":
        m[:n, :n] = np.eye(n)
        m[n:, n:] = np.eye(n)
        m[:n, n:] = l.B
    else:
        m[:n, n:] = -np.eye(n)
        m[n:, :n] = np.eye(n)
    return m


def mp_to_sp(w: MpWord | MpLetter) -> np.ndarray:
    """Flow-convention image in Sp(2n, R)."""
    if isinstance(w, MpLetter):
        return _letter_sp(w)
    m = np.eye(2 * w.n)
    for l in w.letters:
        m = m @ _letter_sp(l)
    return m


def schrodinger_sp(w: MpWord | MpLetter) -> np.ndarray:
    """Label transport matrix K mp_to_sp(w) K, K = diag(I, -I)."""
    m = mp_to_sp(w)
    n = m.shape[0] // 2
    k = np.diag(np.concatenate([np.ones(n), -np.ones(n)]))
    return k @ m @ k


# -- Siegel space -----------------------------------------------------

def check_siegel(T, tol: float = 1e-10) -> np.ndarray:
    """Validate a Siegel point; returns it as a complex array."""
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    if T.shape[0] != T.shape[1]:
        raise ValueError("Siegel point must be square")
    if np.max(np.abs(T - T.T)) > tol:
        raise ValueError("Siegel point must be symmetric")
    if np.min(np.linalg.eigvalsh(T.imag)) <= tol:
        raise ValueError("imaginary part must be positive definite")
    return T


def siegel_act(g, T) -> np.ndarray:
    """Action g<T> = (D T - C)(-B T + A)^{-1} on the Siegel space."""
    T = check_siegel(T)
    g = np.asarray(g, dtype=float)
    n = T.shape[0]
    A, B = g[:n, :n], g[:n, n:]
    C, D = g[n:, :n], g[n:, n:]
    den = -B @ T + A
    out = (D @ T - C) @ np.linalg.inv(den)
    return check_siegel(out)


def siegel_left_act(g, T) -> np.ndarray:
    """Classical left Mobius action (A T + B)(C T + D)^{-1}.

    Conversion helper only: siegel_act(g, T) equals
    siegel_left_act(J0 g J0^{-1}, T).  Nothing else in the package
    consumes this form.
    """
    T = check_siegel(T)
    g = np.asarray(g, dtype=float)
    n = T.shape[0]
    A, B = g[:n, :n], g[:n, n:]
    C, D = g[n:, :n], g[n:, n:]
    return check_siegel((A @ T + B) @ np.linalg.inv(C @ T + D))


def _tracked_sqrt(fvals: np.ndarray, anchor_arg: float) -> complex:
    """Square root of fvals[-1] on the branch continued along the path.

    fvals samples a nowhere-zero path; the argument is accumulated
    stepwise, anchored to anchor_arg at the first sample.
    """
    steps = np.angle(fvals[1:] / fvals[:-1])
    if np.any(np.abs(steps) > 2.5):
        raise ValueError("path too coarse for branch tracking")
    total = anchor_arg + float(np.sum(steps))
    return float(np.sqrt(np.abs(fvals[-1]))) * np.exp(0.5j * total)


def _quad_factor(B, T, samples=64) -> complex:
    ts = np.linspace(0.0, 1.0, samples)
    vals = np.array([np.linalg.det(np.eye(B.shape[0]) - t * (B @ T)) for t in ts])
    return _tracked_sqrt(vals, anchor_arg=0.0)


def _four_factor(T, samples=64) -> complex:
    """det(T)^{1/2} on the branch with value e^{i pi n/4} at T = iI.

    The segment from iI to T stays in the Siegel space (it is convex),
    so det never vanishes along the path.
    """
    n = T.shape[0]
    ts = np.linspace(0.0, 1.0, samples)
    base = 1j * np.eye(n)
    vals = np.array([np.linalg.det((1 - t) * base + t * T) for t in ts])
    return _tracked_sqrt(vals, anchor_arg=n * np.pi / 2)


def cocycle_transport(w: MpWord, T, samples=64) -> tuple[complex, np.ndarray]:
    """Scalar cocycle c(w, T) together with the transported label w<T>.

    Letters contribute multiplicatively at the label current when they
    act: gl gives its sheet datum r, quad gives the branch-tracked
    det(I - B T)^{1/2} continued from 1 at B = 0, and four gives
    det(T)^{1/2} on the branch pinned to e^{i pi n/4} at T = iI.  The
    square of the result equals det(-B_w T + A_w) for the blocks of
    mp_to_sp(w); the sign of c itself distinguishes the two sheets of
    the double cover.
    """
    T = check_siegel(T)
    c = complex(1.0)
    cur = T
    for l in reversed(w.letters):
        if l.kind == "gl":
            c = l.r * c
        elif l.kind == "quad":
            c = _quad_factor(l.B, cur, samples) * c
        else:
            c = _four_factor(cur, samples) * c
        cur = siegel_act(_letter_sp(l), cur)
    return c, cur


def mp_cocycle(w: MpWord, T, samples=64) -> complex:
    """Scalar cocycle c(w, T); see cocycle_transport for the branch rule."""
    return cocycle_transport(w, T, samples)[0]


# -- the combined group -----------------------------------------------

@dataclass(frozen=True)
class GElement:
    """Element (h, t, g) of the combined group, read as L(g) pi(h, t)."""

    h: np.ndarray
    t: float
    g: MpWord

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.size != 2 * self.g.n:
            raise ValueError("phase vector size must match the word")
        object.__setattr__(self, "h", h)

    @property
    def n(self) -> int:
        return self.g.n


def g_mul(g1: GElement, g2: GElement) -> GElement:
    """(h1,t1,w1)(h2,t2,w2) with the label of g1 pulled through w2."""
    if g1.n != g2.n:
        raise ValueError("mixed dimensions")
    pulled = np.linalg.solve(schrodinger_sp(g2.g), g1.h)
    t = g1.t + g2.t + 0.5 * omega0(pulled, g2.h)
    return GElement(pulled + g2.h, t, g1.g * g2.g)


def g_inv(g: GElement) -> GElement:
    winv = word_inverse(g.g)
    return GElement(-(schrodinger_sp(g.g) @ g.h), -g.t, winv)


# -- test fodder ------------------------------------------------------

def random_word(rng: np.random.Generator, n: int, length: int) -> MpWord:
    """A well-conditioned random word (gl from expm, mild shears)."""
    from scipy.linalg import expm

    letters = []
    for _ in range(length):
        kind = rng.choice(["gl", "quad", "four"])
        if kind == "gl":
            S = 0.4 * rng.standard_normal((n, n))
            A = expm(S)
            r = float(np.exp(0.5 * np.trace(S)))
            if rng.random() < 0.5:
                r = -r
            letters.append(MpLetter("gl", n, A=A, r=r))
        elif kind == "quad":
            B = 0.5 * rng.standard_normal((n, n))
            letters.append(quad_letter(B + B.T))
        else:
            letters.append(four_letter(n))
    return MpWord(n, tuple(letters))
