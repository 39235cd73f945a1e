"""Displaced ground states, their eigenvalue labels, and orbit data.

A point (h, T) with h in R^{2n} and T in the Siegel space labels the
state obtained by translating the unit-norm Gaussian with Q = -T^{-1}
by the Heisenberg element (h, 0).  Each such state is a joint
eigenvector of the n commuting annihilation operators attached to T,

    sigma(a_j + sum_k T_jk b_k),

and the list of eigenvalues (reported in the same 1/i normalisation
for every frame, see `annihilation_eigenvalue`) determines the state
up to the label T.  The combined Heisenberg-metaplectic group acts on
labels on the right; `g_orbit_act` transports a point and folds the
resulting unit-modulus state ratio into its phase slot.

The second half of the module handles the finite chain data used for
the non-diagonalisable modules: downward-closed sets of multi-indices,
their singular support, and the lowering matrix of one annihilation
direction on the corresponding displaced span.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .groups import (GElement, MpWord, check_siegel, gl_letter, mp_to_sp,
                     quad_letter, schrodinger_sp, word_inverse)
from .reps import (GaussianState, PolyGaussian, apply_sigma_polygauss,
                   gaussian_siegel_act, mp_act_gaussian, pi_act_gaussian)

__all__ = [
    "CoherentPoint",
    "IndecomposablePoint",
    "ChainSet",
    "coherent_state",
    "annihilation_eigenvalue",
    "g_orbit_act",
    "connecting_element",
    "word_to_siegel",
    "equivalent_irreducible",
    "enumerate_chain_sets",
    "singular_support",
    "lowering_matrix",
]


@dataclass(frozen=True)
class CoherentPoint:
    """Label (h, T) of a displaced ground state.

    The optional phase rides along under the group action; `algebra`
    tags which commutative algebra the eigenvalue data refers to ("A1"
    for the a-generated one, "A2" for the full annihilation frame).
    """

    h: np.ndarray
    T: np.ndarray
    phase: complex = 1.0 + 0.0j
    algebra: str = "A1"

    def __post_init__(self):
        T = check_siegel(self.T)
        h = np.asarray(self.h, dtype=float)
        if h.size != 2 * T.shape[0]:
            raise ValueError("label vector must have length 2n")
        if abs(abs(self.phase) - 1.0) > 1e-8:
            raise ValueError("phase must be a unit complex number")
        if self.algebra not in ("A1", "A2"):
            raise ValueError("algebra tag must be 'A1' or 'A2'")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "T", T)

    @property
    def n(self) -> int:
        return self.T.shape[0]


def coherent_state(p: CoherentPoint) -> GaussianState:
    """Unit-norm Gaussian state labelled by p.

    The base state has Q = -T^{-1} (this sign is forced by requiring
    that the h = 0 state be annihilated by sigma(a_j + sum_k T_jk b_k)
    for every j) and amplitude pi^{-n/4} det(Im Q)^{1/4}, then gets
    translated by (h, 0) and multiplied by the stored phase.
    """
    n = p.n
    Q = -np.linalg.inv(p.T)
    amp = np.pi ** (-n / 4) * np.linalg.det(Q.imag) ** 0.25
    base = GaussianState(Q, np.zeros(n), amp)
    out = pi_act_gaussian(p.h, 0.0, base)
    return GaussianState(out.Q, out.b, out.amp * p.phase)


def annihilation_eigenvalue(p: CoherentPoint, j: int, which: str = "a") -> complex:
    """Eigenvalue of the direction-j annihilation operator on state p.

    j is 1-based.  For which = "a" the operator is
    sigma(a_j + sum_k T_jk b_k) and the eigenvalue is reported as the
    polynomial prefactor divided by i, giving (h2)_j + (T h1)_j; for
    which = "b" it is sigma(sum_k (T^-1)_jk a_k + b_j) reported as i
    times the prefactor, so that T = iI yields i((h2)_j + i(h1)_j).
    The operator is applied literally to the Gaussian; a non-constant
    prefactor means the conventions are broken and raises.
    """
    n = p.n
    if not 1 <= j <= n:
        raise ValueError("direction index out of range")
    c = np.zeros(2 * n, dtype=complex)
    if which == "a":
        c[j - 1] = 1.0
        c[n:] = p.T[j - 1]
    elif which == "b":
        c[:n] = np.linalg.inv(p.T)[j - 1]
        c[n + j - 1] = 1.0
    else:
        raise ValueError("which must be 'a' or 'b'")
    state = coherent_state(p)
    pg = apply_sigma_polygauss(c, PolyGaussian(state, {(0,) * n: 1.0}))
    zero = (0,) * n
    slope = sum(abs(v) for a, v in pg.poly.items() if a != zero)
    if slope > 1e-10:
        raise ArithmeticError(
            "annihilation operator left a non-constant prefactor "
            f"(linear norm {slope:.2e})")
    pref = complex(pg.poly.get(zero, 0.0))
    return pref / 1j if which == "a" else 1j * pref


# -- orbit structure --------------------------------------------------

def word_to_siegel(T) -> MpWord:
    """Word whose state transport carries the base label iI to T.

    Writing -T^{-1} = X + iY with Y = L L^T, the word [quad(-X), gl(L)]
    moves the Gaussian parameter iI to X + iY, which is the base state
    at label T.
    """
    T = check_siegel(T)
    Q = -np.linalg.inv(T)
    L = np.linalg.cholesky(Q.imag)
    return MpWord(T.shape[0], (quad_letter(-Q.real), gl_letter(L)))


def g_orbit_act(gel: GElement, p: CoherentPoint) -> CoherentPoint:
    """Right action of (h, t, g) on labels: (h0, T) -> (h + rho(g^-1)h0, T.g).

    The new phase is fixed by comparing the transported state with the
    state of the new label, so that coherent_state intertwines the
    label action with pi(h, t) L(g^-1) on states exactly.
    """
    if gel.n != p.n:
        raise ValueError("mixed dimensions")
    winv = word_inverse(gel.g)
    new_h = gel.h + schrodinger_sp(winv) @ p.h
    Qn = gaussian_siegel_act(mp_to_sp(winv), -np.linalg.inv(p.T))
    Tn = -np.linalg.inv(Qn)
    target = pi_act_gaussian(gel.h, gel.t, mp_act_gaussian(winv, coherent_state(p)))
    bare = CoherentPoint(new_h, Tn, 1.0, p.algebra)
    cand = coherent_state(bare)
    if (np.max(np.abs(target.Q - cand.Q)) > 1e-8
            or np.max(np.abs(target.b - cand.b)) > 1e-6):
        raise ArithmeticError("orbit transport disagrees with the state model")
    ratio = target.amp / cand.amp
    if abs(abs(ratio) - 1.0) > 1e-6:
        raise ArithmeticError("orbit transport lost unitarity")
    return CoherentPoint(new_h, Tn, ratio / abs(ratio), p.algebra)


def connecting_element(p: CoherentPoint, q: CoherentPoint) -> GElement:
    """Group element whose orbit action carries p to q (label level)."""
    if p.n != q.n:
        raise ValueError("mixed dimensions")
    u = word_to_siegel(q.T) * word_inverse(word_to_siegel(p.T))
    h = q.h - schrodinger_sp(u) @ p.h
    return GElement(h, 0.0, word_inverse(u))


def equivalent_irreducible(p: CoherentPoint, q: CoherentPoint) -> bool:
    """Whether two labels give equivalent one-dimensional modules.

    Both points are first moved to the base label T = iI along a fixed
    section of the orbit (so label T is free to move), then compared
    through their joint a-eigenvalue vectors, which determine the
    displaced state uniquely at fixed T.
    """
    if p.algebra != q.algebra:
        raise ValueError("cannot compare labels over different algebras")

    def normalised(point: CoherentPoint) -> np.ndarray:
        moved = g_orbit_act(
            GElement(np.zeros(2 * point.n), 0.0, word_to_siegel(point.T)), point)
        return np.array([annihilation_eigenvalue(moved, j, "a")
                         for j in range(1, point.n + 1)])

    return bool(np.max(np.abs(normalised(p) - normalised(q))) < 1e-8)


# -- chain data -------------------------------------------------------

def _canonical(members) -> tuple:
    return tuple(sorted(members, key=lambda k: (sum(k), k)))


@dataclass(frozen=True)
class ChainSet:
    """Downward-closed set of multi-indices within the level-N simplex."""

    n: int
    N: int
    members: frozenset

    def __post_init__(self):
        members = frozenset(tuple(int(x) for x in k) for k in self.members)
        zero = (0,) * self.n
        if zero not in members:
            raise ValueError("chain set must contain the origin")
        for k in members:
            if len(k) != self.n or any(x < 0 for x in k) or sum(k) > self.N:
                raise ValueError(f"index {k} outside the level-{self.N} simplex")
            for j in range(self.n):
                if k[j] and k[:j] + (k[j] - 1,) + k[j + 1:] not in members:
                    raise ValueError(f"chain below {k} leaves the set")
        object.__setattr__(self, "members", members)

    @property
    def sorted_members(self) -> tuple:
        return _canonical(self.members)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class IndecomposablePoint:
    """Label (h, g, K) of a chain-type module over a moved frame."""

    h: np.ndarray
    g: MpWord
    K: ChainSet

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.size != 2 * self.g.n or self.K.n != self.g.n:
            raise ValueError("label sizes must agree")
        object.__setattr__(self, "h", h)

    @property
    def n(self) -> int:
        return self.K.n


def enumerate_chain_sets(n: int, N: int) -> list:
    """All downward-closed subsets of {k : |k| <= N} containing 0.

    Walks the simplex in level order deciding membership per index; an
    index may join only when all its immediate predecessors already
    have, which is exactly downward chain closure.  Guarded to keep
    the simplex at 24 indices or fewer.
    """
    simplex = [k for k in iproduct(range(N + 1), repeat=n) if sum(k) <= N]
    if len(simplex) > 24:
        raise ValueError(f"simplex has {len(simplex)} indices, refusing > 24")
    simplex.sort(key=lambda k: (sum(k), k))
    found: list = []

    def walk(i: int, cur: set):
        if i == len(simplex):
            if cur:
                found.append(frozenset(cur))
            return
        walk(i + 1, cur)
        k = simplex[i]
        if all(k[:j] + (k[j] - 1,) + k[j + 1:] in cur
               for j in range(n) if k[j]):
            cur.add(k)
            walk(i + 1, cur)
            cur.discard(k)

    walk(0, set())
    found.sort(key=lambda m: (len(m), _canonical(m)))
    return [ChainSet(n, N, m) for m in found]


def singular_support(K: ChainSet) -> set:
    """Axes (1-based) in which the chain set extends past the origin."""
    return {j + 1 for k in K.members for j in range(K.n) if k[j] >= 1}


def _chain_members(K, n: int, j: int) -> tuple:
    """Accept a ChainSet or raw index collection, closed in direction j."""
    if isinstance(K, ChainSet):
        return K.sorted_members
    members = frozenset(tuple(int(x) for x in k) for k in K)
    for k in members:
        if k[j - 1] and k[:j - 1] + (k[j - 1] - 1,) + k[j:] not in members:
            raise ValueError(f"set is not closed under lowering below {k}")
    return _canonical(members)


def lowering_matrix(K, j: int, h=None, T=None) -> np.ndarray:
    """Direction-j annihilation operator on the displaced chain span.

    Entries carry the same 1/i normalisation as the reported
    eigenvalues: the diagonal is the direction-j a-eigenvalue of
    (h, T) and the sub-diagonal entry at (k - e_j, k) is the ladder
    coefficient sqrt(2 k_j) of the orthonormal basis.  Only the
    standard frame T = iI is supported: the chain basis is tied to the
    oscillator eigenfunctions of that frame.
    """
    if isinstance(K, ChainSet):
        n = K.n
    else:
        n = len(next(iter(K)))
    if T is None:
        T = 1j * np.eye(n)
    elif np.max(np.abs(np.asarray(T, dtype=complex) - 1j * np.eye(n))) > 1e-12:
        raise NotImplementedError("chain spans are only built in the iI frame")
    if h is None:
        h = np.zeros(2 * n)
    if not 1 <= j <= n:
        raise ValueError("direction index out of range")
    members = _chain_members(K, n, j)
    index = {k: i for i, k in enumerate(members)}
    lam = annihilation_eigenvalue(CoherentPoint(h, T), j, "a")
    out = lam * np.eye(len(members), dtype=complex)
    for k in members:
        if k[j - 1]:
            low = k[:j - 1] + (k[j - 1] - 1,) + k[j:]
            out[index[low], index[k]] = np.sqrt(2.0 * k[j - 1])
    return out
