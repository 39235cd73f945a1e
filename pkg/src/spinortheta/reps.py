"""Gaussian and Fock models of the canonical representation.

Gaussian model.  States are psi(x) = amp * exp(i(x^T Q x/2 + b^T x))
with Q complex symmetric, Im Q positive definite.  The Heisenberg
group acts by

    pi((x0, y0), t) psi(x) = e^{it} e^{i<x0, x> - i<x0, y0>/2} psi(x - y0),

and the metaplectic letters act by substitution (gl), by the unit
multiplier e^{-i x^T B x/2} (quad), and by the normalised oscillating
Fourier transform

    (four psi)(x) = i^{n/2} (2 pi)^{-n/2} integral e^{i<x,w>} psi(w) dw

(quad and four only change states projectively up to the tracked
amplitude computed here in closed form).

Fock model.  The Hilbert space is spanned by products of orthonormal
Hermite functions h_k, truncated to total degree <= N.  Infinitesimal
generators are realised through the exact ladder data

    x h_k = sqrt((k+1)/2) h_{k+1} + sqrt(k/2) h_{k-1},
    d/dx h_k = -sqrt((k+1)/2) h_{k+1} + sqrt(k/2) h_{k-1},

and group letters by exact projection of their closed-form images
(the Fourier letter is diagonal: four h_k = e^{i pi (2|k| + n)/4} h_k).

The linear functional sigma sends a phase vector (c_a; c_b) in C^{2n}
to the operator sum_j c_a,j (i x_j) + c_b,j d/dx_j; both models carry
it, and [sigma(v), sigma(w)] = -i omega0(v, w) Id holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .groups import MpLetter, MpWord, check_siegel, mp_to_sp
from .weyl import WeylElement

__all__ = [
    "GaussianState",
    "standard_gaussian",
    "pi_act_gaussian",
    "mp_act_gaussian",
    "gaussian_siegel_act",
    "gauss_overlap",
    "FockVector",
    "fock_basis",
    "fock_basis_vector",
    "hermite_functions",
    "hermite_eval",
    "sigma_matrix",
    "sigma_fock",
    "weyl_fock_matrix",
    "pi_fock_matrix",
    "pi_act_fock",
    "mp_fock_matrix",
    "mp_act_fock",
    "harmonic_rotation",
    "oscillator_apply",
    "lie_derivative_matrix",
    "lie_derivative_flat",
    "QuantizedHamiltonian",
    "quantize_quadratic",
    "gaussian_to_fock",
    "fock_to_function",
    "PolyGaussian",
    "apply_sigma_polygauss",
    "polygauss_overlap",
]


# -- Gaussian model ----------------------------------------------------

@dataclass(frozen=True)
class GaussianState:
    """amp * exp(i(x^T Q x / 2 + b^T x)) with Im Q > 0."""

    Q: np.ndarray
    b: np.ndarray
    amp: complex = 1.0

    def __post_init__(self):
        Q = check_siegel(self.Q)
        b = np.atleast_1d(np.asarray(self.b, dtype=complex))
        if b.shape != (Q.shape[0],):
            raise ValueError("linear term has wrong length")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "amp", complex(self.amp))

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def evaluate(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        quad = np.einsum("pj,jk,pk->p", x, self.Q, x)
        return self.amp * np.exp(1j * (0.5 * quad + x @ self.b))

    def close_to(self, other: "GaussianState", tol: float = 1e-9) -> bool:
        return (np.max(np.abs(self.Q - other.Q)) <= tol
                and np.max(np.abs(self.b - other.b)) <= tol
                and abs(self.amp - other.amp) <= tol)


def standard_gaussian(n: int) -> GaussianState:
    """Unit-norm ground state, Q = iI."""
    return GaussianState(1j * np.eye(n), np.zeros(n), np.pi ** (-n / 4))


def _det_power(M, p: float) -> complex:
    """det(M)^p by principal powers of the eigenvalues.

    Safe whenever the numerical range of M avoids the closed negative
    real axis (all uses here have Re M or the spectrum in the right
    half plane).
    """
    lam = np.linalg.eigvals(M)
    if np.any(np.real(lam) <= 0) and np.any(np.abs(np.imag(lam)) < 1e-14):
        raise ValueError("matrix has spectrum on the principal branch cut")
    return complex(np.prod(lam ** p))


def pi_act_gaussian(v, t: float, s: GaussianState) -> GaussianState:
    """pi((x0, y0), t) applied to s, as a closed-form parameter update."""
    v = np.asarray(v, dtype=float)
    if v.size != 2 * s.n:
        raise ValueError("mixed degrees")
    x0, y0 = v[:s.n], v[s.n:]
    b2 = s.b + x0 - s.Q @ y0
    phase = t - 0.5 * (x0 @ y0) + 0.5 * (y0 @ (s.Q @ y0)) - s.b @ y0
    return GaussianState(s.Q, b2, s.amp * np.exp(1j * phase))


def _letter_act_gaussian(l: MpLetter, s: GaussianState) -> GaussianState:
    if l.kind == "gl":
        return GaussianState(l.A @ s.Q @ l.A.T, l.A @ s.b, l.r * s.amp)
    if l.kind == "quad":
        return GaussianState(s.Q - l.B, s.b, s.amp)
    Qi = np.linalg.inv(s.Q)
    amp = (s.amp * np.exp(1j * np.pi * s.n / 4)
           * _det_power(-1j * s.Q, -0.5)
           * np.exp(-0.5j * s.b @ (Qi @ s.b)))
    return GaussianState(-Qi, -Qi @ s.b, amp)


def mp_act_gaussian(w: MpWord | MpLetter, s: GaussianState) -> GaussianState:
    if isinstance(w, MpLetter):
        return _letter_act_gaussian(w, s)
    for l in reversed(w.letters):
        s = _letter_act_gaussian(l, s)
    return s


def gaussian_siegel_act(g, Q) -> np.ndarray:
    """Mobius action on Gaussian parameters induced by mp_act_gaussian.

    For g = mp_to_sp(w) this is the standard left action of the
    K-twisted matrix K g K, i.e. Q -> (A Q - B)(-C Q + D)^{-1}.
    """
    Q = check_siegel(Q)
    g = np.asarray(g, dtype=float)
    n = Q.shape[0]
    A, B = g[:n, :n], g[:n, n:]
    C, D = g[n:, :n], g[n:, n:]
    return check_siegel((A @ Q - B) @ np.linalg.inv(-C @ Q + D))


def gauss_overlap(s1: GaussianState, s2: GaussianState) -> complex:
    """L^2 inner product <s1, s2>, antilinear in the first slot."""
    if s1.n != s2.n:
        raise ValueError("mixed degrees")
    M = s2.Q - np.conj(s1.Q)
    beta = s2.b - np.conj(s1.b)
    Mi = np.linalg.inv(M)
    val = ((2 * np.pi) ** (s1.n / 2) * _det_power(-1j * M, -0.5)
           * np.exp(-0.5j * beta @ (Mi @ beta)))
    return complex(np.conj(s1.amp) * s2.amp * val)


# -- Fock model --------------------------------------------------------

@lru_cache(maxsize=None)
def fock_basis(n: int, N: int) -> tuple:
    """Multi-indices |k| <= N sorted by total degree then lex."""
    idx = [()]
    for _ in range(n):
        idx = [k + (j,) for k in idx for j in range(N + 1)]
    idx = [k for k in idx if sum(k) <= N]
    idx.sort(key=lambda k: (sum(k), k))
    return tuple(idx)


@lru_cache(maxsize=None)
def _fock_index(n: int, N: int) -> dict:
    return {k: i for i, k in enumerate(fock_basis(n, N))}


@dataclass
class FockVector:
    """Coefficients over the degree-truncated Hermite basis.

    `truncated` records that some raising contribution was dropped at
    the degree cap, so top-level coefficients are unreliable.
    """

    n: int
    N: int
    coeffs: np.ndarray
    truncated: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (len(fock_basis(self.n, self.N)),):
            raise ValueError("coefficient vector has wrong length")
        self.coeffs = c

    def inner(self, other: "FockVector") -> complex:
        return complex(np.vdot(self.coeffs, other.coeffs))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def restrict(self, level: int) -> np.ndarray:
        keep = [i for i, k in enumerate(fock_basis(self.n, self.N)) if sum(k) <= level]
        return self.coeffs[keep]


def fock_basis_vector(n: int, N: int, k) -> FockVector:
    c = np.zeros(len(fock_basis(n, N)), dtype=complex)
    c[_fock_index(n, N)[tuple(k)]] = 1.0
    return FockVector(n, N, c)


@lru_cache(maxsize=None)
def _xmat(n: int, N: int, axis: int) -> np.ndarray:
    basis = fock_basis(n, N)
    index = _fock_index(n, N)
    m = np.zeros((len(basis), len(basis)))
    for i, k in enumerate(basis):
        kj = k[axis]
        up = k[:axis] + (kj + 1,) + k[axis + 1:]
        if sum(up) <= N:
            m[index[up], i] += np.sqrt((kj + 1) / 2)
        if kj:
            dn = k[:axis] + (kj - 1,) + k[axis + 1:]
            m[index[dn], i] += np.sqrt(kj / 2)
    return m


@lru_cache(maxsize=None)
def _dmat(n: int, N: int, axis: int) -> np.ndarray:
    basis = fock_basis(n, N)
    index = _fock_index(n, N)
    m = np.zeros((len(basis), len(basis)))
    for i, k in enumerate(basis):
        kj = k[axis]
        up = k[:axis] + (kj + 1,) + k[axis + 1:]
        if sum(up) <= N:
            m[index[up], i] -= np.sqrt((kj + 1) / 2)
        if kj:
            dn = k[:axis] + (kj - 1,) + k[axis + 1:]
            m[index[dn], i] += np.sqrt(kj / 2)
    return m


def sigma_matrix(n: int, N: int, v) -> np.ndarray:
    """Matrix of sigma(v) = sum_j v_j (i x_j) + v_{n+j} d_j (truncating)."""
    v = np.asarray(v, dtype=complex)
    dim = len(fock_basis(n, N))
    m = np.zeros((dim, dim), dtype=complex)
    for j in range(n):
        if v[j]:
            m += v[j] * 1j * _xmat(n, N, j)
        if v[n + j]:
            m += v[n + j] * _dmat(n, N, j)
    return m


def sigma_fock(v, f: FockVector) -> FockVector:
    top = any(sum(k) == f.N and f.coeffs[i]
              for i, k in enumerate(fock_basis(f.n, f.N)))
    out = sigma_matrix(f.n, f.N, v) @ f.coeffs
    return FockVector(f.n, f.N, out, truncated=f.truncated or bool(top))


def weyl_fock_matrix(q: WeylElement, N: int) -> np.ndarray:
    """Matrix of the normal-ordered operator realisation of q.

    A monomial a^p b^q maps to (i x)^p d^q; products are truncated at
    total degree N, so only matrix elements safely below the cap are
    exact.
    """
    n = q.n
    dim = len(fock_basis(n, N))
    out = np.zeros((dim, dim), dtype=complex)
    for (p, qq), c in q.terms.items():
        m = np.eye(dim, dtype=complex)
        for j in range(n):
            for _ in range(qq[j]):
                m = _dmat(n, N, j) @ m
        for j in range(n):
            for _ in range(p[j]):
                m = _xmat(n, N, j) @ m
        out += complex(c) * (1j ** sum(p)) * m
    return out


def _raising_column_matrix(n: int, N: int, col0: np.ndarray,
                           T_ops: list) -> np.ndarray:
    """Operator matrix from its ground column and conjugated raisings.

    For a unitary O with O R_j O^{-1} = T_j (R_j the j-th raising
    operator), the columns obey O h_{k+e_j} = T_j O h_k / sqrt(k_j+1);
    all T_j here are first order, so entries below the degree cap stay
    exact and only near-cap levels feel the truncation.
    """
    basis = fock_basis(n, N)
    index = _fock_index(n, N)
    out = np.zeros((len(basis), len(basis)), dtype=complex)
    out[:, 0] = col0
    for i, k in enumerate(basis):
        if i == 0:
            continue
        j = next(ax for ax in range(n) if k[ax])
        src = index[k[:j] + (k[j] - 1,) + k[j + 1:]]
        out[:, i] = (T_ops[j] @ out[:, src]) / np.sqrt(k[j])
    return out


def _raising_vectors(n: int) -> list:
    """sigma-coefficients of R_j = (x_j - d_j)/sqrt(2)."""
    out = []
    for j in range(n):
        r = np.zeros(2 * n, dtype=complex)
        r[j] = -1j / np.sqrt(2.0)
        r[n + j] = -1.0 / np.sqrt(2.0)
        out.append(r)
    return out


def pi_fock_matrix(v, t: float, N: int) -> np.ndarray:
    """Matrix of pi((x0, y0), t) as an exact projection onto the basis.

    Conjugating a raising operator by pi only adds a scalar,
    pi R_j pi^{-1} = R_j + i(x0_j + i y0_j)/sqrt(2), so the column
    recurrence runs with shifted raisings from the displaced ground
    column.
    """
    v = np.asarray(v, dtype=float)
    n = v.size // 2
    x0, y0 = v[:n], v[n:]
    moved = pi_act_gaussian(v, t, standard_gaussian(n))
    col0 = gaussian_to_fock(moved, N).coeffs
    dim = len(fock_basis(n, N))
    T_ops = [sigma_matrix(n, N, r) + (1j * (x0[j] + 1j * y0[j]) / np.sqrt(2.0))
             * np.eye(dim) for j, r in enumerate(_raising_vectors(n))]
    return _raising_column_matrix(n, N, col0, T_ops)


def pi_act_fock(v, t: float, f: FockVector) -> FockVector:
    """Heisenberg action in the Fock model (tail beyond the cap is lost)."""
    out = pi_fock_matrix(v, t, f.N) @ f.coeffs
    return FockVector(f.n, f.N, out, truncated=True)


def _letter_fock(l: MpLetter, N: int) -> np.ndarray:
    n = l.n
    basis = fock_basis(n, N)
    if l.kind == "four":
        mu = np.array([2 * sum(k) + n for k in basis])
        return np.diag(np.exp(1j * np.pi * mu / 4))
    moved = _letter_act_gaussian(l, standard_gaussian(n))
    col0 = gaussian_to_fock(moved, N).coeffs
    S = mp_to_sp(l)
    T_ops = [sigma_matrix(n, N, S @ r) for r in _raising_vectors(n)]
    return _raising_column_matrix(n, N, col0, T_ops)


def mp_fock_matrix(w: MpWord | MpLetter, N: int) -> np.ndarray:
    if isinstance(w, MpLetter):
        return _letter_fock(w, N)
    dim = len(fock_basis(w.n, N))
    m = np.eye(dim, dtype=complex)
    for l in w.letters:
        m = m @ _letter_fock(l, N)
    return m


def mp_act_fock(w: MpWord | MpLetter, f: FockVector) -> FockVector:
    """Metaplectic word action in the Fock model.

    Only the Fourier letter is exactly diagonal; gl and quad letters go
    through truncated matrix exponentials, so the result is flagged
    truncated unless the word is four-letters-only.
    """
    letters = (w,) if isinstance(w, MpLetter) else w.letters
    exact = all(l.kind == "four" for l in letters)
    out = mp_fock_matrix(w, f.N) @ f.coeffs
    return FockVector(f.n, f.N, out, truncated=f.truncated or not exact)


def harmonic_rotation(n: int, N: int, t: float) -> np.ndarray:
    """Diagonal phases e^{i t mu_k / 2} with mu_k = 2|k| + n."""
    mu = np.array([2 * sum(k) + n for k in fock_basis(n, N)])
    return np.diag(np.exp(0.5j * t * mu))


def oscillator_apply(f: FockVector, flavor: str = "H") -> FockVector:
    """Multiply by the oscillator spectrum.

    flavor "H" uses mu_k = 2|k| + n (the classical-normalisation
    spectrum); flavor "H0" uses the generator -(|k| + n/2) realised by
    -(1/2) sum (x_j^2 - d_j^2).
    """
    mu = np.array([2 * sum(k) + f.n for k in fock_basis(f.n, f.N)], dtype=float)
    if flavor == "H":
        vals = mu
    elif flavor == "H0":
        vals = -mu / 2
    else:
        raise ValueError("flavor must be 'H' or 'H0'")
    return FockVector(f.n, f.N, vals * f.coeffs, truncated=f.truncated)


def lie_derivative_matrix(M, N: int) -> np.ndarray:
    """Flat-space Lie derivative of constant spinor sections.

    For the linear vector field X(z) = M z in sp(2n), acting on
    sections that are constant in the base frame,

        L_X = (i/2) sum_j [sigma(M e_j) sigma(f_j) - sigma(M f_j) sigma(e_j)],

    with e_j, f_j the a/b coordinate frame.  Returns the Fock matrix.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    dim = len(fock_basis(n, N))
    out = np.zeros((dim, dim), dtype=complex)
    for j in range(n):
        e = np.zeros(2 * n)
        e[j] = 1.0
        f = np.zeros(2 * n)
        f[n + j] = 1.0
        out += (sigma_matrix(n, N, M @ e) @ sigma_matrix(n, N, f)
                - sigma_matrix(n, N, M @ f) @ sigma_matrix(n, N, e))
    return 0.5j * out


def lie_derivative_flat(M, f: FockVector) -> FockVector:
    """lie_derivative_matrix applied to a constant section (degree +2)."""
    out = lie_derivative_matrix(M, f.N) @ f.coeffs
    return FockVector(f.n, f.N, out, truncated=True)


def _exact_fraction_matrix(M) -> np.ndarray:
    from fractions import Fraction

    out = np.empty(M.shape, dtype=object)
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            out[i, j] = Fraction(float(M[i, j]))
    return out


@dataclass(frozen=True)
class QuantizedHamiltonian:
    """Normal-ordered quantisation of H(z) = z^T Qm z.

    A = J0 (Qm + Qm^T) is the linear Hamiltonian field; q is the
    quadratic element with d/dt psi = -i sigma(q) psi generating the
    metaplectic flow of exp(tA) (for real Qm).  Calling the object
    applies sigma(q) at the vector's own cutoff.
    """

    A: np.ndarray
    q: WeylElement

    def matrix(self, N: int) -> np.ndarray:
        return weyl_fock_matrix(self.q, N)

    def __call__(self, f: FockVector) -> FockVector:
        out = self.matrix(f.N) @ f.coeffs
        return FockVector(f.n, f.N, out, truncated=True)


def quantize_quadratic(Qm) -> QuantizedHamiltonian:
    """Quadratic Hamiltonian matrix to its normal-ordered operator.

    Qm may be complex symmetric; the real and imaginary parts are
    quantised separately and combined linearly.
    """
    from .weyl import J0, sp_to_weyl
    from .weyl import QC

    Qm = np.asarray(Qm, dtype=complex)
    n2 = Qm.shape[0]
    if Qm.shape != (n2, n2) or n2 % 2:
        raise ValueError("need a square matrix of even size")
    if np.max(np.abs(Qm - Qm.T)) > 1e-12:
        raise ValueError("Hamiltonian matrix must be symmetric")
    A = J0(n2 // 2) @ (2 * Qm)
    q = sp_to_weyl(_exact_fraction_matrix(A.real).T)
    if np.max(np.abs(A.imag)) > 0:
        q = q + sp_to_weyl(_exact_fraction_matrix(A.imag).T) * QC(0, 1)
    if np.max(np.abs(A.imag)) == 0:
        A = A.real
    return QuantizedHamiltonian(A, q)


# -- conversions -------------------------------------------------------

def hermite_functions(N: int, x) -> np.ndarray:
    """Orthonormal Hermite functions h_0..h_N sampled at x, shape (N+1, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((N + 1, x.size))
    out[0] = np.pi ** (-0.25) * np.exp(-0.5 * x * x)
    if N >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, N):
        out[k + 1] = (np.sqrt(2.0 / (k + 1)) * x * out[k]
                      - np.sqrt(k / (k + 1)) * out[k - 1])
    return out


def hermite_eval(k, x) -> float:
    """Product Hermite function h_k(x) for a multi-index k."""
    k = tuple(int(v) for v in np.atleast_1d(k))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if len(k) != x.size:
        raise ValueError("multi-index and point have different lengths")
    val = 1.0
    for kj, xj in zip(k, x):
        val *= float(hermite_functions(kj, np.array([xj]))[kj, 0])
    return val


def fock_to_function(f: FockVector, x) -> np.ndarray:
    """Evaluate the truncated Hermite expansion at points x (m, n)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    tables = [hermite_functions(f.N, x[:, j]) for j in range(f.n)]
    out = np.zeros(x.shape[0], dtype=complex)
    for i, k in enumerate(fock_basis(f.n, f.N)):
        if not f.coeffs[i]:
            continue
        term = np.ones(x.shape[0])
        for j in range(f.n):
            term = term * tables[j][k[j]]
        out += f.coeffs[i] * term
    return out


def gaussian_to_fock(s: GaussianState, N: int) -> FockVector:
    """Hermite coefficients <h_k, s> by the exact ladder recurrence.

    Uses x_j s = sum_l (Q^{-1})_{jl} (-i d_l - b_l) s to express level
    m+1 projections through level <= m ones; each level is an
    overdetermined consistent linear system solved by least squares.
    """
    n, N_ = s.n, N
    basis = fock_basis(n, N_)
    index = _fock_index(n, N_)
    Qi = np.linalg.inv(s.Q)
    M = s.Q + 1j * np.eye(n)
    I0 = (s.amp * np.pi ** (-n / 4) * (2 * np.pi) ** (n / 2)
          * _det_power(-1j * M, -0.5)
          * np.exp(-0.5j * s.b @ (np.linalg.inv(M) @ s.b)))
    vals = np.zeros(len(basis), dtype=complex)
    vals[0] = I0
    levels: dict[int, list] = {}
    for k in basis:
        levels.setdefault(sum(k), []).append(k)
    for m in range(N_):
        unknown = levels.get(m + 1, [])
        if not unknown:
            break
        upos = {k: i for i, k in enumerate(unknown)}
        rows, rhs = [], []
        for k in levels[m]:
            for j in range(n):
                row = np.zeros(len(unknown), dtype=complex)
                val = complex(0.0)
                # lhs: sqrt((k_j+1)/2) I(k+e_j) + sqrt(k_j/2) I(k-e_j)
                up = k[:j] + (k[j] + 1,) + k[j + 1:]
                row[upos[up]] += np.sqrt((k[j] + 1) / 2)
                if k[j]:
                    dn = k[:j] + (k[j] - 1,) + k[j + 1:]
                    val -= np.sqrt(k[j] / 2) * vals[index[dn]]
                # rhs: sum_l (Qi)_jl (i sqrt((k_l+1)/2) I(k+e_l)
                #        - i sqrt(k_l/2) I(k-e_l) - b_l I(k))
                for l in range(n):
                    c = Qi[j, l]
                    if not c:
                        continue
                    upl = k[:l] + (k[l] + 1,) + k[l + 1:]
                    row[upos[upl]] += 1j * c * np.sqrt((k[l] + 1) / 2)
                    if k[l]:
                        dnl = k[:l] + (k[l] - 1,) + k[l + 1:]
                        val += 1j * c * np.sqrt(k[l] / 2) * vals[index[dnl]]
                    val -= c * s.b[l] * vals[index[k]]
                rows.append(row)
                rhs.append(val)
        sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
        for k in unknown:
            vals[index[k]] = sol[upos[k]]
    return FockVector(n, N_, vals, truncated=True)


# -- polynomial-times-Gaussian calculus --------------------------------

@dataclass(frozen=True)
class PolyGaussian:
    """p(x) times a Gaussian state, p stored as {exponent tuple: coeff}."""

    state: GaussianState
    poly: dict

    @property
    def n(self) -> int:
        return self.state.n


def _poly_mul_linear(poly: dict, n: int, axis: int, scale: complex) -> dict:
    out: dict = {}
    for a, c in poly.items():
        up = a[:axis] + (a[axis] + 1,) + a[axis + 1:]
        out[up] = out.get(up, 0.0) + scale * c
    return out


def _poly_add(p1: dict, p2: dict) -> dict:
    out = dict(p1)
    for a, c in p2.items():
        out[a] = out.get(a, 0.0) + c
    return {a: c for a, c in out.items() if c != 0}


def apply_sigma_polygauss(v, pg: PolyGaussian) -> PolyGaussian:
    """sigma(v) applied to p(x) e^{i phi(x)} stays in the class."""
    v = np.asarray(v, dtype=complex)
    n = pg.n
    s = pg.state
    out: dict = {}
    for j in range(n):
        ca, cb = v[j], v[n + j]
        if ca:
            out = _poly_add(out, _poly_mul_linear(pg.poly, n, j, 1j * ca))
        if cb:
            # d_j p = sum a_j x^{a - e_j}, plus p * i((Qx)_j + b_j)
            dp = {}
            for a, c in pg.poly.items():
                if a[j]:
                    dn = a[:j] + (a[j] - 1,) + a[j + 1:]
                    dp[dn] = dp.get(dn, 0.0) + a[j] * c
            out = _poly_add(out, {a: cb * c for a, c in dp.items()})
            for l in range(n):
                if s.Q[j, l]:
                    out = _poly_add(out, _poly_mul_linear(pg.poly, n, l, 1j * cb * s.Q[j, l]))
            out = _poly_add(out, {a: 1j * cb * s.b[j] * c for a, c in pg.poly.items()})
    return PolyGaussian(s, out)


def _moments(M, beta, max_deg: int, n: int) -> dict:
    """E[x^alpha] under exp(i(x^T M x/2 + beta^T x)), normalised."""
    Mi = np.linalg.inv(M)
    mu = -Mi @ beta
    cov = 1j * Mi
    mem: dict = {(0,) * n: 1.0 + 0j}

    def rec(alpha) -> complex:
        if alpha in mem:
            return mem[alpha]
        j = next(i for i, a in enumerate(alpha) if a)
        rest = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
        val = mu[j] * rec(rest)
        for l in range(n):
            if rest[l]:
                lower = rest[:l] + (rest[l] - 1,) + rest[l + 1:]
                val += cov[j, l] * rest[l] * rec(lower)
        mem[alpha] = val
        return val

    idx = [()]
    for _ in range(n):
        idx = [k + (j,) for k in idx for j in range(max_deg + 1)]
    for alpha in idx:
        if sum(alpha) <= max_deg:
            rec(alpha)
    return mem


def polygauss_overlap(p1: PolyGaussian, p2: PolyGaussian) -> complex:
    """<p1, p2> with exact complex Gaussian moment integrals."""
    if p1.n != p2.n:
        raise ValueError("mixed degrees")
    n = p1.n
    s1, s2 = p1.state, p2.state
    M = s2.Q - np.conj(s1.Q)
    beta = s2.b - np.conj(s1.b)
    base = ((2 * np.pi) ** (n / 2) * _det_power(-1j * M, -0.5)
            * np.exp(-0.5j * beta @ (np.linalg.inv(M) @ beta)))
    prod: dict = {}
    for a1, c1 in p1.poly.items():
        for a2, c2 in p2.poly.items():
            key = tuple(x + y for x, y in zip(a1, a2))
            prod[key] = prod.get(key, 0.0) + np.conj(c1) * c2
    if not prod:
        return 0.0
    mom = _moments(M, beta, max(sum(a) for a in prod), n)
    acc = sum(c * mom[a] for a, c in prod.items())
    return complex(np.conj(s1.amp) * s2.amp * base * acc)
