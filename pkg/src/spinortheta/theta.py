"""Lattice theta sums, the integer-point pairing, and phase lifts.

The central object is the series

    theta(z, Omega) = sum_k exp(pi i <k, Omega k> + 2 pi i <k, z> + i lam)

over k in Z^n, for Omega in the Siegel half space.  Sums are truncated
over sup-norm shells |k| <= R with R chosen so that an analytic tail
majorant falls below the requested tolerance; the majorant is returned
with the value, so callers can audit what "converged" meant.

Pairing a Gaussian state against the integer points is the same sum in
disguise (Omega = Q / 2 pi, z = b / 2 pi), which is how the generating
function of a branched structure is assembled: one theta value per
branch, weighted by the branch phase primitive.  `phase_lift` turns
nonvanishing complex samples along a path into a continuous argument,
whose closed-loop increment is the winding datum downstream modules
read off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .groups import check_siegel
from .reps import GaussianState

__all__ = [
    "ThetaInput",
    "ThetaValue",
    "PhasePath",
    "theta_eval",
    "theta_grad",
    "pair_with_eZ",
    "generating_function",
    "phase_lift",
]


@dataclass(frozen=True)
class ThetaInput:
    """Argument bundle (z, Omega, lam) of the lattice sum."""

    z: np.ndarray
    omega: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        omega = check_siegel(self.omega)
        z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        if z.size != omega.shape[0]:
            raise ValueError("z must have one entry per lattice dimension")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "omega", omega)

    @property
    def n(self) -> int:
        return self.omega.shape[0]


@dataclass(frozen=True)
class ThetaValue:
    """A truncated lattice sum together with its tail majorant."""

    value: complex
    tail_bound: float
    radius: int

    def __complex__(self) -> complex:
        return complex(self.value)


_MAX_RADIUS = 200


def _shell(n: int, r: int):
    """Lattice points with sup norm exactly r, in lexicographic order."""
    if r == 0:
        yield (0,) * n
        return
    for k in iproduct(range(-r, r + 1), repeat=n):
        if max(abs(x) for x in k) == r:
            yield k


def _tail_majorant(n: int, lam_min: float, zi: float, R: int,
                   weight: float = 0.0) -> float:
    """Upper bound for the sum over shells beyond R.

    Each point on shell r contributes at most
    exp(-pi lam_min r^2 + 2 pi n r zi), there are at most
    (2r+1)^n - (2r-1)^n of them, and an optional factor (2 pi r)^weight
    covers gradient weights.  The quadratic exponent drives shell
    bounds to float underflow, so summing until they vanish loses
    nothing.
    """
    r = np.arange(R + 1, R + 100001, dtype=float)
    count = (2.0 * r + 1.0) ** n - (2.0 * r - 1.0) ** n
    log_term = (np.log(count) - math.pi * lam_min * r * r
                + 2.0 * math.pi * n * r * zi)
    if weight:
        log_term += weight * np.log(2.0 * math.pi * r)
    if np.max(log_term) > 700.0:
        # some shell in the window is hopeless for any sane tolerance
        return math.inf
    term = np.exp(log_term)
    if term[-1] != 0.0:
        # shell bounds did not reach underflow inside the window
        return math.inf
    return float(np.sum(term))


def _choose_radius(inp: ThetaInput, tol: float, weight: float) -> tuple:
    lam_min = float(np.min(np.linalg.eigvalsh(inp.omega.imag)))
    zi = float(np.max(np.abs(inp.z.imag))) if inp.n else 0.0
    for R in range(1, _MAX_RADIUS + 1):
        bound = _tail_majorant(inp.n, lam_min, zi, R, weight)
        if bound < tol:
            return R, bound
    raise ValueError(
        f"tolerance {tol} not reachable within the lattice budget "
        f"(radius {_MAX_RADIUS})")


def _lattice_terms(inp: ThetaInput, R: int) -> tuple:
    """All lattice points within radius R and their summand values.

    Points are ordered by shell, then lexicographically, so the
    compensated summation downstream is deterministic.
    """
    axes = np.arange(-R, R + 1)
    K = np.array(np.meshgrid(*([axes] * inp.n), indexing="ij"))
    K = K.reshape(inp.n, -1).T
    shell = np.max(np.abs(K), axis=1)
    order = np.lexsort(tuple(K[:, j] for j in reversed(range(inp.n))) + (shell,))
    K = K[order].astype(float)
    quad = np.einsum("ki,ij,kj->k", K, inp.omega, K)
    terms = np.exp(1j * math.pi * quad + 2j * math.pi * (K @ inp.z)
                   + 1j * inp.lam)
    return K, terms


def _fsum_complex(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real), math.fsum(values.imag))


def theta_eval(inp: ThetaInput, tol: float) -> ThetaValue:
    """Truncated theta sum with a certified tail majorant below tol."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    R, bound = _choose_radius(inp, tol, weight=0.0)
    _, terms = _lattice_terms(inp, R)
    return ThetaValue(_fsum_complex(terms), bound, R)


def theta_grad(inp: ThetaInput, tol: float) -> np.ndarray:
    """Term-wise z-gradient of the theta sum, same truncation policy."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    R, _ = _choose_radius(inp, tol, weight=1.0)
    K, terms = _lattice_terms(inp, R)
    return np.array([_fsum_complex(2j * math.pi * K[:, j] * terms)
                     for j in range(inp.n)])


def pair_with_eZ(s: GaussianState, tol: float = 1e-10) -> complex:
    """Sum of the state over the integer points of the base.

    This is amp times a theta value at Omega = Q / 2 pi, z = b / 2 pi;
    no distribution object is ever formed.
    """
    inp = ThetaInput(s.b / (2 * math.pi), s.Q / (2 * math.pi))
    return s.amp * theta_eval(inp, tol).value


def generating_function(F, x, tol: float = 1e-10) -> complex:
    """Branch-summed pairing sum_i e^{i lam_i(x)} <psi_i(x), e_Z>.

    F must expose branch_data(x) -> list of (lam_i, GaussianState);
    undefined branches (caustics) raise inside branch_data and
    propagate.  Only the zero fiber coordinate is supported.
    """
    total = 0.0 + 0.0j
    for lam, state in F.branch_data(x):
        total += np.exp(1j * lam) * pair_with_eZ(state, tol)
    return complex(total)


@dataclass(frozen=True)
class PhasePath:
    """Ordered nonzero complex samples along a path.

    Consecutive samples must differ in argument by less than pi, so
    that the continuous lift is determined by the data.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if values.size < 2:
            raise ValueError("a path needs at least two samples")
        if np.min(np.abs(values)) == 0.0:
            raise ValueError("path passes through zero")
        args = np.angle(values)
        jumps = np.angle(np.exp(1j * np.diff(args)))
        if np.max(np.abs(jumps)) >= math.pi * (1 - 1e-9):
            raise ValueError("argument jump of pi or more between samples")
        object.__setattr__(self, "values", values)


def phase_lift(path: PhasePath, guard: float = 1e-12) -> np.ndarray:
    """Continuous argument samples along the path.

    Rejects paths that come within guard of zero.  For a closed path
    the total increment divided by 2 pi is the integer winding number.
    """
    if np.min(np.abs(path.values)) <= guard:
        raise ValueError("path too close to a zero for a reliable lift")
    args = np.angle(path.values)
    steps = np.angle(np.exp(1j * np.diff(args)))
    return args[0] + np.concatenate([[0.0], np.cumsum(steps)])
