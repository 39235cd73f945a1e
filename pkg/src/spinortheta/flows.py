"""Hamiltonian experiments on the cotangent bundle of a torus.

A Hamiltonian is a small Fourier-times-polynomial expression in
(theta, p, t), smoothly blended into |p|^2 outside a momentum window
so that the flow is globally defined and eventually free.  The time
one map is produced by an implicit midpoint integrator that accepts
whole batches of initial conditions, which keeps Newton searches for
fixed points affordable.

The image of the zero section under the time one flow is fitted as a
single Fourier section of the base torus whenever it is a graph; the
resulting branched Lagrangian feeds the coherent-state machinery, and
the coincidence report compares three independently computed point
sets on the base: zeros of the spectrally recovered section, fixed
points of the time one map, and critical points of the lifted phase
of the generating function.  On a circle base the three are expected
to agree at small coupling; this is the graph-case analogue of the
fixed point correspondence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .frobenius import (BranchedLagrangian, FrobeniusConfig, TorusSection,
                        build_frobenius, spectral_cover)
from .theta import generating_function

__all__ = [
    "HamiltonianTerm",
    "HamiltonianSpec",
    "hamiltonian_from_dict",
    "load_hamiltonian",
    "free_hamiltonian",
    "pendulum_hamiltonian",
    "vector_field",
    "integrate_flow",
    "time_one_map",
    "FixedPointRecord",
    "FixedPointSearch",
    "find_fixed_points",
    "GraphError",
    "lagrangian_from_flow",
    "RunConfig",
    "RunReport",
    "coincidence_report",
    "circle_hausdorff",
]


@dataclass(frozen=True)
class HamiltonianTerm:
    """One summand Re(coef e^{i<m,theta>}) prod_j p_j^{k_j} t^l."""

    coef: complex
    theta_freq: tuple
    p_power: tuple
    t_power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coef", complex(self.coef))
        object.__setattr__(self, "theta_freq",
                           tuple(int(m) for m in self.theta_freq))
        object.__setattr__(self, "p_power",
                           tuple(int(k) for k in self.p_power))
        if len(self.theta_freq) != len(self.p_power):
            raise ValueError("theta_freq and p_power must share a length")
        if any(k < 0 for k in self.p_power) or self.t_power < 0:
            raise ValueError("powers must be nonnegative")


def _bump(x):
    out = np.zeros_like(x, dtype=float)
    m = x > 0
    out[m] = np.exp(-1.0 / x[m])
    return out


def _bump_deriv(x):
    out = np.zeros_like(x, dtype=float)
    m = x > 0
    out[m] = np.exp(-1.0 / x[m]) / x[m] ** 2
    return out


@dataclass(frozen=True)
class HamiltonianSpec:
    """Fourier Hamiltonian on T*T^n, free outside a momentum window.

    Inside |p| <= blend_radius the value is the sum of the terms;
    beyond twice the radius it is exactly |p|^2, with a smooth
    partition of unity in between.  steps is the default time grid
    for the unit interval.
    """

    n: int
    terms: tuple
    blend_radius: float
    steps: int = 512

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.blend_radius <= 0:
            raise ValueError("blend radius must be positive")
        if self.steps < 1:
            raise ValueError("steps must be positive")
        for term in self.terms:
            if len(term.theta_freq) != self.n:
                raise ValueError("term dimension does not match n")
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def autonomous(self) -> bool:
        return all(term.t_power == 0 for term in self.terms)

    def _raw(self, theta, p, t):
        val = np.zeros(theta.shape[:-1])
        dth = np.zeros_like(theta)
        dp = np.zeros_like(p)
        for term in self.terms:
            m = np.asarray(term.theta_freq, dtype=float)
            k = np.asarray(term.p_power, dtype=float)
            osc = term.coef * np.exp(1j * (theta @ m))
            mono = np.prod(p ** k, axis=-1) * (t ** term.t_power)
            val += osc.real * mono
            dth += (1j * osc)[..., None].real * m * mono[..., None]
            # derivative of p_j^{k_j}, guarding 0^{-1} at k_j = 0
            for j, kj in enumerate(term.p_power):
                if kj == 0:
                    continue
                rest = np.prod(np.delete(p, j, axis=-1)
                               ** np.delete(k, j), axis=-1)
                dp[..., j] += (osc.real * kj * p[..., j] ** (kj - 1)
                               * rest * (t ** term.t_power))
        return val, dth, dp

    def value(self, theta, p, t: float):
        """Blended Hamiltonian, |p|^2 outside the window."""
        theta = np.asarray(theta, dtype=float)
        p = np.asarray(p, dtype=float)
        raw, _, _ = self._raw(theta, p, t)
        r = np.linalg.norm(p, axis=-1)
        chi = self._chi(r)
        return raw * chi + (1.0 - chi) * np.sum(p * p, axis=-1)

    def _chi(self, r):
        R = self.blend_radius
        a = (2.0 * R - r) / R
        b = (r - R) / R
        ga, gb = _bump(a), _bump(b)
        return ga / (ga + gb)

    def gradient(self, theta, p, t: float):
        """(dH/dtheta, dH/dp) of the blended Hamiltonian."""
        theta = np.asarray(theta, dtype=float)
        p = np.asarray(p, dtype=float)
        raw, dth, dp = self._raw(theta, p, t)
        R = self.blend_radius
        r = np.linalg.norm(p, axis=-1)
        a = (2.0 * R - r) / R
        b = (r - R) / R
        ga, gb = _bump(a), _bump(b)
        chi = ga / (ga + gb)
        dchi = -(_bump_deriv(a) * gb + ga * _bump_deriv(b)) \
            / (R * (ga + gb) ** 2)
        free = np.sum(p * p, axis=-1)
        rsafe = np.where(r > 0, r, 1.0)
        radial = dchi * (raw - free) / rsafe
        dp_eff = (chi[..., None] * dp + radial[..., None] * p
                  + (1.0 - chi)[..., None] * 2.0 * p)
        return chi[..., None] * dth, dp_eff


def _coef_from_doc(c):
    if isinstance(c, (list, tuple)):
        re, im = c
        return complex(float(re), float(im))
    return complex(float(c))


def hamiltonian_from_dict(doc: dict) -> HamiltonianSpec:
    terms = tuple(
        HamiltonianTerm(_coef_from_doc(t["coef"]),
                        tuple(t["theta_freq"]), tuple(t["p_power"]),
                        int(t.get("t_power", 0)))
        for t in doc.get("terms", ()))
    return HamiltonianSpec(int(doc["n"]), terms,
                           float(doc["blend_radius"]),
                           int(doc.get("steps", 512)))


def load_hamiltonian(path: str) -> HamiltonianSpec:
    if str(path).endswith(".toml"):
        import tomli
        with open(path, "rb") as fh:
            return hamiltonian_from_dict(tomli.load(fh))
    with open(path) as fh:
        return hamiltonian_from_dict(json.load(fh))


def free_hamiltonian(n: int, blend_radius: float = 3.0) -> HamiltonianSpec:
    terms = tuple(
        HamiltonianTerm(1.0, (0,) * n,
                        tuple(2 if j == a else 0 for j in range(n)))
        for a in range(n))
    return HamiltonianSpec(n, terms, blend_radius)


def pendulum_hamiltonian(eps: float,
                         blend_radius: float = 2.0) -> HamiltonianSpec:
    terms = (HamiltonianTerm(0.5, (0,), (2,)),
             HamiltonianTerm(eps, (1,), (0,)))
    return HamiltonianSpec(1, terms, blend_radius)


def vector_field(H: HamiltonianSpec, x, t: float):
    """Hamiltonian field: theta' = dH/dp, p' = -dH/dtheta."""
    x = np.asarray(x, dtype=float)
    n = H.n
    dth, dp = H.gradient(x[..., :n], x[..., n:], t)
    return np.concatenate([dp, -dth], axis=-1)


def _advance(H, x, t0, t1, steps):
    """Implicit midpoint march of a batch of states."""
    x = np.array(x, dtype=float)
    h = (t1 - t0) / steps
    for k in range(steps):
        tm = t0 + (k + 0.5) * h
        z = x + h * vector_field(H, x, tm)
        for _ in range(60):
            znew = x + h * vector_field(H, 0.5 * (x + z), tm)
            delta = float(np.max(np.abs(znew - z)))
            z = znew
            if delta < 1e-13:
                break
        else:
            raise ArithmeticError(
                f"midpoint iteration stalled at t = {tm:.4f}; "
                "reduce the step size")
        x = z
    return x


def integrate_flow(H: HamiltonianSpec, x0, t0: float = 0.0,
                   t1: float = 1.0, steps: int = None) -> np.ndarray:
    """Trajectory samples of shape (steps + 1, 2n), covering coords."""
    steps = H.steps if steps is None else int(steps)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (2 * H.n,):
        raise ValueError("x0 must be a single phase point")
    out = np.empty((steps + 1, 2 * H.n))
    out[0] = x0
    h = (t1 - t0) / steps
    for k in range(steps):
        out[k + 1] = _advance(H, out[k], t0 + k * h, t0 + (k + 1) * h, 1)
    return out


def time_one_map(H: HamiltonianSpec, x, steps: int = None) -> np.ndarray:
    steps = H.steps if steps is None else int(steps)
    return _advance(H, x, 0.0, 1.0, steps)


@dataclass(frozen=True)
class FixedPointRecord:
    location: np.ndarray
    residual: float
    nondegeneracy: float
    seed: np.ndarray
    boundary_margin: float


@dataclass(frozen=True)
class FixedPointSearch:
    """Fixed points of the time one map, plus unresolved seeds."""

    records: tuple
    unresolved: tuple

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]


def _wrap(angle):
    return (np.asarray(angle) + np.pi) % (2.0 * np.pi) - np.pi


def _map_defect(H, x, steps):
    """Phi_1(x) - x with the angle part wrapped, batched."""
    y = _advance(H, x, 0.0, 1.0, steps)
    d = y - x
    n = H.n
    d[..., :n] = _wrap(d[..., :n])
    return d


def _map_jacobian(H, x, steps, eps=1e-6):
    m, dim = x.shape
    stencil = np.repeat(x, 2 * dim, axis=0).reshape(m, 2 * dim, dim)
    for j in range(dim):
        stencil[:, 2 * j, j] += eps
        stencil[:, 2 * j + 1, j] -= eps
    image = _advance(H, stencil.reshape(-1, dim), 0.0, 1.0, steps)
    image = image.reshape(m, 2 * dim, dim)
    jac = np.empty((m, dim, dim))
    for j in range(dim):
        jac[:, :, j] = (image[:, 2 * j] - image[:, 2 * j + 1]) / (2 * eps)
    return jac


def find_fixed_points(H: HamiltonianSpec, grid: int = 12, steps: int = None,
                      tol: float = 1e-10, window: float = None,
                      seed: int = 0) -> FixedPointSearch:
    """Newton search for fixed points of the time one map.

    Seeds come from a jittered grid over the torus times the momentum
    window; roots are deduplicated, verified against tol, and rejected
    loudly when det(dPhi_1 - I) vanishes, since the analysis assumes
    nondegeneracy.  Seeds whose Newton iteration stalls are returned
    in the unresolved list.
    """
    n = H.n
    steps = H.steps if steps is None else int(steps)
    window = H.blend_radius if window is None else float(window)
    search_steps = max(32, steps // 4)
    rng = np.random.default_rng(seed)

    axes_t = [np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
              for _ in range(n)]
    np_grid = max(3, grid // 2)
    axes_p = [np.linspace(-window, window, np_grid) for _ in range(n)]
    mesh = np.meshgrid(*axes_t, *axes_p, indexing="ij")
    seeds = np.stack([m.ravel() for m in mesh], axis=-1)
    seeds = seeds + rng.uniform(-0.05, 0.05, seeds.shape)

    x = seeds.copy()
    active = np.arange(len(seeds))
    roots, root_seeds = [], []
    unresolved = []
    for _ in range(25):
        if not len(active):
            break
        defect = _map_defect(H, x[active], search_steps)
        resid = np.max(np.abs(defect), axis=-1)
        done = resid < 1e-9
        for idx in active[done]:
            roots.append(x[idx])
            root_seeds.append(seeds[idx])
        active = active[~done]
        if not len(active):
            break
        defect = defect[~done]
        jac = _map_jacobian(H, x[active], search_steps)
        jac -= np.eye(2 * n)
        keep = []
        for row, idx in enumerate(active):
            try:
                step = np.linalg.solve(jac[row], defect[row])
            except np.linalg.LinAlgError:
                unresolved.append(seeds[idx])
                continue
            norm = np.linalg.norm(step)
            if norm > 1.0:
                step *= 1.0 / norm
            x[idx] = x[idx] - step
            if np.max(np.abs(x[idx][n:])) > 2.0 * window:
                unresolved.append(seeds[idx])
                continue
            keep.append(idx)
        active = np.array(keep, dtype=int)
    unresolved.extend(seeds[i] for i in active)

    records = []
    for root, root_seed in zip(roots, root_seeds):
        if np.max(np.abs(root[n:])) > window + 1e-9:
            continue
        canon = np.concatenate([np.mod(root[:n], 2.0 * np.pi), root[n:]])
        dup = False
        for rec in records:
            dth = _wrap(canon[:n] - rec.location[:n])
            dp = canon[n:] - rec.location[n:]
            if max(np.max(np.abs(dth)), np.max(np.abs(dp))) < 1e-4:
                dup = True
                break
        if dup:
            continue
        # polish and certify at the full step count
        polished = canon.copy()
        for _ in range(8):
            defect = _map_defect(H, polished[None], steps)[0]
            if np.max(np.abs(defect)) < tol:
                break
            jac = _map_jacobian(H, polished[None], steps)[0]
            jac -= np.eye(2 * n)
            polished = polished - np.linalg.solve(jac, defect)
        defect = _map_defect(H, polished[None], steps)[0]
        residual = float(np.max(np.abs(defect)))
        if residual > tol:
            unresolved.append(root_seed)
            continue
        jac = _map_jacobian(H, polished[None], steps)[0]
        nondeg = float(np.linalg.det(jac - np.eye(2 * n)))
        if abs(nondeg) < 1e-8:
            raise ArithmeticError(
                f"degenerate fixed point at {np.round(polished, 6)}: "
                f"det(dPhi_1 - I) = {nondeg:.3e}; the analysis assumes "
                "nondegenerate fixed points")
        margin = float(window - np.max(np.abs(polished[n:])))
        records.append(FixedPointRecord(polished, residual, nondeg,
                                        root_seed, margin))
    records.sort(key=lambda r: tuple(r.location))
    return FixedPointSearch(tuple(records), tuple(unresolved))


class GraphError(ArithmeticError):
    """The flowed section is not a graph over the base."""

    def __init__(self, message, branches=None):
        super().__init__(message)
        self.branches = branches


def _trig_coeffs(values):
    """Fourier data of a real grid sample, as (freqs list, coeffs)."""
    shape = values.shape
    coeffs = np.fft.fftn(values) / values.size
    freqs = [np.fft.fftfreq(N, d=1.0 / N).astype(int) for N in shape]
    return freqs, coeffs


def _trig_eval(freqs, coeffs, points):
    out = np.zeros(points.shape[:-1], dtype=complex)
    it = np.nditer(coeffs, flags=["multi_index"])
    for c in it:
        if abs(c) < 1e-15:
            continue
        m = np.array([freqs[a][it.multi_index[a]]
                      for a in range(points.shape[-1])], dtype=float)
        out += complex(c) * np.exp(1j * (points @ m))
    return out.real


def lagrangian_from_flow(H: HamiltonianSpec, samples: int = 64,
                         steps: int = None,
                         closedness_tol: float = 1e-6) -> BranchedLagrangian:
    """The time one image of the zero section, fitted as one branch.

    The flow is sampled on a regular base grid, the base displacement
    is inverted spectrally (the graph condition is that the inverse
    exists, i.e. the base projection keeps its orientation), and the
    transported momentum is refitted on the regular grid.  The result
    is exact to spectral accuracy for smooth graphs.
    """
    n = H.n
    steps = H.steps if steps is None else int(steps)
    axes = [2.0 * np.pi * np.arange(samples) / samples for _ in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    theta0 = np.stack(mesh, axis=-1)
    flat = theta0.reshape(-1, n)
    x0 = np.concatenate([flat, np.zeros_like(flat)], axis=-1)
    x1 = _advance(H, x0, 0.0, 1.0, steps)
    disp = _wrap(x1[:, :n] - flat).reshape(theta0.shape)
    pvals = x1[:, n:].reshape(theta0.shape)

    dfreqs, dcoeffs = zip(*(_trig_coeffs(disp[..., a]) for a in range(n)))
    npoints = disp[..., 0].size
    jac = np.empty(disp.shape[:-1] + (n, n))
    for a in range(n):
        for b in range(n):
            mb = dcoeffs[a] * (1j * dfreqs[a][b].reshape(
                [-1 if c == b else 1 for c in range(n)]))
            jac[..., a, b] = np.fft.ifftn(mb).real * npoints \
                + (1.0 if a == b else 0.0)
    dets = np.linalg.det(jac)
    if np.min(dets) <= 0.0:
        if n == 1:
            signs = np.sign(dets.ravel())
            folds = int(np.sum(signs[1:] != signs[:-1]))
            folds += int(signs[0] != signs[-1])
            raise GraphError(
                "the flowed section is not a graph over the base: the "
                "projection folds; covering multiplicity up to "
                f"{1 + folds}", branches=1 + folds)
        raise GraphError("the flowed section is not a graph over the "
                         "base: the projection loses orientation")

    # invert theta -> theta + D(theta) on the sample grid
    target = theta0.reshape(-1, n)
    if n == 1:
        # seed from the monotone unwrapped profile
        fine = np.linspace(0.0, 2.0 * np.pi, 8 * samples,
                           endpoint=False)[:, None]
        prof = fine[:, 0] + _trig_eval(dfreqs[0], dcoeffs[0], fine)
        lo = prof[0]
        inv = np.interp((target[:, 0] - lo) % (2.0 * np.pi) + lo,
                        np.concatenate([prof, [prof[0] + 2.0 * np.pi]]),
                        np.concatenate([fine[:, 0], [2.0 * np.pi]]))
        inv = inv[:, None]
    else:
        dval = np.stack([_trig_eval(dfreqs[a], dcoeffs[a], target)
                         for a in range(n)], axis=-1)
        inv = target - dval
    for _ in range(60):
        dval = np.stack([_trig_eval(dfreqs[a], dcoeffs[a], inv)
                         for a in range(n)], axis=-1)
        defect = inv + dval - target
        if float(np.max(np.abs(defect))) < 1e-12:
            break
        jmat = np.empty(inv.shape[:1] + (n, n))
        for a in range(n):
            for b in range(n):
                mb = dcoeffs[a] * (1j * dfreqs[a][b].reshape(
                    [-1 if c == b else 1 for c in range(n)]))
                jmat[:, a, b] = _trig_eval(dfreqs[a], mb, inv) \
                    + (1.0 if a == b else 0.0)
        step = np.linalg.solve(jmat, defect[..., None])[..., 0]
        norms = np.linalg.norm(step, axis=-1, keepdims=True)
        scale = np.where(norms > 0.8, 0.8 / np.maximum(norms, 1e-12), 1.0)
        inv = inv - scale * step
    else:
        raise GraphError("base projection could not be inverted")

    pfreqs, pcoeffs = zip(*(_trig_coeffs(pvals[..., a]) for a in range(n)))
    section = np.stack([_trig_eval(pfreqs[a], pcoeffs[a], inv)
                        for a in range(n)], axis=-1)
    section = section.reshape(theta0.shape)

    sfreqs, scoeffs = zip(*(_trig_coeffs(section[..., a])
                            for a in range(n)))
    eta = np.array([float(scoeffs[a][(0,) * n].real) for a in range(n)])
    full: dict = {}
    worst = 0.0
    scale = max(1.0, float(np.max(np.abs(section))))
    it = np.nditer(scoeffs[0], flags=["multi_index"])
    for _ in it:
        freq = tuple(int(sfreqs[0][a][it.multi_index[a]])
                     for a in range(n))
        if not any(freq):
            continue
        comps = np.array([complex(scoeffs[a][it.multi_index])
                          for a in range(n)])
        mvec = np.array(freq, dtype=float)
        fm = complex(np.sum(-1j * mvec * comps)) / float(mvec @ mvec)
        worst = max(worst, float(np.max(np.abs(1j * mvec * fm - comps))))
        full[freq] = fm
    if worst > closedness_tol:
        raise ArithmeticError(
            f"fitted section is not closed: residual {worst:.3e} "
            f"exceeds {closedness_tol:.1e}")
    # enforce the conjugate symmetry of a real fit, then drop noise
    fourier = {}
    for m, c in full.items():
        value = 0.5 * (c + np.conj(full.get(tuple(-x for x in m), 0.0)))
        if abs(value) > 1e-13 * scale:
            fourier[m] = value
    return BranchedLagrangian((TorusSection(n, fourier, eta),))


def circle_hausdorff(a, b) -> float:
    """Hausdorff distance between finite subsets of the circle."""
    a, b = list(a), list(b)
    if not a and not b:
        return 0.0
    if not a or not b:
        return math.inf

    def directed(xs, ys):
        return max(min(abs(float(_wrap(x - y))) for y in ys) for x in xs)

    return max(directed(a, b), directed(b, a))


def _section_zeros(F, grid):
    """Roots of the spectrally recovered covector on the circle."""
    cover = spectral_cover(F)
    vals = cover.covectors[0][:, 0]
    freqs, coeffs = _trig_coeffs(vals)

    def p_of(theta):
        return float(_trig_eval(freqs, coeffs,
                                np.array([[theta]]))[0])

    dense = np.linspace(0.0, 2.0 * np.pi, max(8 * grid, 64),
                        endpoint=False)
    samples = [p_of(t) for t in dense]
    zeros = []
    for i, t in enumerate(dense):
        t2 = dense[(i + 1) % len(dense)] + (2.0 * np.pi if i + 1 ==
                                            len(dense) else 0.0)
        v1, v2 = samples[i], samples[(i + 1) % len(dense)]
        if v1 == 0.0:
            zeros.append(float(t))
            continue
        if v1 * v2 < 0.0:
            lo, hi = t, t2
            flo = v1
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = p_of(mid)
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            zeros.append(float(np.mod(0.5 * (lo + hi), 2.0 * np.pi)))
    return sorted(zeros), float(np.max(np.abs(vals))) if len(vals) else 0.0


def _phase_critical(F, grid):
    """Critical points of the lifted generating-function phase."""
    h = 1e-5

    def slope(theta):
        hi = generating_function(F, np.array([theta + h]))
        lo = generating_function(F, np.array([theta - h]))
        return float(np.angle(hi / lo)) / (2.0 * h)

    dense = np.linspace(0.0, 2.0 * np.pi, max(4 * grid, 48),
                        endpoint=False)
    samples = [slope(t) for t in dense]
    crit = []
    for i, t in enumerate(dense):
        t2 = dense[(i + 1) % len(dense)] + (2.0 * np.pi if i + 1 ==
                                            len(dense) else 0.0)
        v1, v2 = samples[i], samples[(i + 1) % len(dense)]
        if v1 == 0.0:
            crit.append(float(t))
            continue
        if v1 * v2 < 0.0:
            lo, hi = t, t2
            flo = v1
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = slope(mid)
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            crit.append(float(np.mod(0.5 * (lo + hi), 2.0 * np.pi)))
    return sorted(crit)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tol: float = 1e-4
    grid: int = 16
    steps: int = 512
    samples: int = 64


@dataclass(frozen=True)
class RunReport:
    """Deterministic, JSON-serializable record of one experiment."""

    schema: int
    label: str
    config: dict
    sets: dict
    distances: dict
    passed: bool
    diagnostics: tuple = ()

    def to_json(self) -> str:
        doc = {
            "schema": self.schema,
            "label": self.label,
            "config": self.config,
            "sets": self.sets,
            "distances": self.distances,
            "passed": self.passed,
            "diagnostics": list(self.diagnostics),
        }
        return json.dumps(doc, sort_keys=True)


def coincidence_report(H: HamiltonianSpec,
                       config: RunConfig = None) -> RunReport:
    """Three detectors for the base points of Theorem-style
    coincidences, with pairwise Hausdorff distances.

    (i) zeros of the section recovered by the spectral cover of the
    fitted Lagrangian, (ii) fixed points of the time one map with
    momentum inside the window, (iii) critical points of the lifted
    phase of the generating function.  Only circle bases are wired
    up; the report is labelled as the graph-case analogue of the
    fixed point correspondence.
    """
    if H.n != 1:
        raise NotImplementedError("coincidence reports cover T*T^1 only")
    config = config or RunConfig()
    diagnostics = []

    L = lagrangian_from_flow(H, samples=config.samples, steps=config.steps)
    F = build_frobenius(L, FrobeniusConfig(shape=_cover_shape(L, config)))
    zeros, _ = _section_zeros(F, config.grid)

    search = find_fixed_points(H, grid=config.grid, steps=config.steps,
                               seed=config.seed)
    fixed = []
    for rec in search.records:
        fixed.append(float(rec.location[0]))
        if abs(rec.location[1]) > config.tol:
            diagnostics.append(
                f"fixed point at theta = {rec.location[0]:.6f} sits off "
                f"the zero section (p = {rec.location[1]:.2e})")
        if rec.boundary_margin < 0.1 * H.blend_radius:
            diagnostics.append(
                f"fixed point at theta = {rec.location[0]:.6f} is close "
                f"to the momentum window boundary "
                f"(margin {rec.boundary_margin:.3f})")
    fixed.sort()
    if search.unresolved:
        diagnostics.append(f"{len(search.unresolved)} Newton seeds "
                           "unresolved")

    crit = _phase_critical(F, config.grid)

    pairs = {
        "section_vs_fixed": circle_hausdorff(zeros, fixed),
        "section_vs_phase": circle_hausdorff(zeros, crit),
        "fixed_vs_phase": circle_hausdorff(fixed, crit),
    }
    counts = {len(zeros), len(fixed), len(crit)}
    passed = len(counts) == 1 and all(
        d <= config.tol for d in pairs.values())
    if len(counts) != 1:
        diagnostics.append(
            f"detector counts differ: section {len(zeros)}, "
            f"fixed {len(fixed)}, phase {len(crit)}")
    for name, d in pairs.items():
        if not d <= config.tol:
            diagnostics.append(f"{name} distance {d:.3e} exceeds "
                               f"{config.tol:.1e}")
    return RunReport(
        schema=1,
        label="graph-case analogue",
        config={"seed": config.seed, "tol": config.tol,
                "grid": config.grid, "steps": config.steps,
                "samples": config.samples},
        sets={
            "section_zeros": {"points": [round(z, 12) for z in zeros],
                              "method": "spectral cover root finding"},
            "fixed_points": {"points": [round(z, 12) for z in fixed],
                             "method": "Newton on the time one map"},
            "phase_critical": {"points": [round(z, 12) for z in crit],
                               "method": "lifted phase slope roots"},
        },
        distances={k: (v if math.isfinite(v) else 1e308)
                   for k, v in pairs.items()},
        passed=passed,
        diagnostics=tuple(diagnostics),
    )


def _cover_shape(L: BranchedLagrangian, config: RunConfig) -> int:
    maxfreq = max(int(b.max_frequency().max()) for b in L.branches)
    return max(config.grid, 2 * maxfreq + 2)
