"""Command line front end.

Subcommands are grouped by layer:

  verify algebra | rep | coherent     packaged self checks
  theta eval                          lattice sum evaluation
  frobenius build | spectral | spectrum
  flow fixed-points | coincidence
  novikov rho | bound

Exit codes: 0 when every check passes, 1 when a computational check
fails (the first failing identifier is printed), 2 for usage errors.
--json prints a schema-1 report; for a fixed seed the bytes are
identical across runs.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

__all__ = ["main"]


def _parse_complex(text: str) -> complex:
    return complex(text.strip().replace("i", "j").replace(" ", ""))


def _parse_vector(text: str) -> np.ndarray:
    return np.array([_parse_complex(t) for t in text.split(",")])


def _parse_matrix(text: str) -> np.ndarray:
    rows = [[_parse_complex(t) for t in row.split(",")]
            for row in text.split(";")]
    return np.array(rows)


def _parse_ints(text: str):
    return tuple(int(t) for t in text.split(","))


# -- verify -------------------------------------------------------------

def _verify_algebra(args):
    from .weyl import (J0, QC, WeylElement, ad_to_sp, gen_a, gen_b,
                       omega0, oscillator_element, sp_to_weyl,
                       weyl_commutator, weyl_mul)
    n = 2
    checks = []
    comm = weyl_commutator(gen_a(n, 0), gen_b(n, 0))
    checks.append(("algebra.commutator",
                   comm == WeylElement.one(n) * QC(0, -1),
                   "[a_1, b_1] = -i"))
    checks.append(("algebra.disjoint",
                   weyl_commutator(gen_a(n, 0), gen_b(n, 1))
                   == WeylElement.zero(n),
                   "[a_1, b_2] = 0"))
    reorder = weyl_mul(gen_b(n, 0), gen_a(n, 0))
    expect = weyl_mul(gen_a(n, 0), gen_b(n, 0)) \
        + WeylElement.one(n) * QC(0, 1)
    checks.append(("algebra.reorder", reorder == expect, "b a = a b + i"))
    rng = np.random.default_rng(args.seed)
    ok = True
    for _ in range(8):
        v = rng.integers(-3, 4, 2 * n)
        w = rng.integers(-3, 4, 2 * n)
        c = weyl_commutator(WeylElement.from_vector(v),
                            WeylElement.from_vector(w))
        ok = ok and c == WeylElement.one(n) * QC(0, -int(omega0(v, w)))
    checks.append(("algebra.pairing", ok,
                   "[s(v), s(w)] = -i omega0(v, w)"))
    checks.append(("algebra.oscillator",
                   np.array_equal(np.asarray(ad_to_sp(oscillator_element(n)),
                                             dtype=float), -J0(n)),
                   "ad matrix of the oscillator element is -J0"))
    S = np.array([[2, 3], [1, -2]])
    back = np.asarray(ad_to_sp(sp_to_weyl(S)), dtype=float)
    checks.append(("algebra.roundtrip", np.array_equal(back, S),
                   "sp -> quadratic element -> sp round trip"))
    return checks, {"n": n}, "verify algebra"


def _verify_rep(args):
    from .groups import (MpWord, four_letter, gl_letter, quad_letter,
                         schrodinger_sp, word_inverse)
    from .reps import (FockVector, fock_basis, mp_act_gaussian,
                       oscillator_apply, pi_act_gaussian, sigma_matrix,
                       standard_gaussian)
    from .weyl import omega0
    rng = np.random.default_rng(args.seed)
    checks = []
    n, N = 1, 10
    basis = fock_basis(n, N)
    keep = [i for i, k in enumerate(basis) if sum(k) <= N - 2]
    worst = 0.0
    for _ in range(5):
        v = rng.standard_normal(2 * n)
        w = rng.standard_normal(2 * n)
        sv, sw = sigma_matrix(n, N, v), sigma_matrix(n, N, w)
        blk = (sv @ sw - sw @ sv)[np.ix_(keep, keep)] \
            + 1j * omega0(v, w) * np.eye(len(keep))
        worst = max(worst, float(np.max(np.abs(blk))))
    checks.append(("rep.commutation", worst < 1e-10,
                   f"interior commutator defect {worst:.2e}"))
    s = standard_gaussian(n)
    ok = True
    for letter in (gl_letter(np.array([[1.3]])),
                   quad_letter(np.array([[0.4]])), four_letter(n)):
        w = MpWord(n, (letter,))
        v = rng.standard_normal(2 * n)
        t = float(rng.standard_normal())
        lhs = mp_act_gaussian(
            w, pi_act_gaussian(v, t, mp_act_gaussian(word_inverse(w), s)))
        rhs = pi_act_gaussian(schrodinger_sp(w) @ v, t, s)
        ok = ok and lhs.close_to(rhs, tol=1e-12)
    checks.append(("rep.letters", ok,
                   "generator letters intertwine the translations"))
    f = FockVector(n, 6, np.ones(len(fock_basis(n, 6))))
    mu = oscillator_apply(f, "H").coeffs.real
    want = np.array([2 * sum(k) + n for k in fock_basis(n, 6)])
    checks.append(("rep.spectrum",
                   bool(np.array_equal(np.round(mu), want)),
                   "oscillator eigenvalues 2|k| + n"))
    return checks, {"n": n, "N": N}, "verify rep"


def _verify_coherent(args):
    from .coherent import CoherentPoint, annihilation_eigenvalue, \
        coherent_state
    from .reps import gauss_overlap
    rng = np.random.default_rng(args.seed)
    checks = []
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 4))
        h = rng.standard_normal(2 * n)
        M = rng.standard_normal((n, n))
        T = 0.5 * (M + M.T) + 1j * (M @ M.T + np.eye(n))
        lam = np.array([annihilation_eigenvalue(CoherentPoint(h, T), j, "a")
                        for j in range(1, n + 1)])
        worst = max(worst, float(np.max(np.abs(lam - (h[n:] + T @ h[:n])))))
    checks.append(("coherent.eigenvalue", worst < 1e-10,
                   f"lambda_j = (h_2 + T h_1)_j, defect {worst:.2e}"))
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 4))
        h1 = np.abs(rng.standard_normal(n)) + 0.1
        h2 = rng.standard_normal(n)
        Th = np.diag(h2) + 1j * np.diag(h1)
        tilde = np.concatenate([np.ones(n), np.zeros(n)])
        a_shift = [annihilation_eigenvalue(CoherentPoint(tilde, Th), j, "a")
                   for j in range(1, n + 1)]
        a_flat = [annihilation_eigenvalue(
            CoherentPoint(np.concatenate([h1, h2]), 1j * np.eye(n)), j, "a")
            for j in range(1, n + 1)]
        worst = max(worst, float(np.max(np.abs(
            np.array(a_shift) - np.array(a_flat)))))
    checks.append(("coherent.reciprocity", worst < 1e-10,
                   f"label/base swap defect {worst:.2e}"))
    h = rng.standard_normal(4)
    state = coherent_state(CoherentPoint(h, 1j * np.eye(2)))
    defect = abs(gauss_overlap(state, state) - 1.0)
    checks.append(("coherent.normalization", defect < 1e-12,
                   f"unit norm defect {defect:.2e}"))
    return checks, {}, "verify coherent"


# -- evaluation commands ------------------------------------------------

def _theta_eval(args):
    from .theta import ThetaInput, theta_eval
    z = _parse_vector(args.z)
    omega = _parse_matrix(args.omega)
    if args.n is not None and (len(z) != args.n or
                               omega.shape != (args.n, args.n)):
        raise ValueError("--n disagrees with the shapes of z and omega")
    tol = args.tol if args.tol is not None else 1e-10
    out = theta_eval(ThetaInput(z, omega, args.lam), tol)
    lines = [f"theta = {out.value.real:.10f}"
             + (f" + {out.value.imag:.10f} i"
                if abs(out.value.imag) > 5e-11 else ""),
             f"tail bound = {out.tail_bound:.3e}",
             f"summation radius = {out.radius}"]
    values = {"theta_re": round(out.value.real, 12),
              "theta_im": round(out.value.imag, 12),
              "tail_bound": float(out.tail_bound),
              "radius": int(out.radius)}
    checks = [("theta.tail", out.tail_bound <= tol,
               f"tail bound {out.tail_bound:.2e} within {tol:.1e}")]
    return checks, {"lines": lines, **values}, "theta eval"


def _frobenius_load(args):
    from .frobenius import frobenius_from_json
    with open(args.input) as fh:
        return frobenius_from_json(fh.read())


def _frobenius_build(args):
    F = _frobenius_load(args)
    lines = [f"base dimension n = {F.n}",
             f"branches k = {F.k}",
             f"grid shape = {F.shape}"]
    for i, b in enumerate(F.lagrangian.branches, start=1):
        lines.append(f"branch {i}: eta = {np.round(b.eta, 6).tolist()}, "
                     f"{len(b.fourier)} Fourier modes")
    values = {"n": F.n, "k": F.k, "shape": list(F.shape)}
    return [("frobenius.build", True, "structure assembled")], \
        {"lines": lines, **values}, "frobenius build"


def _frobenius_spectral(args):
    from .frobenius import spectral_cover
    F = _frobenius_load(args)
    tol = args.tol if args.tol is not None else 1e-8
    rep = spectral_cover(F)
    lines = [f"roundtrip error = {rep.roundtrip_error:.3e}",
             f"closedness = {rep.closedness:.3e}",
             f"plaquette = {rep.plaquette:.3e}",
             f"periods = {np.round(rep.periods, 8).tolist()}",
             f"ambiguity radius = {rep.ambiguity_radius:.3e}"]
    checks = [("frobenius.roundtrip", rep.roundtrip_error < tol,
               f"cover reproduces the covectors ({rep.roundtrip_error:.2e})"),
              ("frobenius.closedness", rep.closedness < 1e-6,
               f"recovered fields are closed ({rep.closedness:.2e})")]
    values = {"roundtrip": rep.roundtrip_error,
              "closedness": rep.closedness,
              "plaquette": rep.plaquette,
              "periods": np.round(rep.periods, 12).tolist()}
    return checks, {"lines": lines, **values}, "frobenius spectral"


def _frobenius_spectrum(args):
    from .frobenius import compute_spectrum
    F = _frobenius_load(args)
    rep = compute_spectrum(F)
    spread = float(np.max(rep.spread))
    lines = [f"w_{i + 1} = {v.real:.10f} + {v.imag:.10f} i"
             for i, v in enumerate(rep.values)]
    lines.append(f"spread = {spread:.3e}")
    tol = args.tol if args.tol is not None else 1e-5
    checks = [("frobenius.spread", spread < tol,
               f"spectral numbers constant to {spread:.2e}")]
    values = {"values": [[round(float(v.real), 12), round(float(v.imag), 12)]
                         for v in rep.values],
              "spread": spread}
    return checks, {"lines": lines, **values}, "frobenius spectrum"


def _flow_fixed_points(args):
    from .flows import find_fixed_points, load_hamiltonian
    H = load_hamiltonian(args.hamiltonian)
    tol = args.tol if args.tol is not None else 1e-10
    search = find_fixed_points(H, grid=args.grid, steps=args.steps,
                               tol=tol, seed=args.seed)
    lines = []
    for rec in search:
        n = H.n
        lines.append(
            f"theta = {np.round(rec.location[:n], 8).tolist()}  "
            f"p = {np.round(rec.location[n:], 8).tolist()}  "
            f"residual = {rec.residual:.2e}  "
            f"nondegeneracy = {rec.nondegeneracy:.6f}  "
            f"window margin = {rec.boundary_margin:.4f}")
    lines.append(f"{len(search)} fixed point(s), "
                 f"{len(search.unresolved)} unresolved seed(s)")
    checks = [("flow.fixed-points", len(search) > 0,
               f"{len(search)} nondegenerate fixed point(s) found")]
    values = {"count": len(search),
              "unresolved": len(search.unresolved),
              "points": [np.round(rec.location, 10).tolist()
                         for rec in search]}
    return checks, {"lines": lines, **values}, "flow fixed-points"


def _flow_coincidence(args):
    from .flows import RunConfig, coincidence_report, load_hamiltonian
    H = load_hamiltonian(args.hamiltonian)
    tol = args.tol if args.tol is not None else 1e-4
    cfg = RunConfig(seed=args.seed, tol=tol, grid=args.grid,
                    steps=args.steps, samples=args.samples)
    rep = coincidence_report(H, cfg)
    bad = [k for k, d in rep.distances.items() if not d <= tol]
    failure = None
    if not rep.passed:
        failure = ("coincidence." + bad[0]) if bad else "coincidence.counts"
    if args.json:
        print(rep.to_json())
        return None, None, failure
    lines = [f"label: {rep.label}"]
    for name, entry in rep.sets.items():
        lines.append(f"{name}: {entry['points']}  [{entry['method']}]")
    for name, d in rep.distances.items():
        lines.append(f"{name} = {d:.3e}")
    for diag in rep.diagnostics:
        lines.append(f"note: {diag}")
    lines.append("PASS" if rep.passed else "FAIL")
    print("\n".join(lines))
    return None, None, failure


def _novikov_rho(args):
    from .novikov import chain_level, complex_from_json, monomial, \
        spectral_rho
    with open(args.complex) as fh:
        C = complex_from_json(fh.read())
    chain = {}
    for piece in args.chain.split(";"):
        parts = piece.split(":")
        name = parts[0].strip()
        coeff = int(parts[1]) if len(parts) > 1 else 1
        gamma = float(parts[2]) if len(parts) > 2 else 0.0
        chain[name] = monomial(gamma, coeff, cutoff=C.cutoff)
    rho, witness = spectral_rho(C, chain, margin=args.margin,
                                return_witness=True)
    lines = [f"rho = {rho:.10f}",
             f"attained on generator {witness[0]} at exponent "
             f"{witness[1]:.6f}",
             f"input chain level = {chain_level(C, chain):.6f}"]
    checks = [("novikov.spectral", True,
               f"rho attained on a generator ({witness[0]})")]
    values = {"rho": rho, "witness": [witness[0], witness[1]]}
    return checks, {"lines": lines, **values}, "novikov rho"


def _novikov_bound(args):
    from .novikov import fixed_point_bound
    b = _parse_ints(args.b)
    q = _parse_ints(args.q)
    bound = fixed_point_bound(b, q)
    lines = [f"{bound}"]
    return [("novikov.bound", True, f"bound = {bound}")], \
        {"lines": lines, "bound": bound}, "novikov bound"


# -- wiring -------------------------------------------------------------

def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true",
                        help="emit a schema-1 JSON report")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--grid", type=int, default=10)

    top = argparse.ArgumentParser(prog="spinortheta",
                                  description=__doc__.splitlines()[0])
    groups = top.add_subparsers(dest="group", required=True)

    verify = groups.add_parser("verify").add_subparsers(
        dest="action", required=True)
    for name in ("algebra", "rep", "coherent"):
        verify.add_parser(name, parents=[common])

    theta = groups.add_parser("theta").add_subparsers(
        dest="action", required=True)
    te = theta.add_parser("eval", parents=[common])
    te.add_argument("--n", type=int, default=None)
    te.add_argument("--z", required=True)
    te.add_argument("--omega", required=True)
    te.add_argument("--lam", type=float, default=0.0)

    frob = groups.add_parser("frobenius").add_subparsers(
        dest="action", required=True)
    for name in ("build", "spectral", "spectrum"):
        sub = frob.add_parser(name, parents=[common])
        sub.add_argument("--input", required=True)

    flow = groups.add_parser("flow").add_subparsers(
        dest="action", required=True)
    fp = flow.add_parser("fixed-points", parents=[common])
    fp.add_argument("--hamiltonian", required=True)
    fp.add_argument("--steps", type=int, default=256)
    co = flow.add_parser("coincidence", parents=[common])
    co.add_argument("--hamiltonian", required=True)
    co.add_argument("--steps", type=int, default=256)
    co.add_argument("--samples", type=int, default=32)

    nov = groups.add_parser("novikov").add_subparsers(
        dest="action", required=True)
    rho = nov.add_parser("rho", parents=[common])
    rho.add_argument("--complex", required=True)
    rho.add_argument("--chain", required=True,
                     help="semicolon list of name[:coeff[:gamma]]")
    rho.add_argument("--margin", type=float, default=1.0)
    bound = nov.add_parser("bound", parents=[common])
    bound.add_argument("--b", required=True)
    bound.add_argument("--q", required=True)
    return top


_COMMANDS = {
    ("verify", "algebra"): _verify_algebra,
    ("verify", "rep"): _verify_rep,
    ("verify", "coherent"): _verify_coherent,
    ("theta", "eval"): _theta_eval,
    ("frobenius", "build"): _frobenius_build,
    ("frobenius", "spectral"): _frobenius_spectral,
    ("frobenius", "spectrum"): _frobenius_spectrum,
    ("flow", "fixed-points"): _flow_fixed_points,
    ("flow", "coincidence"): _flow_coincidence,
    ("novikov", "rho"): _novikov_rho,
    ("novikov", "bound"): _novikov_bound,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    command = _COMMANDS[(args.group, args.action)]
    try:
        checks, payload, label = command(args)
    except (OSError, json.JSONDecodeError, KeyError, IndexError,
            ValueError, NotImplementedError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"FAIL {args.group}.{args.action}: {exc}", file=sys.stderr)
        return 1
    if checks is None:
        # the command printed its own report (flow coincidence)
        if label is not None:
            print(f"first failure: {label}", file=sys.stderr)
            return 1
        return 0
    passed = all(ok for _, ok, _ in checks)
    if args.json:
        doc = {"schema": 1, "label": label,
               "config": {"seed": args.seed, "tol": args.tol,
                          "grid": args.grid},
               "checks": [{"id": cid, "ok": bool(ok), "detail": detail}
                          for cid, ok, detail in checks],
               "values": {k: v for k, v in payload.items()
                          if k != "lines"},
               "passed": bool(passed)}
        print(json.dumps(doc, sort_keys=True))
    else:
        for line in payload.get("lines", []):
            print(line)
        for cid, ok, detail in checks:
            print(f"{'ok  ' if ok else 'FAIL'} {cid:24s} {detail}")
    if not passed:
        first = next(cid for cid, ok, _ in checks if not ok)
        print(f"first failure: {first}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
