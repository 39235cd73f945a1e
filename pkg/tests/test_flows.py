"""Flow harness: integrator, fixed points, section fits, coincidence."""

import json

import numpy as np
import pytest

from spinortheta.flows import (GraphError, HamiltonianSpec, HamiltonianTerm,
                               RunConfig, circle_hausdorff,
                               coincidence_report, find_fixed_points,
                               free_hamiltonian, hamiltonian_from_dict,
                               integrate_flow, lagrangian_from_flow,
                               load_hamiltonian, pendulum_hamiltonian,
                               time_one_map, vector_field)

TWO_PI = 2.0 * np.pi


def sine_well(eps, blend=2.0):
    """H = p^2/2 + eps sin(theta)."""
    return HamiltonianSpec(1, (HamiltonianTerm(0.5, (0,), (2,)),
                               HamiltonianTerm(-1j * eps, (1,), (0,))),
                           blend)


def test_term_validation():
    with pytest.raises(ValueError):
        HamiltonianTerm(1.0, (1, 0), (2,))
    with pytest.raises(ValueError):
        HamiltonianTerm(1.0, (1,), (-1,))
    with pytest.raises(ValueError):
        HamiltonianTerm(1.0, (1,), (0,), t_power=-2)


def test_spec_validation():
    with pytest.raises(ValueError):
        HamiltonianSpec(0, (), 1.0)
    with pytest.raises(ValueError):
        HamiltonianSpec(1, (), -1.0)
    with pytest.raises(ValueError):
        HamiltonianSpec(2, (HamiltonianTerm(1.0, (1,), (0,)),), 1.0)
    assert pendulum_hamiltonian(0.1).autonomous
    timed = HamiltonianSpec(1, (HamiltonianTerm(1.0, (0,), (2,), 1),), 1.0)
    assert not timed.autonomous


def test_value_formula():
    # H = 0.3 cos(2 theta) p + 0.1 t p^2 inside the window
    H = HamiltonianSpec(1, (HamiltonianTerm(0.3, (2,), (1,)),
                            HamiltonianTerm(0.1, (0,), (2,), 1)), 3.0)
    th, p, t = 0.7, np.array([0.4]), 0.9
    got = float(H.value(np.array([th]), p, t))
    want = 0.3 * np.cos(2 * th) * 0.4 + 0.1 * t * 0.16
    assert abs(got - want) < 1e-14


def test_blending_window():
    H = pendulum_hamiltonian(0.5, blend_radius=1.0)
    inside = float(H.value(np.array([0.3]), np.array([0.5]), 0.0))
    assert abs(inside - (0.125 + 0.5 * np.cos(0.3))) < 1e-14
    outside = float(H.value(np.array([0.3]), np.array([2.5]), 0.0))
    assert outside == 2.5 ** 2
    mid = float(H.value(np.array([0.3]), np.array([1.5]), 0.0))
    assert np.isfinite(mid)


def test_gradient_matches_finite_differences():
    H = HamiltonianSpec(2, (HamiltonianTerm(0.5, (0, 0), (2, 0)),
                            HamiltonianTerm(0.5, (0, 0), (0, 2)),
                            HamiltonianTerm(0.2 - 0.1j, (1, -1), (0, 0)),
                            HamiltonianTerm(0.05, (2, 0), (1, 1), 1)), 1.0)
    rng = np.random.default_rng(7)
    h = 1e-6
    for radius in (0.4, 1.4, 2.3):
        th = rng.uniform(0, TWO_PI, 2)
        direction = rng.normal(size=2)
        p = radius * direction / np.linalg.norm(direction)
        t = 0.7
        dth, dp = H.gradient(th, p, t)
        for j in range(2):
            e = np.eye(2)[j]
            fd = (H.value(th + h * e, p, t) - H.value(th - h * e, p, t)) \
                / (2 * h)
            assert abs(float(dth[j]) - float(fd)) < 1e-6
            fd = (H.value(th, p + h * e, t) - H.value(th, p - h * e, t)) \
                / (2 * h)
            assert abs(float(dp[j]) - float(fd)) < 1e-6


def test_spec_io_roundtrip(tmp_path):
    doc = {"n": 1, "blend_radius": 2.0, "steps": 256,
           "terms": [{"coef": 0.5, "theta_freq": [0], "p_power": [2]},
                     {"coef": [0.0, -0.01], "theta_freq": [1],
                      "p_power": [0], "t_power": 0}]}
    jpath = tmp_path / "spec.json"
    jpath.write_text(json.dumps(doc))
    tpath = tmp_path / "spec.toml"
    tpath.write_text(
        'n = 1\nblend_radius = 2.0\nsteps = 256\n'
        '[[terms]]\ncoef = 0.5\ntheta_freq = [0]\np_power = [2]\n'
        '[[terms]]\ncoef = [0.0, -0.01]\ntheta_freq = [1]\n'
        'p_power = [0]\nt_power = 0\n')
    want = HamiltonianSpec(1, (HamiltonianTerm(0.5, (0,), (2,)),
                               HamiltonianTerm(-0.01j, (1,), (0,))),
                           2.0, steps=256)
    assert load_hamiltonian(str(jpath)) == want
    assert load_hamiltonian(str(tpath)) == want
    assert hamiltonian_from_dict(doc) == want


def test_free_flow_is_a_shift():
    H = free_hamiltonian(1)
    for p in (0.0, 0.7, -2.0, 8.0):
        end = time_one_map(H, np.array([1.0, p]), steps=64)
        assert np.max(np.abs(end - [1.0 + 2.0 * p, p])) < 1e-10


def test_zero_hamiltonian_identity():
    H = HamiltonianSpec(1, (), 2.0)
    traj = integrate_flow(H, np.array([2.0, 0.5]), steps=32)
    assert np.array_equal(traj[0], traj[-1])


def test_energy_drift_default_step():
    H = pendulum_hamiltonian(0.3)
    x0 = np.array([1.0, 0.4])
    traj = integrate_flow(H, x0)
    e0 = float(H.value(x0[:1], x0[1:], 0.0))
    e1 = float(H.value(traj[-1][:1], traj[-1][1:], 1.0))
    assert abs(e1 - e0) < 1e-6


def test_second_order_refinement():
    H = pendulum_hamiltonian(0.7)
    x0 = np.array([1.0, 0.3])
    ref = time_one_map(H, x0, steps=4096)
    err = [np.max(np.abs(time_one_map(H, x0, steps=N) - ref))
           for N in (64, 128)]
    ratio = err[0] / err[1]
    assert 3.2 < ratio < 4.8


def test_time_reversal():
    from spinortheta.flows import _advance
    H = pendulum_hamiltonian(0.5)
    x0 = np.array([0.8, -0.2])
    fwd = _advance(H, x0, 0.0, 1.0, 128)
    back = _advance(H, fwd, 1.0, 0.0, 128)
    assert np.max(np.abs(back - x0)) < 1e-10


def test_step_rejection():
    H = pendulum_hamiltonian(80.0, blend_radius=50.0)
    with pytest.raises(ArithmeticError, match="stalled"):
        integrate_flow(H, np.array([1.0, 0.0]), steps=1)


def test_trajectory_shape():
    H = free_hamiltonian(2)
    traj = integrate_flow(H, np.zeros(4), steps=10)
    assert traj.shape == (11, 4)
    with pytest.raises(ValueError):
        integrate_flow(H, np.zeros(3))


def test_pendulum_fixed_points():
    eps = 0.3
    H = pendulum_hamiltonian(eps)
    search = find_fixed_points(H, grid=10, steps=256, seed=3)
    assert len(search) == 2
    assert not search.unresolved
    lam = np.sqrt(eps)
    want = {np.pi: 2.0 * (1.0 - np.cos(lam)),
            0.0: (np.exp(lam) - 1.0) * (np.exp(-lam) - 1.0)}
    seen = []
    for rec in search:
        assert rec.residual < 1e-10
        assert abs(rec.location[1]) < 1e-9
        theta = float(rec.location[0])
        key = min(want, key=lambda w: abs(float(circle_hausdorff(
            [theta], [w]))))
        assert circle_hausdorff([theta], [key]) < 1e-8
        assert abs(rec.nondegeneracy - want[key]) < 1e-3
        assert abs(rec.boundary_margin - H.blend_radius) < 1e-9
        seen.append(key)
    assert sorted(seen) == [0.0, np.pi]


def test_fixed_point_count_matches_sign_change_oracle():
    # V = eps (cos t + 0.3 sin 2t); count roots of V' by bisection
    eps = 0.2
    H = HamiltonianSpec(1, (HamiltonianTerm(0.5, (0,), (2,)),
                            HamiltonianTerm(eps, (1,), (0,)),
                            HamiltonianTerm(-0.3j * eps, (2,), (0,))), 2.0)
    dense = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
    vprime = eps * (-np.sin(dense) + 0.6 * np.cos(2.0 * dense))
    signs = np.sign(vprime)
    oracle = int(np.sum(signs != np.roll(signs, 1)))
    search = find_fixed_points(H, grid=10, steps=128, seed=0)
    assert len(search) == oracle == 2
    for rec in search:
        theta = float(rec.location[0])
        assert abs(eps * (-np.sin(theta) + 0.6 * np.cos(2 * theta))) < 1e-8


def test_degenerate_map_rejected():
    H = HamiltonianSpec(1, (), 2.0)
    with pytest.raises(ArithmeticError, match="degenerate"):
        find_fixed_points(H, grid=6, steps=32)


def test_unreachable_tolerance_reports_seeds_unresolved():
    # even a perfect root cannot satisfy a negative tolerance, so
    # every converged seed must come back in the unresolved list
    H = pendulum_hamiltonian(0.3)
    search = find_fixed_points(H, grid=6, steps=64, tol=-1.0, seed=1)
    assert len(search) == 0
    assert len(search.unresolved) >= 2


def test_search_container_protocol():
    H = pendulum_hamiltonian(0.2)
    search = find_fixed_points(H, grid=8, steps=64, seed=5)
    assert len(search) == 2
    assert search[0].location[0] <= search[1].location[0]
    assert [r.residual for r in search] == [r.residual for r in
                                            search.records]


def test_zero_section_maps_to_zero_section():
    H = HamiltonianSpec(1, (), 2.0)
    L = lagrangian_from_flow(H, samples=16, steps=16)
    sec = L.branches[0]
    assert sec.fourier == {}
    assert float(np.abs(sec.eta[0])) == 0.0


def test_small_coupling_first_order_shape():
    # p(theta) = -eps V'(theta) + O(eps^2) for H = p^2/2 + eps V
    eps = 0.01
    H = sine_well(eps)
    L = lagrangian_from_flow(H, samples=32, steps=256)
    sec = L.branches[0]
    worst = max(abs(float(sec.covector(np.array([t]))[0])
                    - (-eps * np.cos(t)))
                for t in np.linspace(0.0, TWO_PI, 17))
    assert worst < eps ** 2


def test_fitted_section_is_exact():
    # Hamiltonian images of the zero section keep zero periods
    H = pendulum_hamiltonian(0.4)
    L = lagrangian_from_flow(H, samples=48, steps=256)
    assert abs(float(L.branches[0].eta[0])) < 1e-9


def test_fold_raises_with_branch_count():
    H = pendulum_hamiltonian(3.0, blend_radius=4.0)
    with pytest.raises(GraphError, match="fold") as exc:
        lagrangian_from_flow(H, samples=48, steps=256)
    assert exc.value.branches == 3


def test_two_torus_fit():
    eps = 0.02
    H = HamiltonianSpec(2, (HamiltonianTerm(0.5, (0, 0), (2, 0)),
                            HamiltonianTerm(0.5, (0, 0), (0, 2)),
                            HamiltonianTerm(eps, (1, 0), (0, 0))), 2.0)
    L = lagrangian_from_flow(H, samples=16, steps=128)
    sec = L.branches[0]
    pt = np.array([1.1, 2.3])
    want = np.array([eps * np.sin(1.1), 0.0])
    assert np.max(np.abs(sec.covector(pt) - want)) < 2 * eps ** 2


def test_flowed_point_lies_on_fitted_section():
    from spinortheta.flows import _advance
    H = pendulum_hamiltonian(0.4)
    L = lagrangian_from_flow(H, samples=64, steps=256)
    sec = L.branches[0]
    x1 = _advance(H, np.array([[0.7, 0.0]]), 0.0, 1.0, 256)
    theta = float(np.mod(x1[0, 0], TWO_PI))
    assert abs(float(sec.covector(np.array([theta]))[0])
               - float(x1[0, 1])) < 1e-8


def test_circle_hausdorff():
    assert circle_hausdorff([], []) == 0.0
    assert circle_hausdorff([0.0], []) == np.inf
    d = circle_hausdorff([0.1], [TWO_PI - 0.1])
    assert abs(d - 0.2) < 1e-12
    assert circle_hausdorff([0.0, np.pi], [np.pi, 0.0]) < 1e-15


def test_coincidence_sine_well():
    rep = coincidence_report(sine_well(0.01),
                             RunConfig(grid=10, steps=256, samples=32))
    assert rep.schema == 1
    assert rep.label == "graph-case analogue"
    assert rep.passed
    zeros = rep.sets["section_zeros"]["points"]
    assert len(zeros) == 2
    assert circle_hausdorff(zeros, [np.pi / 2, 3 * np.pi / 2]) < 1e-4
    for pair in rep.distances.values():
        assert pair < 1e-4
    counts = {len(v["points"]) for v in rep.sets.values()}
    assert counts == {2}


def test_coincidence_json_deterministic():
    cfg = RunConfig(grid=8, steps=128, samples=32)
    a = coincidence_report(sine_well(0.01), cfg).to_json()
    b = coincidence_report(sine_well(0.01), cfg).to_json()
    assert a == b
    doc = json.loads(a)
    assert doc["schema"] == 1
    assert set(doc["sets"]) == {"section_zeros", "fixed_points",
                                "phase_critical"}
    for entry in doc["sets"].values():
        assert "method" in entry


def test_coincidence_refinement_never_doubles():
    coarse = coincidence_report(sine_well(0.015),
                                RunConfig(grid=8, steps=128, samples=32))
    fine = coincidence_report(sine_well(0.015),
                              RunConfig(grid=16, steps=256, samples=32))
    # floor at the root-finder noise scale, far below the 1e-4 gate
    for key, d1 in coarse.distances.items():
        assert fine.distances[key] <= 2.0 * max(d1, 1e-8)


def test_coincidence_random_small_couplings():
    rng = np.random.default_rng(2026)
    for _ in range(2):
        eps = float(rng.uniform(0.005, 0.02))
        terms = [HamiltonianTerm(0.5, (0,), (2,))]
        for m in (1, 2):
            c = eps * complex(rng.normal(), rng.normal())
            terms.append(HamiltonianTerm(c, (m,), (0,)))
        H = HamiltonianSpec(1, tuple(terms), 2.0)
        rep = coincidence_report(H, RunConfig(grid=10, steps=128,
                                              samples=32))
        assert rep.passed, rep.diagnostics
        counts = {len(v["points"]) for v in rep.sets.values()}
        assert len(counts) == 1


def test_coincidence_boundary_and_off_section_diagnostics():
    # equilibria sit at p = 0.95, near the window edge at 1.0
    H = HamiltonianSpec(1, (HamiltonianTerm(1.0, (0,), (2,)),
                            HamiltonianTerm(-1.9, (0,), (1,)),
                            HamiltonianTerm(0.02, (1,), (0,))), 1.0)
    rep = coincidence_report(H, RunConfig(grid=10, steps=128, samples=32))
    assert not rep.passed
    assert any("window boundary" in d for d in rep.diagnostics)
    assert any("off the zero section" in d for d in rep.diagnostics)


def test_coincidence_rejects_higher_dimensional_base():
    with pytest.raises(NotImplementedError):
        coincidence_report(free_hamiltonian(2))


def test_coincidence_degenerate_flow_propagates():
    with pytest.raises(ArithmeticError, match="degenerate"):
        coincidence_report(HamiltonianSpec(1, (), 2.0),
                           RunConfig(grid=6, steps=32, samples=16))
