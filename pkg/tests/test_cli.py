"""Command line behaviour: pinned outputs, exit codes, determinism."""

import json

import numpy as np
import pytest

from spinortheta.cli import main
from spinortheta.frobenius import (BranchedLagrangian, FrobeniusConfig,
                                   TorusSection, build_frobenius,
                                   frobenius_to_json)
from spinortheta.novikov import (FilteredComplex, Generator,
                                 complex_to_json, monomial)


@pytest.fixture
def frob_file(tmp_path):
    sec = TorusSection(1, {(1,): -0.05j, (-1,): 0.05j}, np.array([1.3]))
    F = build_frobenius(BranchedLagrangian((sec,)),
                        FrobeniusConfig(shape=8))
    path = tmp_path / "frob.json"
    path.write_text(frobenius_to_json(F))
    return str(path)


@pytest.fixture
def flat_frob_file(tmp_path):
    sec = TorusSection(1, {}, np.array([1.3]))
    F = build_frobenius(BranchedLagrangian((sec,)),
                        FrobeniusConfig(shape=8))
    path = tmp_path / "flat.json"
    path.write_text(frobenius_to_json(F))
    return str(path)


@pytest.fixture
def complex_file(tmp_path):
    C = FilteredComplex(
        degrees=((Generator("x", 2.0), Generator("y", 0.0)),
                 (Generator("e", 2.0),)),
        boundaries={("e", "x"): monomial(0.0, 1, cutoff=-10.0),
                    ("e", "y"): monomial(0.0, -1, cutoff=-10.0)},
        cutoff=-10.0)
    path = tmp_path / "cx.json"
    path.write_text(complex_to_json(C))
    return str(path)


@pytest.fixture
def ham_file(tmp_path):
    doc = {"n": 1, "blend_radius": 2.0,
           "terms": [{"coef": 0.5, "theta_freq": [0], "p_power": [2]},
                     {"coef": [0.0, -0.01], "theta_freq": [1],
                      "p_power": [0]}]}
    path = tmp_path / "ham.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_pinned_theta_value(capsys):
    assert main(["theta", "eval", "--n", "1", "--z", "0",
                 "--omega", "i"]) == 0
    out = capsys.readouterr().out
    assert "theta = 1.0864348112" in out


def test_pinned_fixed_point_bound(capsys):
    assert main(["novikov", "bound", "--b", "1,2,1", "--q", "0,1,0"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "6"


def test_verify_commands_pass(capsys):
    for action in ("algebra", "rep", "coherent"):
        assert main(["verify", action]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert out.count("ok  ") >= 3


def test_verify_json_deterministic(capsys):
    assert main(["verify", "algebra", "--json", "--seed", "4"]) == 0
    first = capsys.readouterr().out
    assert main(["verify", "algebra", "--json", "--seed", "4"]) == 0
    second = capsys.readouterr().out
    assert first == second
    doc = json.loads(first)
    assert doc["schema"] == 1
    assert doc["passed"] is True
    assert all(c["ok"] for c in doc["checks"])


def test_theta_json_roundtrip(capsys):
    assert main(["theta", "eval", "--z", "0", "--omega", "i",
                 "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(doc["values"]["theta_re"] - 1.0864348112) < 1e-9
    assert doc["schema"] == 1


def test_missing_argument_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["theta", "eval", "--z", "0"])
    assert exc.value.code == 2


def test_malformed_counts_exit_2(capsys):
    assert main(["novikov", "bound", "--b", "1,2", "--q", "0,1,0"]) == 2
    assert "usage error" in capsys.readouterr().err


def test_missing_file_exits_2(capsys):
    assert main(["frobenius", "build", "--input", "/no/such.json"]) == 2
    assert "usage error" in capsys.readouterr().err


def test_frobenius_build_and_spectral(capsys, frob_file):
    assert main(["frobenius", "build", "--input", frob_file]) == 0
    out = capsys.readouterr().out
    assert "branches k = 1" in out
    assert main(["frobenius", "spectral", "--input", frob_file]) == 0
    out = capsys.readouterr().out
    assert "ok   frobenius.roundtrip" in out
    assert "ok   frobenius.closedness" in out


def test_frobenius_spectrum_flat_branch(capsys, flat_frob_file):
    assert main(["frobenius", "spectrum", "--input", flat_frob_file]) == 0
    out = capsys.readouterr().out
    assert "w_1 = 0.0000000000 + 1.0000000000 i" in out


def test_frobenius_spectrum_curved_fails(capsys, frob_file):
    assert main(["frobenius", "spectrum", "--input", frob_file]) == 1
    err = capsys.readouterr().err
    assert "FAIL frobenius.spectrum" in err


def test_flow_fixed_points_cli(capsys, ham_file):
    assert main(["flow", "fixed-points", "--hamiltonian", ham_file,
                 "--grid", "8", "--steps", "128"]) == 0
    out = capsys.readouterr().out
    assert "2 fixed point(s)" in out
    assert "nondegeneracy" in out


def test_flow_degenerate_exits_1(capsys, tmp_path):
    path = tmp_path / "zero.json"
    path.write_text(json.dumps({"n": 1, "blend_radius": 2.0,
                                "terms": []}))
    assert main(["flow", "fixed-points", "--hamiltonian", str(path),
                 "--grid", "6", "--steps", "32"]) == 1
    err = capsys.readouterr().err
    assert "degenerate" in err


def test_flow_coincidence_json_deterministic(capsys, ham_file):
    argv = ["flow", "coincidence", "--hamiltonian", ham_file,
            "--json", "--grid", "8", "--steps", "128",
            "--samples", "32"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    second = capsys.readouterr().out
    assert first == second
    doc = json.loads(first)
    assert doc["schema"] == 1
    assert doc["label"] == "graph-case analogue"
    assert doc["passed"] is True


def test_flow_coincidence_refinement_via_cli(capsys, ham_file):
    dists = []
    for grid, steps in ((8, 128), (16, 256)):
        assert main(["flow", "coincidence", "--hamiltonian", ham_file,
                     "--json", "--grid", str(grid), "--steps",
                     str(steps), "--samples", "32"]) == 0
        dists.append(json.loads(capsys.readouterr().out)["distances"])
    for key, coarse in dists[0].items():
        assert dists[1][key] <= 2.0 * max(coarse, 1e-8)


def test_flow_coincidence_text_mode(capsys, ham_file):
    assert main(["flow", "coincidence", "--hamiltonian", ham_file,
                 "--grid", "8", "--steps", "128", "--samples",
                 "32"]) == 0
    out = capsys.readouterr().out
    assert "label: graph-case analogue" in out
    assert out.rstrip().endswith("PASS")


def test_novikov_rho_cli(capsys, complex_file):
    assert main(["novikov", "rho", "--complex", complex_file,
                 "--chain", "x"]) == 0
    out = capsys.readouterr().out
    assert "rho = 0.0000000000" in out
    assert "generator y" in out
    # shifting the class shifts rho by the same amount
    assert main(["novikov", "rho", "--complex", complex_file,
                 "--chain", "x:1:0.5"]) == 0
    assert "rho = 0.5000000000" in capsys.readouterr().out


def test_novikov_rho_boundary_exits_1(capsys, complex_file):
    assert main(["novikov", "rho", "--complex", complex_file,
                 "--chain", "x;y:-1"]) == 1
    err = capsys.readouterr().err
    assert "FAIL novikov.rho" in err
