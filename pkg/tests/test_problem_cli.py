import json
import math

import numpy as np
import pytest

from polycond.cli import main
from polycond.errors import ProblemError
from polycond.problem import builtin_problem, example2, load_problem, problem_from_dict, write_problem


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _example_file(tmp_path):
    path = tmp_path / "ex2.json"
    path.write_text(json.dumps({
        "name": "example2",
        "atoms": [[1, -1, 0], [0, 0, 1]],
        "objective": {"type": "quadratic", "Q": [[1, 0], [0, 0]], "b": [0, 1]},
        "f_star": 0.0, "u_star": [0, 0], "z_star_basis": [[0.5, 0.5, 0]],
    }))
    return path


def test_load_example_fixture(tmp_path):
    spec = load_problem(_example_file(tmp_path))
    assert spec.A.shape == (2, 3)
    assert spec.is_quadratic and spec.f_star == 0.0


def test_malformed_json_has_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n "atoms": [[1, 2]\n')
    with pytest.raises(ProblemError, match="line 3"):
        load_problem(p)


@pytest.mark.parametrize("doc, field", [
    ({"atoms": [[1, 0], [0, 1]], "objective": {"type": "quadratic", "Q": [[1]]}}, "objective.Q"),
    ({"atoms": [[1, 0], [0, 1]], "objective": {"type": "quadratic", "Q": [[1, 1], [0, 1]]}},
     "objective.Q"),
    ({"atoms": [[1, float("nan")]], "objective": {"type": "builtin", "name": "logsumexp"}},
     "atoms"),
    ({"objective": {"type": "builtin", "name": "logsumexp"}}, "atoms"),
    ({"atoms": [[1, 0]], "objective": {"type": "builtin", "name": "cosh"}}, "objective.name"),
    ({"atoms": [[1, 0]], "objective": {"type": "builtin", "name": "logsumexp"},
      "domain_norm": "linf"}, "domain_norm"),
    ({"atoms": [[1, 0], [0, 1]], "objective": {"type": "quadratic", "Q": [[1, 0], [0, 1]]},
      "u_star": [0, 0, 0]}, "u_star"),
])
def test_field_errors(doc, field):
    with pytest.raises(ProblemError, match=field.replace(".", r"\.")):
        problem_from_dict(doc)


def test_round_trip_bit_exact(tmp_path):
    spec = builtin_problem("random_quadratic(3,6,7,100)")
    p = tmp_path / "rq.json"
    write_problem(spec, p)
    back = load_problem(p)
    assert np.array_equal(back.A, spec.A)
    assert np.array_equal(back.Q, spec.Q)
    assert np.array_equal(back.b, spec.b)
    ex = tmp_path / "ex.json"
    write_problem(example2(), ex)
    e = load_problem(ex)
    assert np.array_equal(e.z_star_basis[0], example2().z_star_basis[0])


def test_builtins():
    assert builtin_problem("simplex(3)").A.shape == (3, 3)
    assert builtin_problem("l1ball(2)").A.shape == (2, 4)
    with pytest.raises(ProblemError):
        builtin_problem("simplex(1)")
    with pytest.raises(ProblemError):
        builtin_problem("cube(3)")


@pytest.mark.parametrize("name, phi", [("simplex(4)", 1.0), ("l1ball(2)", 1.0),
                                       ("simplex(5)", 2 / math.sqrt(5 - 1 / 5))])
def test_cli_phi(capsys, name, phi):
    code, out, _ = _run(capsys, "phi", "--builtin", name)
    assert code == 0
    d = json.loads(out)
    assert d["phi"] == pytest.approx(phi, abs=1e-9)
    assert {"diam", "face_count", "minimizing_face"} <= set(d)


def test_cli_constants_identity(capsys):
    code, out, _ = _run(capsys, "constants", "--builtin", "simplex(4)")
    assert code == 0
    assert json.loads(out)["kappa_rel"] == pytest.approx(2.0)


def test_cli_constants_example(capsys, tmp_path):
    code, out, _ = _run(capsys, "constants", "--problem", str(_example_file(tmp_path)))
    d = json.loads(out)
    assert d["mu_rel"] == 0.0
    assert d["mu_star_lb"] == pytest.approx(0.5, abs=1e-9)


def test_cli_constants_scaling(capsys, tmp_path):
    spec = builtin_problem("random_quadratic(2,4,1,10)")
    write_problem(spec.scaled(3.0), tmp_path / "s.json")
    _, a, _ = _run(capsys, "constants", "--builtin", "random_quadratic(2,4,1,10)")
    _, b, _ = _run(capsys, "constants", "--problem", str(tmp_path / "s.json"))
    assert json.loads(a)["kappa_rel"] == pytest.approx(json.loads(b)["kappa_rel"], rel=1e-12)


@pytest.mark.parametrize("algo", ["fw-away", "pg"])
def test_cli_solve_verify(capsys, tmp_path, algo):
    trace = tmp_path / "t.csv"
    code, _, _ = _run(capsys, "solve", "--builtin", "simplex(4)", "--algo", algo,
                      "--iters", "60", "--out", str(trace))
    assert code == 0
    code, out, _ = _run(capsys, "verify", "--builtin", "simplex(4)", "--algo", algo,
                        "--trace", str(trace))
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "k,primal_gap,bound,holds"
    assert rows[1].endswith(",1")


def test_cli_verify_violation(capsys, tmp_path):
    trace = tmp_path / "t.csv"
    _run(capsys, "solve", "--builtin", "simplex(4)", "--iters", "10", "--out", str(trace))
    lines = trace.read_text().splitlines()
    first = lines[1].split(",")
    bad = lines[5].split(",")
    bad[1] = first[1]
    lines[5] = ",".join(bad)
    trace.write_text("\n".join(lines) + "\n")
    code, _, _ = _run(capsys, "verify", "--builtin", "simplex(4)", "--trace", str(trace))
    assert code == 1


def test_cli_example_solve(capsys, tmp_path):
    trace = tmp_path / "t.csv"
    _run(capsys, "solve", "--problem", str(_example_file(tmp_path)), "--iters", "200",
         "--out", str(trace))
    last = trace.read_text().splitlines()[-1].split(",")
    assert abs(float(last[1])) <= 1e-8


def test_cli_estimate_reproducible(capsys):
    args = ("estimate", "--builtin", "random_quadratic(2,4,2,10)", "--samples", "200",
            "--seed", "3")
    code, a, _ = _run(capsys, *args)
    assert code == 0
    _, b, _ = _run(capsys, *args)
    assert a == b
    d = json.loads(a)
    assert d["mu_est"] >= d["closed_form"]["mu_rel"] - 1e-8
    assert d["L_est"] <= d["closed_form"]["L_rel"] + 1e-8


def test_cli_estimate_example_grid(capsys, tmp_path):
    code, out, _ = _run(capsys, "estimate", "--problem", str(_example_file(tmp_path)),
                        "--samples", "50", "--grid-step", "0.01")
    assert 0.45 <= json.loads(out)["mu_star_est"] <= 0.55


def test_cli_input_errors(capsys, tmp_path):
    assert _run(capsys, "phi")[0] == 2
    assert _run(capsys, "phi", "--builtin", "bogus")[0] == 2
    assert _run(capsys, "phi", "--problem", str(tmp_path / "missing.json"))[0] == 2
    assert _run(capsys, "verify", "--builtin", "simplex(3)")[0] == 2
    code, _, err = _run(capsys, "verify", "--builtin", "simplex(3)", "--trace",
                        str(tmp_path / "none.csv"))
    assert code == 2 and "input error" in err


def test_cli_size_cap(capsys, tmp_path):
    p = tmp_path / "big.json"
    A = np.random.default_rng(0).normal(size=(2, 17))
    p.write_text(json.dumps({"atoms": A.tolist(),
                             "objective": {"type": "builtin", "name": "half_sq_norm"}}))
    assert _run(capsys, "phi", "--problem", str(p))[0] == 2


def test_cli_campaign(capsys, tmp_path):
    out = tmp_path / "camp"
    code, text, _ = _run(capsys, "campaign", "--builtin", "random_quadratic(2,4,0,10)",
                         "--cells", "2", "--iters", "50", "--out", str(out))
    assert code == 0
    assert len(json.loads(text)) == 2
    assert sorted(p.name for p in out.iterdir()) == [
        "random_quadratic_2_4_0_10.fw_away.csv", "random_quadratic_2_4_0_10.json",
        "random_quadratic_2_4_0_10.proj_grad.csv", "random_quadratic_2_4_1_10.fw_away.csv",
        "random_quadratic_2_4_1_10.json", "random_quadratic_2_4_1_10.proj_grad.csv"]


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "polycond", "phi", "--builtin", "simplex(3)"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "phi" in r.stdout


def test_cli_numerical_error_exit(capsys, monkeypatch):
    from polycond import cli
    from polycond.errors import ConvergenceError

    def boom(args):
        raise ConvergenceError("did not converge")

    monkeypatch.setattr(cli, "cmd_phi", boom)
    code = cli.main(["phi", "--builtin", "simplex(3)"])
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err
