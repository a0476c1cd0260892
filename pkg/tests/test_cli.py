import os
import subprocess
import sys

import numpy as np
import pytest

from bivkrylov.cli import EXIT_BUDGET, EXIT_ERROR, EXIT_OK, main
from bivkrylov.mmio import read_matrix_market, write_matrix_market


@pytest.fixture
def spd(tmp_path, rng):
    Q, _ = np.linalg.qr(rng.standard_normal((100, 100)))
    A = Q @ np.diag(np.linspace(0.1, 100, 100)) @ Q.T
    path = tmp_path / "A.mtx"
    write_matrix_market(str(path), (A + A.T) / 2)
    return str(path), (A + A.T) / 2


def _footer(path):
    return dict(line[2:].split("=", 1) for line in open(path).read().splitlines() if line.startswith("# "))


def test_sylvester_solve(tmp_path, spd):
    path, A = spd
    out = tmp_path / "out"
    assert main(["solve", "--A", path, "--tol", "1e-8", "--out", str(out)]) == EXIT_OK
    footer = _footer(out / "trace.csv")
    assert footer["termination"] == "converged"
    assert float(footer["relative_residual"]) <= 1e-6
    U = read_matrix_market(str(out / "U.mtx"))
    X = read_matrix_market(str(out / "X.mtx"))
    V = read_matrix_market(str(out / "V.mtx"))
    Xt = U @ X @ V.T
    rng = np.random.default_rng(0)
    c = rng.standard_normal(100)
    c /= np.linalg.norm(c)
    d = rng.standard_normal(100)
    d /= np.linalg.norm(d)
    res = np.linalg.norm(A @ Xt + Xt @ A.T - np.outer(c, d))
    assert res <= 1e-6
    assert (out / "trace.csv").read_text().splitlines()[0] == "k,l,estimate"


def test_missing_file_names_the_flag(tmp_path, capsys):
    assert main(["solve", "--A", str(tmp_path / "missing.mtx"), "--out", str(tmp_path)]) == EXIT_ERROR
    assert "--A" in capsys.readouterr().err


def test_missing_required_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == EXIT_ERROR
    assert "--A" in capsys.readouterr().err


def test_budget_exhaustion_writes_partial_factors(tmp_path, spd):
    path, _ = spd
    out = tmp_path / "out"
    assert main(["solve", "--A", path, "--k-max", "2", "--out", str(out)]) == EXIT_BUDGET
    assert read_matrix_market(str(out / "U.mtx")).shape == (100, 2)
    assert _footer(out / "trace.csv")["termination"] == "budget_exhausted"


def test_bad_vector_flag(tmp_path, spd, capsys):
    path, _ = spd
    vec = tmp_path / "c.mtx"
    write_matrix_market(str(vec), np.ones(7))
    assert main(["solve", "--A", path, "--c", str(vec), "--out", str(tmp_path)]) == EXIT_ERROR
    assert "--c" in capsys.readouterr().err


def test_bad_k_max(tmp_path, spd, capsys):
    path, _ = spd
    assert main(["solve", "--A", path, "--k-max", "500", "--out", str(tmp_path)]) == EXIT_ERROR
    assert "--k-max" in capsys.readouterr().err


def test_parse_error_names_the_flag(tmp_path, capsys):
    bad = tmp_path / "bad.mtx"
    bad.write_text("%%MatrixMarket matrix coordinate real\n1 1 1\n1 1 1\n")
    assert main(["solve", "--A", str(bad), "--out", str(tmp_path)]) == EXIT_ERROR
    assert "--A: line 1" in capsys.readouterr().err


@pytest.mark.parametrize(
    "function, extra",
    [
        ("time-limited", ["--ts", "0", "--te", "1"]),
        ("frequency-limited", ["--w1", "0", "--w2", "inf"]),
        ("exp-sum", []),
        ("frechet-exp", []),
        ("frechet-sqrtneg", []),
        ("stein", []),
    ],
)
def test_function_modes(tmp_path, function, extra):
    lam = np.linspace(-10, -0.1, 60) if function != "stein" else np.linspace(-0.9, 0.9, 60)
    import scipy.sparse

    path = str(tmp_path / "D.mtx")
    import scipy.io

    scipy.io.mmwrite(path, scipy.sparse.diags(lam).tocoo())
    out = tmp_path / function
    code = main(["solve", "--A", path, "--function", function, "--seed", "4", "--out", str(out)] + extra)
    assert code == EXIT_OK
    assert (out / "X.mtx").exists()


def test_explicit_vectors_and_b(tmp_path, spd):
    path, A = spd
    cpath, dpath, bpath = (str(tmp_path / n) for n in ("c.mtx", "d.mtx", "B.mtx"))
    write_matrix_market(cpath, np.ones(100))
    write_matrix_market(dpath, np.arange(1.0, 51.0))
    write_matrix_market(bpath, np.diag(np.linspace(1, 2, 50)))
    out = tmp_path / "o"
    assert main(["solve", "--A", path, "--B", bpath, "--c", cpath, "--d", dpath, "--out", str(out)]) == EXIT_OK
    assert read_matrix_market(str(out / "V.mtx")).shape[0] == 50


def test_experiment_to_stdout(capsys):
    assert main(["experiment", "--name", "gramian", "--n", "30", "--k-max", "4", "--times", "0:inf", "0:1"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "# experiment=gramian"
    assert "t_s,t_e,k,error,error_fro" in lines
    assert len([ln for ln in lines if not ln.startswith("#")]) == 1 + 8


def test_experiment_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["experiment", "--name", "frechet", "--n", "40", "--k-max", "6", "--seed", "9"]
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_experiment_seed_from_environment(tmp_path, monkeypatch):
    args = ["experiment", "--n", "20", "--k-max", "3", "--times", "0:inf"]
    monkeypatch.setenv("BIVKRYLOV_SEED", "9")
    main(args + ["--out", str(tmp_path / "env.csv")])
    main(args + ["--seed", "9", "--out", str(tmp_path / "flag.csv")])
    assert (tmp_path / "env.csv").read_bytes() == (tmp_path / "flag.csv").read_bytes()


def test_experiment_bad_flag(capsys):
    assert main(["experiment", "--n", "10", "--k-max", "20"]) == EXIT_ERROR
    assert "--k-max" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "bivkrylov", "solve", "--A", str(tmp_path / "none.mtx")],
        capture_output=True, text=True, env={**os.environ},
    )
    assert proc.returncode == EXIT_ERROR
    assert "--A" in proc.stderr
