import csv
import io
import json

import pytest

from redcbc import _backend
from redcbc.cbc.io import read_vector
from redcbc.cli import EXIT_BUDGET, EXIT_IO, EXIT_OK, EXIT_VALIDATION, main, predicted_cost

FIXTURE = ["--b", "3", "--m", "4", "--s", "6", "--w", "0,0,1,1,2,2", "--gamma", "j^-2", "--Gamma", "inv_factorial"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


@pytest.fixture(autouse=True)
def keep_backend():
    name = _backend.BACKEND
    yield
    _backend._install(name)


def test_construct_fixture(tmp_path, capsys):
    vec, log = tmp_path / "z.txt", tmp_path / "log.csv"
    code, _, _ = run(["construct", *FIXTURE, "--out", str(vec), "--log", str(log)], capsys)
    assert code == EXIT_OK
    gv = read_vector(vec)
    assert gv.z == (1, 31, 8, 7, 4, 1)
    text = log.read_text()
    assert text.startswith("# config ")
    rows = table(text)
    assert list(rows[0]) == ["j", "w_j", "z_j", "e2_j"]
    assert [int(r["z_j"]) for r in rows] == list(gv.z)


@pytest.mark.parametrize("engine", ["fast", "reference"])
def test_construct_wce_round_trip(tmp_path, capsys, engine):
    vec, log = tmp_path / "z.txt", tmp_path / "log.csv"
    assert main(["construct", *FIXTURE, "--engine", engine, "--out", str(vec), "--log", str(log)]) == 0
    e2_log = float(table(log.read_text())[-1]["e2_j"])
    capsys.readouterr()
    code, out, _ = run(["wce", str(vec), "--gamma", "j^-2", "--Gamma", "inv_factorial", "--oracle"], capsys)
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec["e2"] == pytest.approx(e2_log, rel=1e-12)
    assert rec["rel_diff"] < 1e-9


def test_construct_stdout(capsys):
    code, out, _ = run(["construct", "--b", "2", "--m", "3", "--s", "2"], capsys)
    assert code == 0
    assert out.splitlines()[0].split() == ["2", "3", "2"]


def test_m_zero(capsys):
    code, out, _ = run(["construct", "--b", "2", "--m", "0", "--s", "3"], capsys)
    assert code == 0
    assert [l.split()[2] for l in out.splitlines()[1:]] == ["0", "0", "0"]


def error_record(err):
    rec = json.loads(err.strip().splitlines()[-1])
    assert set(rec) == {"error", "message", "exit_code"}
    return rec


def test_exit_validation(capsys):
    code, _, err = run(["construct", "--b", "4", "--m", "3", "--s", "2"], capsys)
    assert code == EXIT_VALIDATION
    assert "prime" in error_record(err)["message"]
    code, _, err = run(["construct", "--b", "2", "--m", "3", "--s", "3", "--w", "2,1,0"], capsys)
    assert code == EXIT_VALIDATION
    code, _, err = run(["construct", "--nonsense"], capsys)
    assert code == EXIT_VALIDATION


def test_exit_io(tmp_path, capsys):
    code, _, err = run(["wce", str(tmp_path / "missing.txt")], capsys)
    assert code == EXIT_IO
    assert error_record(err)["exit_code"] == EXIT_IO


def test_malformed_vector_file(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("2 3 1\n1 0 3 5\n")
    code, _, _ = run(["wce", str(p)], capsys)
    assert code == EXIT_VALIDATION


def test_exit_budget(capsys):
    code, _, err = run(["construct", "--b", "2", "--m", "20", "--s", "4", "--memory-budget", "1000"], capsys)
    assert code == EXIT_BUDGET
    assert error_record(err)["error"] == "BudgetExceededError"


def test_oracle_budget(tmp_path, capsys):
    vec = tmp_path / "z.txt"
    assert main(["construct", "--b", "2", "--m", "4", "--s", "22", "--out", str(vec)]) == 0
    capsys.readouterr()
    code, _, _ = run(["wce", str(vec), "--oracle"], capsys)
    assert code == EXIT_BUDGET


def test_integrate_constant(tmp_path, capsys):
    vec = tmp_path / "z.txt"
    main(["construct", "--b", "2", "--m", "5", "--s", "3", "--out", str(vec)])
    capsys.readouterr()
    code, out, _ = run(["integrate", str(vec), "--family", "constant", "--param", "3", "--R", "4"], capsys)
    assert code == 0
    row = table(out)[0]
    assert float(row["estimate"]) == 3.0 and float(row["rmse_empirical"]) == 0.0
    assert int(row["N"]) == 32


def test_bench_independent_of_s_beyond_s_star(capsys):
    code, out, _ = run(["bench", "--b", "3", "--m", "5", "--s", "7,100,1000", "--schedules", "linear:1"], capsys)
    assert code == 0
    rows = table(out)
    ops = [float(r["ops"]) for r in rows]
    assert ops[0] == ops[1] == ops[2]
    for r in rows:
        assert float(r["predicted"]) == predicted_cost(3, 5, range(int(r["s"])))


def test_pde_zero_field(capsys):
    code, out, _ = run(
        ["pde", "--c", "0", "--s", "4", "--m", "4,5", "--n-cells", "8,16,32", "--R", "4", "--exact", "0.08333333333333333"],
        capsys,
    )
    assert code == 0
    rows = table(out)
    assert len(rows) == 6
    assert all(float(r["rmse_empirical"]) < 1e-15 for r in rows)
    assert all(float(r["slope_h"]) > 1.8 for r in rows)


def test_pde_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text(
        '[field]\nc = 0.3\ntheta = 2.0\ns_max = 6\n[bounds]\np = 0.5\n[schedule]\nrule = "log"\n'
        '[experiment]\nm_levels = [4, 5]\ns_levels = [6]\nn_cells_levels = [16]\nR = 4\nseed = 3\n'
    )
    code, out, _ = run(["pde", "--config", str(cfg)], capsys)
    assert code == 0
    meta = json.loads(out.splitlines()[0][len("# config "):])
    assert meta["seed"] == 3 and meta["schedule"] == "log"
    assert len(table(out)) == 2


@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_backend_flag(capsys, backend):
    if backend == "compiled" and "compiled" not in _backend.available():
        pytest.skip("compiled core not built")
    code, out, _ = run(["--backend", backend, "construct", *FIXTURE], capsys)
    assert code == 0
    assert [int(l.split()[2]) for l in out.splitlines()[1:]] == [1, 31, 8, 7, 4, 1]
