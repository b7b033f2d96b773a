import csv
import io
import json
import os

import pytest
from hypothesis import given, settings, strategies as st

from hallfiber import cli
from hallfiber import fiber_solver as fs


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


def test_bands_example(capsys):
    code, out, _ = run(capsys, "bands", "n=1", "k=0:4:0.5")
    assert code == 0
    table = rows_of(out)
    assert table[0] == ["n", "k", "lambda", "dlambda", "err_est", "method"]
    assert len(table) == 1 + 9
    assert out.endswith("\n")
    assert float(table[1][2]) == pytest.approx(3.0, abs=1e-10)
    assert [r[5] for r in table[1:]] == ["shooting"] * 9


def test_csv_full_precision(capsys):
    _, out, _ = run(capsys, "bands", "n=1", "k=1.3")
    value = rows_of(out)[1][2]
    lam = fs.eigenvalue(fs.FiberPoint(1, 1.3), fs.SolverConfig()).lam
    assert float(value) == lam
    assert value == "%.17g" % lam


def test_flag_spelling_equivalent(capsys):
    _, a, _ = run(capsys, "bands", "n=2", "k=0:1:0.5")
    _, b, _ = run(capsys, "bands", "--n", "2", "--k-range", "0:1:0.5")
    assert a == b


def test_precision_floor_exit(capsys):
    code, out, err = run(capsys, "kdelta", "n=1", "delta=1e-12")
    assert code == 3
    assert "precision-floor" in err
    code, out, _ = run(capsys, "kdelta", "n=1", "delta=1e-12", "--format", "json")
    assert code == 3
    assert json.loads(out)["error"]["reason"] == "precision-floor"


@pytest.mark.parametrize(
    "argv",
    [
        ["bands", "n=0"],
        ["bands", "n=x"],
        ["bands", "k=4:0:0.5"],
        ["bands", "k=0:4:-1"],
        ["bands", "k=nan"],
        ["kdelta", "delta=2.5"],
        ["bulk", "profile=power:0.4"],
        ["bulk", "profile=blob:1"],
        ["edge", "interval=2,1"],
        ["localize", "epsilon=1.0"],
        ["bands", "--b", "2"],
        ["bulk", "b=-1"],
        ["quasimode", "k=1.0"],
        ["bands", "--step", "-1"],
        ["bands", "--margin", "4"],
        ["bands", "--workers", "1.5"],
    ],
)
def test_invalid_input_exit(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "invalid-input" in err


def test_validation_before_compute(capsys, monkeypatch):
    def boom(*a, **k):
        raise AssertionError("computation started")

    monkeypatch.setattr(fs, "band_sweep", boom)
    code, out, _ = run(capsys, "bands", "k=0:1:0.5", "delta=7", "--format", "json")
    assert code == 2
    assert json.loads(out)["error"]["reason"] == "invalid-input"


def test_empty_table_exit(capsys, monkeypatch):
    monkeypatch.setitem(cli.RUNNERS, "bands", lambda cfg: [])
    code, out, _ = run(capsys, "bands", "--format", "json")
    assert code == 2
    assert json.loads(out)["error"]["reason"] == "empty-table"
    with pytest.raises(ValueError):
        cli.render(cli.Table("bands", []), "csv")


def test_disagreement_exit(capsys, monkeypatch):
    real = fs.fd_oracle

    def skewed(p, config):
        bp = real(p, config)
        return fs.BandPoint(bp.n, bp.k, bp.lam + 1e-3, bp.dlam, bp.err_est, bp.method, bp.excess)

    monkeypatch.setattr(fs, "fd_oracle", skewed)
    code, _, err = run(capsys, "bands", "k=0.7")
    assert code == 4
    assert "solver-disagreement" in err


def test_json_round_trip(capsys, tmp_path):
    path = tmp_path / "bands.json"
    code, _, _ = run(capsys, "bands", "n=1", "k=0:2:1", "--format", "json", "--out", str(path))
    assert code == 0
    doc = json.loads(path.read_text())
    assert doc["schema_version"] == cli.SCHEMA_VERSION
    assert doc["config"]["command"] == "bands"
    table = cli.Table("bands", doc["rows"], doc["config"])
    assert json.loads(cli.render(table, "json")) == doc
    ref = fs.band_sweep(1, [0.0, 1.0, 2.0], fs.SolverConfig())
    assert [r["lambda"] for r in doc["rows"]] == [r.lam for r in ref]


def test_deterministic_files(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "verify", "n=1", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rows = json.loads(a.read_text())["rows"]
    checks = {r["check"] for r in rows}
    assert {"rho", "rho_prime", "kato_temple", "hadamard_vs_fd"} <= checks
    assert all(r["passed"] for r in rows)


def test_config_file_flags_win(capsys, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# sweep\nn = 2\nk = 0:1:0.5\n")
    _, from_file, _ = run(capsys, "bands", "--config", str(conf))
    assert {r[0] for r in rows_of(from_file)[1:]} == {"2"}
    assert len(rows_of(from_file)) == 4
    _, overridden, _ = run(capsys, "bands", "--config", str(conf), "n=1")
    assert {r[0] for r in rows_of(overridden)[1:]} == {"1"}
    assert len(rows_of(overridden)) == 4


def test_bad_config_file(capsys, tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = blue\n")
    assert run(capsys, "bands", "--config", str(conf))[0] == 2
    assert run(capsys, "bands", "--config", str(tmp_path / "missing.conf"))[0] == 2


@pytest.mark.parametrize("command", sorted(cli.COLUMNS))
def test_help_documents_columns(capsys, command):
    with pytest.raises(SystemExit) as exc:
        cli.main([command, "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for name, _ in cli.COLUMNS[command]:
        assert f"  {name} " in out


def test_atomic_write(capsys, tmp_path):
    path = tmp_path / "bands.csv"
    path.write_text("old\n")
    assert run(capsys, "bands", "k=0", "--out", str(path))[0] == 0
    assert path.read_text().startswith("n,k,lambda")
    assert os.listdir(tmp_path) == ["bands.csv"]
    code, _, err = run(capsys, "bands", "k=0", "--out", str(tmp_path / "nope" / "x.csv"))
    assert code == 2 and "io-error" in err


def test_edge_field_scaling(capsys):
    _, unit, _ = run(capsys, "edge", "interval=1.5,2.5")
    _, strong, _ = run(capsys, "edge", "interval=6,10", "b=4")
    u, s = rows_of(unit)[1], rows_of(strong)[1]
    head = rows_of(unit)[0]
    for col in ("c_minus", "c_plus", "k_lo", "k_hi"):
        i = head.index(col)
        assert float(s[i]) == pytest.approx(2 * float(u[i]), rel=1e-12)


def test_bulk_and_localize(capsys):
    code, out, _ = run(capsys, "bulk", "delta=1e-6", "--format", "json")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["current"] < 0 and abs(row["current"]) <= row["current_bound"]
    code, out, _ = run(capsys, "localize", "delta=1e-6", "eps=0.5")
    assert code == 0
    table = rows_of(out)
    assert len(table) == 2
    assert 0 <= float(table[1][table[0].index("mass")]) <= 1


def test_synthesize_grid(capsys):
    code, out, _ = run(capsys, "synthesize", "delta=1e-4", "x-range=0:2:1", "y-range=0:1:0.5")
    assert code == 0
    table = rows_of(out)
    assert len(table) == 1 + 3 * 3
    first = dict(zip(table[0], table[1]))
    assert float(first["x"]) == 0.0 and float(first["abs2"]) == 0.0


@settings(max_examples=50, deadline=None)
@given(lo=st.integers(-50, 50), count=st.integers(1, 200), step=st.sampled_from([0.1, 0.25, 0.5, 1.0]))
def test_parse_range_property(lo, count, step):
    hi = lo + (count - 1) * step
    values = cli.parse_range(f"{lo}:{hi!r}:{step}")
    assert len(values) == count
    assert values[0] == lo
    assert values[-1] == pytest.approx(hi, abs=1e-9)


def test_parse_profile():
    assert cli.parse_profile("gaussian:1.5,0.15") == ("gaussian", (1.5, 0.15))
    assert cli.parse_profile("power:1") == ("power", (1.0,))
    for bad in ("power:1,2", "indicator:1", "gaussian", "wave:1"):
        with pytest.raises(ValueError):
            cli.parse_profile(bad)
