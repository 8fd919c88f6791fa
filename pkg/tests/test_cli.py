import csv
import io

import numpy as np
import pytest

from ppife.cli import main, parse_config, read_config_file
from ppife.exceptions import UsageError
from ppife.study import CSV_COLUMNS, RunConfig, export_field, run_study

from conftest import make_space


def test_flags():
    cfg = parse_config(["--ns", "20", "--theta", "0.5", "--epsilon", "-1", "--sigma0", "100"])
    assert (cfg.study, cfg.theta, cfg.epsilon, cfg.sigma0) == ((20,), 0.5, -1, 100.0)


def test_flag_beats_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# contrast\nbeta_plus = 10000\nstudy = 10, 20\n")
    cfg = parse_config(["--config", str(path), "--beta-plus", "10"])
    assert cfg.beta_plus == 10.0 and cfg.study == (10, 20)
    assert parse_config(["--config", str(path)]).beta_plus == 10000.0


def test_preset_and_overrides():
    cfg = parse_config(["--preset", "table4", "--study", "10,20"])
    assert (cfg.epsilon, cfg.sigma0, cfg.theta) == (-1, 100.0, 0.5)
    assert parse_config(["--preset", "table4", "--sigma0", "50"]).sigma0 == 50.0


@pytest.mark.parametrize("argv", [
    ["--epsilon", "2"],
    ["--theta", "1.5"],
    ["--study", "20,10"],
    ["--beta-plus", "-1"],
    ["--preset", "table9"],
    ["--init", "random"],
    ["--bogus", "1"],
    ["--sigma0", "abc"],
])
def test_usage_errors(argv):
    with pytest.raises(UsageError):
        parse_config(argv)


def test_unknown_file_key_lists_valid(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("colour = red\n")
    with pytest.raises(UsageError, match="valid keys: .*beta_plus"):
        read_config_file(path)


def test_main_exit_codes(tmp_path, capsys):
    assert main(["--epsilon", "2"]) == 2
    assert "epsilon" in capsys.readouterr().err
    out = tmp_path / "e.csv"
    assert main(["--ns", "10", "--csv", str(out)]) == 0
    assert out.exists()


def _study(tmp_path, name, **kw):
    cfg = RunConfig(csv=str(tmp_path / name), **kw)
    report = run_study(cfg, out=io.StringIO())
    return report, (tmp_path / name).read_text()


def test_single_mesh_study(tmp_path):
    report, text = _study(tmp_path, "one.csv", study=(10,))
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 2 and rows[1][3] == "" and rows[1][5] == ""
    assert report.ok and report.records[0].rates == {}


def test_csv_deterministic(tmp_path, monkeypatch):
    _, a = _study(tmp_path, "a.csv", study=(10, 20), theta=0.5)
    monkeypatch.setenv("PPIFE_THREADS", "1")
    _, b = _study(tmp_path, "b.csv", study=(10, 20), theta=0.5)
    assert a == b
    # six significant digits
    assert all(len(c.split("e")[0].replace(".", "").lstrip("-")) == 6
               for c in a.splitlines()[1].split(",") if c)


def test_equal_beta_study_rate(tmp_path):
    report, _ = _study(tmp_path, "eq.csv", study=(10, 20), beta_minus=1.0, beta_plus=1.0)
    assert 0.85 <= report.records[1].rates["h1"] <= 1.15


def test_dump_options(tmp_path):
    cfg = RunConfig(study=(10,), export=str(tmp_path / "f.txt"),
                    mesh_dump=str(tmp_path / "m.txt"), matrix_dump=str(tmp_path / "a.mtx"))
    run_study(cfg)
    assert len((tmp_path / "f.txt").read_text().splitlines()) == 100 * 25 + 1
    assert (tmp_path / "m.txt").read_text().startswith("V 0 ")
    assert (tmp_path / "a.mtx").read_text().startswith("%%MatrixMarket")


def test_export_field(tmp_path):
    space = make_space(10, beta=(1.0, 1.0))
    path = tmp_path / "zero.txt"
    export_field(space, np.zeros(space.n_dofs), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# x y value side" and len(lines) == 2501
    assert all(float(l.split()[2]) == 0.0 for l in lines[1:])
    v = space.mesh.vertices
    export_field(space, 1 + v[:, 0] * v[:, 1], path)
    data = np.loadtxt(path)
    assert np.abs(data[:, 2] - (1 + data[:, 0] * data[:, 1])).max() <= 1e-12
    assert set(np.unique(data[:, 3])) <= {-1.0, 1.0}


def test_export_bad_path(space10):
    with pytest.raises(OSError, match="no_such_dir"):
        export_field(space10, np.zeros(space10.n_dofs), "/no_such_dir/f.txt")
