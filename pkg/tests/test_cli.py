import csv
import os
import subprocess
import sys

import numpy as np
import pytest

from liouvillecs import cli
from liouvillecs.cli import ConfigError, main, parse_config


def read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_happy_path_config():
    cfg = parse_config(["evolve", "--model", "su2", "--omega", "2", "--g", "1", "--delta", "0",
                        "--zeta0", "0.5,0", "--t-end", "10", "--out", "run.csv"])
    assert cfg.command == "evolve" and cfg.zeta0 == 0.5 and cfg.t_end == 10
    assert cfg.tol == 1e-10 and cfg.truncation == 64 and cfg.threshold == 1e-6


def test_negative_omega_allowed_but_tol_rejected(capsys):
    parse_config(["evolve", "--omega", "-1", "--out", "x.csv"])
    assert main(["evolve", "--tol", "-1", "--out", "x.csv"]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and "'tol'" in err[0]


@pytest.mark.parametrize("argv,key", [
    (["riccati", "--n-out", "1.5", "--out", "x"], "n_out"),
    (["riccati", "--zeta0", "1,2,3", "--out", "x"], "zeta0"),
    (["riccati"], "out"),
    (["riccati", "--model", "su3", "--out", "x"], "model"),
    (["compare", "--model", "su11", "--zeta0", "1.2", "--out", "x"], "zeta0"),
])
def test_invalid_values_name_the_key(argv, key):
    with pytest.raises(ConfigError, match=f"'{key}'"):
        parse_config(argv)


def test_unknown_flag_rejected():
    with pytest.raises(ConfigError):
        parse_config(["riccati", "--bogus", "1", "--out", "x"])


def test_config_file_and_override(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# test run\nmodel = su11\ngamma = 0.5  # base rate\nt-end = 3\n"
                    f"out = {tmp_path / 'a.csv'}\n")
    cfg = parse_config(["riccati", "--config", str(conf), "--t-end", "4"])
    assert cfg.model == "su11" and cfg.gamma == 0.5 and cfg.t_end == 4


def test_config_file_unknown_key(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("colour = blue\n")
    with pytest.raises(ConfigError, match="colour"):
        parse_config(["riccati", "--config", str(conf), "--out", "x"])


def test_riccati_command_writes_csv(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["riccati", "--delta", "1", "--t-end", "2", "--n-out", "5",
                 "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0][0] == "time" and len(rows) == 6
    assert "command = riccati" in capsys.readouterr().err


def test_evolve_and_circle(tmp_path):
    for cmd in ("evolve", "circle"):
        out = tmp_path / f"{cmd}.csv"
        assert main([cmd, "--delta", "2", "--t-end", "1", "--n-out", "3", "--out", str(out)]) == 0
        header = read(out)[0]
        assert header[0] == "time" and "R" in header


def test_compare_zero_rates(tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--g", "0", "--t-end", "3", "--n-out", "7", "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0] == ["time", "trace_distance", "purity_lcs", "purity_oracle", "trace_lcs_re",
                       "trace_oracle_re", "leak"]
    assert max(float(r[1]) for r in rows[1:]) < 1e-12


def test_compare_exits_3_above_threshold(tmp_path):
    out = tmp_path / "cmp.csv"
    code = main(["compare", "--delta", "1", "--t-end", "2", "--n-out", "5", "--tol", "1e-4",
                 "--threshold", "1e-15", "--out", str(out)])
    assert code == 3 and out.exists()


def test_compare_su11(tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--model", "su11", "--truncation", "32", "--zeta0", "0.3",
                 "--t-end", "1", "--n-out", "5", "--threshold", "1e-5", "--out", str(out)]) == 0


def test_numerical_failure_exit_2(tmp_path):
    # leakage past a tiny cutoff is a numerical failure; no output is left behind
    out = tmp_path / "cmp.csv"
    code = main(["compare", "--model", "su11", "--truncation", "3", "--nbar", "2",
                 "--zeta0", "0", "--t-end", "5", "--out", str(out)])
    assert code == 2 and not out.exists()


def test_determinism(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["figure1", "--t-end", "2", "--n-out", "9", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_thread_cap(monkeypatch, tmp_path):
    monkeypatch.setenv("LCS_THREADS", "1")
    assert cli.threads() == 1
    a = tmp_path / "a.csv"
    assert main(["figure1", "--t-end", "2", "--n-out", "9", "--out", str(a)]) == 0
    monkeypatch.setenv("LCS_THREADS", "3")
    b = tmp_path / "b.csv"
    assert main(["figure1", "--t-end", "2", "--n-out", "9", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    monkeypatch.setenv("LCS_THREADS", "junk")
    assert cli.threads() >= 1


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "x.csv"
    cli.write_atomic(str(target), "a,b\n1,2\n")
    assert target.read_text() == "a,b\n1,2\n"
    assert os.listdir(tmp_path) == ["x.csv"]


def test_figure1_columns(tmp_path):
    out = tmp_path / "f1.csv"
    assert main(["figure1", "--omega", "2", "--g", "1", "--t-end", "1", "--n-out", "3",
                 "--out", str(out)]) == 0
    header = read(out)[0]
    assert header == ["time", "R_delta0", "z_re_delta0", "z_im_delta0", "R_delta1",
                      "z_re_delta1", "z_im_delta1", "R_delta2", "z_re_delta2", "z_im_delta2"]


def test_figure2_columns(tmp_path):
    out = tmp_path / "f2.csv"
    assert main(["figure2", "--truncation", "48", "--t-end", "1", "--n-out", "3",
                 "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0][1:5] == ["purity_su2_zeta0", "purity_su2_zeta0.25", "purity_su2_zeta0.5",
                            "purity_su2_zeta1"]
    assert rows[0][-1] == "purity_su11_zeta0.5_admix"
    purities = np.array(rows[1:], dtype=float)[:, 1:]
    assert np.all(purities <= 1 + 1e-9) and np.all(purities > 0)


def test_figure3_columns(tmp_path):
    out = tmp_path / "f3.csv"
    assert main(["figure3", "--t-end", "1", "--n-out", "3", "--out", str(out)]) == 0
    header = read(out)[0]
    assert len(header) == 1 + 3 * 6
    assert "R_a0_nbar0.5" in header and "z_im_a1_nbar1" in header


def test_identity_check_command(tmp_path):
    out = tmp_path / "id.csv"
    assert main(["identity-check", "--n-theta", "8", "--n-phi", "16", "--out", str(out)]) == 0
    rows = read(out)
    assert rows[0] == ["n_theta", "n_phi", "deviation"]
    assert [r[:2] for r in rows[1:]] == [["8", "16"], ["16", "32"]]


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.csv"
    proc = subprocess.run([sys.executable, "-m", "liouvillecs", "riccati", "--t-end", "1",
                           "--n-out", "2", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
