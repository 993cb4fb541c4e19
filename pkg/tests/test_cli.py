import csv
import hashlib
import json
import os

import numpy as np
import pytest

from chaos_lab.cli import main


def _read(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_otoc_with_large_n(tmp_path):
    out = tmp_path / "o"
    rc = main(["otoc", "--N", "400", "--t-max", "2", "--stride", "20", "--with-largeN",
               "--out", str(out)])
    assert rc == 0
    exact = _read(out / "otoc.csv")
    large = _read(out / "otoc_largeN.csv")
    assert exact[0] == ["time", "value"] and large[0] == ["time", "value"]
    assert [r[0] for r in exact] == [r[0] for r in large]
    assert float(exact[1][1]) == pytest.approx(2 * (1 - 200) / 400)
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "otoc" and man["config"]["model"]["N"] == 400
    data = (out / "otoc.csv").read_bytes()
    blob = hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()
    assert man["outputs"]["otoc.csv"] == blob
    assert b"\r\n" not in data


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"model": {"N": 100, "J": 1.0},
                               "job": {"t_max": 0.5},
                               "output": {"path": str(tmp_path / "a"), "stride": 10}}))
    assert main(["otoc", "--config", str(cfg), "--N", "60"]) == 0
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["config"]["model"] == {"N": 60, "J": 1.0, "J1": 1.0, "J2": 1.0, "L": 3}
    assert man["config"]["job"]["t_max"] == 0.5


@pytest.mark.parametrize("body,needle", [
    ({"job": {"bogus": 1}}, "job.bogus"),
    ({"extra": {}}, "extra"),
    ({"model": {"N": "many"}}, "model.N"),
    ({"output": {"format": "xml"}}, "output.format"),
])
def test_config_errors_exit_2(tmp_path, capsys, body, needle):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(body))
    assert main(["otoc", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2
    assert needle in capsys.readouterr().err


def test_malformed_json_reports_line(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{\n "model": {\n  "N": 10,\n }\n}')
    assert main(["otoc", "--config", str(cfg)]) == 2
    assert "bad.json:4" in capsys.readouterr().err


def test_domain_errors_exit_2(tmp_path):
    assert main(["otoc", "--N", "41", "--out", str(tmp_path)]) == 2
    assert main(["mc-dot", "--N", "100", "--m0", "-3", "--out", str(tmp_path)]) == 2


def test_numerical_failure_exits_3(tmp_path, capsys, monkeypatch):
    from chaos_lab import cli
    from chaos_lab.errors import IntegrationError

    def boom(cfg, out):
        raise IntegrationError("probability conservation drift 1e-3")

    monkeypatch.setitem(cli.HANDLERS, "otoc", boom)
    assert main(["otoc", "--out", str(tmp_path)]) == 3
    assert "conservation" in capsys.readouterr().err


def test_fixed_step_overflow_is_a_config_error(tmp_path):
    # lambda dt N = 0.5 exceeds the step-probability bound
    assert main(["mc-dot", "--mode", "fixed_dt", "--dt", "5e-3", "--N", "100",
                 "--out", str(tmp_path)]) == 2


def test_rerun_is_byte_identical(tmp_path):
    args = ["mc-dr", "--L", "12", "--N", "200", "--ensemble", "40", "--steps", "8", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "mc_dr.csv").read_bytes()
    assert a == (tmp_path / "b" / "mc_dr.csv").read_bytes()
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert ma["outputs"] == mb["outputs"] and ma["seed"] == 3
    rows = _read(tmp_path / "a" / "mc_dr.csv")
    assert rows[0] == ["x", "time", "value", "stderr"]
    assert len(rows) == 1 + 12 * 9


def test_sizedist_outputs(tmp_path):
    out = tmp_path / "s"
    assert main(["sizedist", "--N", "100", "--times", "0.5,1.0", "--with-largeN",
                 "--out", str(out)]) == 0
    rows = _read(out / "sizedist_001.csv")
    assert rows[0] == ["xi", "density"]
    xi = np.array([float(r[0]) for r in rows[1:]])
    dens = np.array([float(r[1]) for r in rows[1:]])
    assert np.sum(dens) * 4 / 100 == pytest.approx(1.0)
    assert np.all(np.diff(xi) > 0)
    assert (out / "sizedist_001_largeN.csv").exists()
    assert (out / "sizedist_001_finiteN.csv").exists()


def test_json_format(tmp_path):
    out = tmp_path / "j"
    assert main(["mc-dot", "--process", "sde", "--N", "100", "--t-max", "0.5", "--ensemble",
                 "20", "--records", "2", "--format", "json", "--out", str(out)]) == 0
    body = json.loads((out / "mc_dot.json").read_text())
    assert body["columns"] == ["time", "value", "stderr"]
    assert len(body["rows"]) == 3


def test_mc_chain_and_scramblon(tmp_path):
    assert main(["mc-chain", "--N", "8", "--L", "3", "--t-max", "0.5", "--ensemble", "50",
                 "--records", "2", "--out", str(tmp_path / "c")]) == 0
    rows = _read(tmp_path / "c" / "mc_chain.csv")
    assert rows[0] == ["x", "time", "value", "stderr"] and len(rows) == 1 + 3 * 3
    assert main(["scramblon-compare", "--L", "30", "--N", "500", "--ensemble", "30",
                 "--steps", "40", "--out", str(tmp_path / "f")]) == 0
    assert _read(tmp_path / "f" / "scramblon_compare.csv")[0] == \
        ["x", "time", "mc", "mc_stderr", "linear"]
    assert os.path.exists(tmp_path / "f" / "front.csv")


def test_verify_command(capsys):
    assert main(["verify"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 7 and all(line.startswith("PASS") for line in lines)


def test_missing_command_is_usage_error(capsys):
    assert main([]) == 2
