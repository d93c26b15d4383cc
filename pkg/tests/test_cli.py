import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from vphi.cli import main
from vphi.schemas import SCHEMAS

DOCS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def check(command, text):
    payload = json.loads(text)
    jsonschema.validate(payload, SCHEMAS[command])
    return payload


class TestCommands:
    def test_spectrum(self, capsys):
        code, out = run(capsys, "spectrum", "--map", "power:alpha=0.5", "--order", "24")
        assert code == 0
        vals = [e["re"] for e in check("spectrum", out)["eigenvalues"][:2]]
        assert vals == pytest.approx([0.5, 0.25], rel=1e-8)

    def test_classify(self, capsys):
        code, out = run(capsys, "classify", "--map", "pwl:0,0.5;0.5,1;1,1")
        info = check("classify", out)
        assert code == 0 and info["regime"] == "finite" and info["iterate_count_N"] == 2

    def test_coeffs(self, capsys):
        code, out = run(capsys, "coeffs", "--map", "power:alpha=0.5", "--order", "4",
                        "--grid", "1024")
        series = check("coeffs", out)
        assert code == 0 and series["coefficients"][2] == pytest.approx(1 / 3, rel=1e-8)

    def test_traces(self, capsys):
        code, out = run(capsys, "traces", "--map", "power:alpha=0.5", "--modes", "16")
        rep = check("traces", out)
        assert code == 0 and rep["ok"] and len(rep["fourier_partial"]) == 17

    def test_nystrom(self, capsys, tmp_path):
        target = tmp_path / "k.npy"
        code, out = run(capsys, "nystrom", "--map", "raw:1-x", "--nystrom-size", "64",
                        "--count", "4", "--export", str(target))
        rep = check("nystrom", out)
        assert code == 0 and rep["m"] == 64 and np.load(target).shape == (64, 64)
        signs = [np.sign(e["re"]) for e in rep["spectrum"]["eigenvalues"]]
        assert signs == [1, -1, 1, -1]

    def test_segment(self, capsys):
        code, out = run(capsys, "segment", "--map", "pwl:0,0.25;0.5,0.5;1,0.75",
                        "--order", "16", "--grid", "2048")
        assert code == 0
        check("segment", out)

    def test_validate(self, capsys):
        code, out = run(capsys, "validate", "--map", "power:alpha=0.5")
        rep = check("validate", out)
        assert code == 0 and rep["ok"]
        assert all(c["discrepancy"] <= c["budget"] for c in rep["checks"])

    def test_validate_csv(self, capsys):
        code, out = run(capsys, "validate", "--map", "pwl:0,0.5;0.5,1;1,1", "--format", "csv",
                        "--nystrom-size", "256")
        assert code == 0 and out.startswith("name,value,reference,discrepancy,budget,ok")

    def test_table_path(self, capsys, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("x,y\n0,0\n0.25,0.5\n1,1\n")
        code, out = run(capsys, "classify", "--map", str(path))
        assert code == 0 and check("classify", out)["regime"] == "infinite"


class TestFormatsAndConfig:
    def test_csv_output(self, capsys):
        code, out = run(capsys, "spectrum", "--map", "pwl:0,0.5;0.5,1;1,1", "--format", "csv")
        lines = out.strip().splitlines()
        assert code == 0 and lines[0] == "re,im,multiplicity,residual,stability"
        assert len(lines) == 3

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "s.json"
        code, out = run(capsys, "spectrum", "--map", "power:alpha=0.5", "--out", str(target))
        assert code == 0 and out == ""
        check("spectrum", target.read_text())

    def test_config_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"map": "power:alpha=0.5", "order": 4, "grid": 1024}))
        _, out = run(capsys, "coeffs", "--config", str(cfg))
        assert check("coeffs", out)["order"] == 4
        _, out = run(capsys, "coeffs", "--config", str(cfg), "--order", "6")
        d = check("coeffs", out)
        assert d["order"] == 6 and d["grid"] == 1024

    def test_deterministic(self, capsys):
        argv = ("validate", "--map", "pwl:0,0.5;0.5,1;1,1", "--nystrom-size", "128", "--seed", "3")
        _, first = run(capsys, *argv)
        _, second = run(capsys, *argv)
        assert first == second


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["spectrum", "--map", "power:alpha=oops"],
        ["spectrum"],
        ["spectrum", "--map", "power:alpha=0.5", "--order", "1"],
        ["spectrum", "--map", "power:alpha=0.5", "--grid", "32"],
        ["nystrom", "--map", "power:alpha=0.5", "--nystrom-size", "8"],
        ["frobnicate", "--map", "power:alpha=0.5"],
    ])
    def test_usage_errors(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2

    def test_bad_config_key(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"map": "power:alpha=0.5", "colour": "red"}))
        with pytest.raises(SystemExit) as exc:
            main(["coeffs", "--config", str(cfg)])
        assert exc.value.code == 2

    def test_numerical_failure(self, capsys):
        code, out = run(capsys, "segment", "--map", "pwl:0,0;1,1")
        diag = check("error", out)
        assert code == 1 and diag["error"] == "DegenerateFixedSetError"

    def test_resource_failure(self, capsys):
        code, out = run(capsys, "nystrom", "--map", "power:alpha=0.5", "--nystrom-size", "100000")
        assert code == 1 and check("error", out)["error"] == "ResourceError"


def test_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vphi", "classify", "--map", "power:alpha=0.5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["regime"] == "infinite"
    proc = subprocess.run([sys.executable, "-m", "vphi", "classify", "--map", "nope"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2 and "usage" in proc.stderr


def test_published_schemas_match():
    for name, schema in SCHEMAS.items():
        assert json.loads((DOCS / f"{name}.json").read_text()) == schema
        jsonschema.Draft202012Validator.check_schema(schema)
