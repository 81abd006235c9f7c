import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from spike_detect import __version__
from spike_detect.cli import main
from spike_detect.detectors import cond_threshold, glrt_decide, glrt_pvalue, glrt_threshold
from spike_detect.io import RunReport, write_matrix_file
from spike_detect.ldp import LdpContext, ee_curve_T
from spike_detect.simulate import SimConfig, empirical_pfa, gen_h0, gen_h1


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def csv_body(text):
    rows = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(rows))


def csv_header(text):
    return dict(ln[2:].split("=", 1) for ln in text.splitlines() if ln.startswith("# ") and "=" in ln)


@pytest.fixture
def spiked_file(tmp_path):
    cfg = SimConfig(K=10, N=50, rho=10.0, seed=42)
    path = tmp_path / "h1.csv"
    write_matrix_file(path, gen_h1(cfg, 0).entries)
    assert glrt_decide(gen_h1(cfg, 0), 0.05).reject_null
    return str(path)


@pytest.fixture
def null_file(tmp_path):
    cfg = SimConfig(K=4, N=40, seed=3)
    y = gen_h0(cfg, 0)
    assert not glrt_decide(y, 0.05).reject_null
    path = tmp_path / "h0.csv"
    write_matrix_file(path, y.entries)
    return str(path)


class TestDetect:
    def test_strong_spike_rejects(self, spiked_file):
        code, text = run("detect", spiked_file, "--alpha", "0.05")
        assert code == 2
        rep = RunReport.from_json(text)
        assert rep.outputs["reject_null"] is True and rep.outputs["test_kind"] == "glrt"
        assert rep.outputs["p_value"] < 0.05 and rep.inputs["file"] == spiked_file

    def test_null_accepts(self, null_file):
        assert run("detect", null_file)[0] == 0
        assert run("detect", null_file, "--test", "cond")[0] == 0

    def test_condition_test_csv(self, spiked_file):
        code, text = run("detect", spiked_file, "--test", "cond", "--format", "csv")
        assert code == 2
        (row,) = csv_body(text)
        assert row["test"] == "condition" and row["reject_null"] == "true" and row["p_value"] == ""
        assert float(row["threshold"]) == pytest.approx(cond_threshold(10, 50, 0.05), rel=1e-9)
        assert text.startswith(f"# spike-detect {__version__}\n")

    def test_condition_pvalue_flag(self, spiked_file):
        code, text = run("detect", spiked_file, "--test", "cond", "--pvalue")
        assert code == 2 and RunReport.from_json(text).outputs["p_value"] < 0.05

    def test_zero_matrix(self, tmp_path, capsys):
        path = tmp_path / "zero.csv"
        write_matrix_file(path, np.zeros((3, 8)))
        assert run("detect", str(path))[0] == 1
        assert "zero" in capsys.readouterr().err.lower()

    def test_malformed_header(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("3;8\n")
        assert run("detect", str(path))[0] == 1
        assert "line 1, column 1" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run("detect", str(tmp_path / "absent.csv"))[0] == 1


class TestScalars:
    def test_threshold_matches_library(self):
        code, text = run("threshold", "--K", "10", "--N", "50", "--alpha", "0.05")
        assert code == 0 and text == format(glrt_threshold(10, 50, 0.05), ".10g") + "\n"
        _, text = run("threshold", "--K", "10", "--N", "50", "--alpha", "0.05", "--format", "json")
        assert RunReport.from_json(text).outputs["threshold"] == glrt_threshold(10, 50, 0.05)

    @pytest.mark.parametrize("test", ["glrt", "cond"])
    def test_duality(self, test):
        _, thr = run("threshold", "--K", "10", "--N", "50", "--alpha", "0.05", "--test", test)
        _, p = run("pvalue", "--K", "10", "--N", "50", "--value", thr.strip(), "--test", test)
        assert float(p) == pytest.approx(0.05, abs=1e-8 if test == "glrt" else 1e-6)

    def test_pvalue_alias(self):
        _, a = run("pvalue", "--K", "10", "--N", "50", "--t", "2.1")
        assert float(a) == pytest.approx(float(glrt_pvalue(2.1, 10, 50)), rel=1e-9)

    @pytest.mark.parametrize("alpha", ["0", "1", "-0.1", "abc"])
    def test_bad_alpha(self, alpha, capsys):
        assert run("threshold", "--K", "10", "--N", "50", "--alpha", alpha)[0] == 1
        assert "usage" in capsys.readouterr().err

    def test_bad_dimensions_show_usage(self, capsys):
        assert run("threshold", "--K", "50", "--N", "10", "--alpha", "0.1")[0] == 1
        err = capsys.readouterr().err
        assert err.startswith("usage: spike-detect threshold") and "K < N" in err


class TestCurves:
    def test_two_points_per_curve(self):
        code, text = run("curves", "--c", "0.2", "--rho-db", "10", "--points", "2")
        rows = csv_body(text)
        assert code == 0 and [r["curve"] for r in rows] == ["T", "T", "U", "U"]
        want = ee_curve_T(LdpContext(0.2, 10.0), 2)
        assert float(rows[0]["a"]) == pytest.approx(want[0].a, rel=1e-9)

    def test_dominance_column(self):
        _, text = run("curves", "--c", "0.2", "--rho-linear", "10", "--points", "4", "--dominance", "--which", "U")
        rows = csv_body(text)
        assert len(rows) == 4 and all(float(r["margin"]) > 0 for r in rows)

    def test_subcritical_is_empty(self):
        code, text = run("curves", "--c", "0.5", "--rho-linear", "0.5")
        assert code == 0 and csv_body(text) == []
        assert csv_header(text)["status"].startswith("empty")

    def test_header_records_config(self):
        _, text = run("curves", "--c", "0.2", "--rho-db", "10", "--points", "3", "--which", "T")
        assert csv_header(text) == {"c": "0.2", "rho": "10", "points": "3", "which": "T"}

    def test_needs_snr(self):
        assert run("curves", "--c", "0.2")[0] == 1
        assert run("curves", "--c", "0.2", "--rho-db", "1", "--rho-linear", "1")[0] == 1
        assert run("curves", "--c", "0.2", "--rho-db", "10", "--points", "1")[0] == 1


class TestSimulate:
    def test_pfa_wraps_library(self):
        _, text = run("simulate", "--K", "4", "--N", "16", "--trials", "400", "--seed", "9", "--alpha", "0.1")
        (row,) = csv_body(text)
        e = empirical_pfa(SimConfig(K=4, N=16, trials=400, seed=9, alpha=0.1))
        assert int(row["rejections"]) == e.rejections and float(row["pfa"]) == pytest.approx(e.pfa)
        assert csv_header(text)["seed"] == "9"

    def test_roc_emits_both_curves(self):
        _, text = run("simulate", "--K", "10", "--N", "50", "--rho-db", "0", "--trials", "200", "--mode", "roc")
        kinds = {r["test"] for r in csv_body(text)}
        assert kinds == {"glrt", "condition"}

    def test_json_report(self):
        _, text = run("simulate", "--K", "4", "--N", "16", "--trials", "50", "--mode", "twcheck", "--format", "json")
        rep = RunReport.from_json(text)
        assert rep.config["seed"] == 0 and rep.config["hypothesis"] == "h0"
        assert 0 <= rep.outputs["rows"][0]["ks_distance"] <= 1

    def test_json_roc_keeps_infinite_thresholds(self):
        _, text = run("simulate", "--K", "4", "--N", "16", "--trials", "20", "--mode", "roc", "--format", "json")
        rows = RunReport.from_json(text).outputs["rows"]
        assert rows[0]["threshold"] == np.inf and rows[-1]["threshold"] == -np.inf

    def test_deterministic(self):
        argv = ("simulate", "--K", "6", "--N", "30", "--rho-db", "3", "--trials", "100", "--seed", "4", "--mode", "roc")
        assert run(*argv) == run(*argv)

    def test_bad_config(self, capsys):
        assert run("simulate", "--K", "4", "--N", "16", "--trials", "0")[0] == 1
        assert "trials" in capsys.readouterr().err

    def test_help_documents_schemas(self, capsys):
        assert main(["simulate", "--help"]) == 0
        assert "trials,rejections,pfa" in capsys.readouterr().out


class TestTwTable:
    def test_stdout(self):
        code, text = run("tw-table", "--lo", "-2", "--hi", "2", "--step", "0.5")
        lines = text.splitlines()
        assert code == 0 and len(lines) == 9 and lines[4].startswith("0,0.9693728283")

    def test_file(self, tmp_path):
        path = tmp_path / "tw.csv"
        assert run("tw-table", "--out", str(path))[0] == 0
        assert path.read_text().splitlines()[0] == "-13,1.94709157901e-80"

    def test_bad_range(self):
        assert run("tw-table", "--lo", "2", "--hi", "-2")[0] == 1
        assert run("tw-table", "--step", "0")[0] == 1


def test_module_entry_point(null_file):
    proc = subprocess.run([sys.executable, "-m", "spike_detect", "detect", null_file], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["schema"] == "v1"


def test_version(capsys):
    assert main(["--version"]) == 0
    assert capsys.readouterr().out.strip() == f"spike-detect {__version__}"
