import csv
import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

from appell.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, dumps, format_float, main

GAUSS = {"kind": "gaussian"}


def write_config(tmp_path, **cfg):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def run(tmp_path, command, **cfg):
    out = tmp_path / "out"
    code = main([command, "--config", write_config(tmp_path, **cfg), "--out", str(out)])
    return code, out


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestGen:
    def test_gaussian_p2_row(self, tmp_path):
        code, out = run(tmp_path, "gen", d=1, N=4, measure=GAUSS)
        assert code == EXIT_OK
        data = json.loads((out / "appell_system.json").read_text())
        row = data["kernels"][2]["rows"][0]
        assert {tuple(t["alpha"]): t["value"] for t in row["terms"]} == {(0,): -1.0, (2,): 1.0}

    def test_order_zero(self, tmp_path):
        code, out = run(tmp_path, "gen", d=2, N=0, measure=GAUSS)
        assert code == EXIT_OK
        data = json.loads((out / "appell_system.json").read_text())
        assert data["kernels"] == [{"n": 0, "rows": [{"gamma": [0, 0], "terms": [{"alpha": [0, 0], "value": 1.0}]}]}]

    def test_two_point_is_rejected(self, tmp_path, capsys):
        code, _ = run(tmp_path, "gen", d=1, N=3, measure={"kind": "two_point"})
        assert code == EXIT_INPUT
        assert "non-degeneracy check failed" in capsys.readouterr().err

    def test_out_system_written(self, tmp_path):
        code, out = run(tmp_path, "gen", d=1, N=3, measure={"kind": "poisson"}, measure_out=GAUSS)
        assert code == EXIT_OK and (out / "appell_system_out.json").exists()

    def test_deterministic_bytes(self, tmp_path):
        cfg = dict(d=2, N=4, measure=[{"kind": "poisson", "rate": 1.0}, {"kind": "gamma", "shape": 2.0}])
        _, out = run(tmp_path, "gen", **cfg)
        first = (out / "appell_system.json").read_bytes()
        _, out = run(tmp_path, "gen", **cfg)
        assert (out / "appell_system.json").read_bytes() == first


class TestVerify:
    def test_default_gaussian_passes(self, tmp_path, capsys):
        code, out = run(tmp_path, "verify", d=1, N=6, measure=GAUSS)
        assert code == EXIT_OK
        report = json.loads((out / "verify_report.json").read_text())
        assert report["all_pass"]
        by_name = {c["check"]: c for c in report["checks"]}
        assert by_name["biorthogonality"]["max_deviation"] <= 1e-10
        assert set(by_name["biorthogonality"]) == {"check", "max_deviation", "tolerance", "pass", "status"}
        assert "PASS biorthogonality" in capsys.readouterr().out

    @pytest.mark.parametrize("measure,measure_out", [
        ({"kind": "poisson"}, GAUSS),
        ([{"kind": "gamma", "shape": 2.0}, {"kind": "uniform"}], None),
    ])
    def test_other_measures_pass(self, tmp_path, measure, measure_out):
        cfg = dict(d=1 if isinstance(measure, dict) else 2, N=5, measure=measure)
        if measure_out:
            cfg["measure_out"] = measure_out
        code, out = run(tmp_path, "verify", **cfg)
        report = json.loads((out / "verify_report.json").read_text())
        assert code == EXIT_OK, [c for c in report["checks"] if not c["pass"]]

    def test_e_nu_skipped_outside_neighbourhood(self, tmp_path):
        code, out = run(tmp_path, "verify", d=1, N=5, measure=GAUSS, eta=[0.9], views=[[0, 2]])
        report = json.loads((out / "verify_report.json").read_text())
        e_nu = [c for c in report["checks"] if c["check"].startswith("e_nu_norm")]
        assert e_nu and e_nu[0]["status"] == "skipped: outside U_{p,q}" and e_nu[0]["pass"]
        assert code == EXIT_OK

    def test_failing_check_exits_one(self, tmp_path):
        code, out = run(tmp_path, "verify", d=1, N=6, measure=GAUSS, tolerances={"c_transform": 1e-300})
        assert code == EXIT_FAILED
        assert not json.loads((out / "verify_report.json").read_text())["all_pass"]

    def test_threads_match_serial(self, tmp_path, monkeypatch):
        cfg = dict(d=2, N=4, measure=[{"kind": "poisson"}, GAUSS], seed=7)
        _, out = run(tmp_path, "verify", **cfg)
        serial = (out / "verify_report.json").read_bytes()
        monkeypatch.setenv("APPELL_THREADS", "4")
        _, out = run(tmp_path, "verify", **cfg)
        assert (out / "verify_report.json").read_bytes() == serial

    @pytest.mark.parametrize("raw", ["zero", "0", "-2"])
    def test_bad_thread_count(self, tmp_path, monkeypatch, raw):
        monkeypatch.setenv("APPELL_THREADS", raw)
        assert run(tmp_path, "verify", d=1, N=3, measure=GAUSS)[0] == EXIT_INPUT


class TestSymbol:
    def test_measure_change_grid(self, tmp_path):
        code, out = run(tmp_path, "symbol", d=1, N=12, measure={"kind": "poisson"}, measure_out=GAUSS)
        assert code == EXIT_OK
        rows = read_csv(out / "symbol_grid.csv")
        assert list(rows[0]) == ["xi", "eta", "re", "im"] and len(rows) == 121
        for r in rows:
            assert abs(float(r["re"]) - math.exp(float(r["xi"]) * float(r["eta"]))) <= 1e-8
            assert float(r["im"]) == 0.0

    def test_zero_operator(self, tmp_path):
        code, out = run(tmp_path, "symbol", d=2, N=3, measure=GAUSS, symbol={"operator": "zero"})
        assert code == EXIT_OK
        assert all(float(r["re"]) == 0.0 and float(r["im"]) == 0.0 for r in read_csv(out / "symbol_grid.csv"))

    @pytest.mark.parametrize("operator", ["measure_change", "constants"])
    def test_reconstruction_round_trip(self, tmp_path, operator):
        code, out = run(tmp_path, "symbol", d=2, N=4, measure=GAUSS,
                        symbol={"operator": operator, "reconstruct": True, "M": 4})
        assert code == EXIT_OK
        summary = json.loads((out / "roundtrip.json").read_text())
        assert summary["pass"] and summary["roundtrip_deviation"] <= 1e-6
        assert (out / "reconstructed_kernel.json").exists()

    def test_operator_file(self, tmp_path):
        op = {"d": 1, "N": 3, "blocks": [{"m": 1, "n": 1, "entries": [{"gamma": [1], "delta": [1], "value": 2.0}]}]}
        (tmp_path / "op.json").write_text(json.dumps(op))
        code, out = run(tmp_path, "symbol", d=1, N=3, measure=GAUSS,
                        symbol={"operator_file": "op.json", "xi_grid": [0.5], "eta_grid": [3.0]})
        assert code == EXIT_OK
        assert float(read_csv(out / "symbol_grid.csv")[0]["re"]) == pytest.approx(3.0)

    @pytest.mark.parametrize("content", [
        "{not json",
        json.dumps({"d": 1, "N": 3, "blocks": [{"m": 1, "n": 1, "entries": [{"gamma": [2], "delta": [1],
                                                                             "value": 1.0}]}]}),
        json.dumps({"d": 1, "N": 3, "blocks": [{"m": 1}]}),
    ])
    def test_malformed_operator_file(self, tmp_path, content):
        (tmp_path / "op.json").write_text(content)
        assert run(tmp_path, "symbol", d=1, N=3, measure=GAUSS, symbol={"operator_file": "op.json"})[0] == EXIT_INPUT

    def test_deterministic_csv(self, tmp_path):
        cfg = dict(d=2, N=4, measure=[{"kind": "poisson"}, GAUSS], symbol={"xi_direction": [1.0, -0.5]})
        _, out = run(tmp_path, "symbol", **cfg)
        first = (out / "symbol_grid.csv").read_bytes()
        shutil.rmtree(out)
        _, out = run(tmp_path, "symbol", **cfg)
        assert (out / "symbol_grid.csv").read_bytes() == first


class TestInputErrors:
    @pytest.mark.parametrize("cfg", [
        dict(d=0, N=3, measure=GAUSS),
        dict(d=1, N=-1, measure=GAUSS),
        dict(d=1, N=3),
        dict(d=1, N=3, measure={"kind": "cauchy"}),
        dict(d=2, N=3, measure=[GAUSS]),
        dict(d=1, N=3, measure=GAUSS, tolerances={"hermite": -1}),
        dict(d=1, N=3, measure=GAUSS, weights=[2.0, 3.0]),
        dict(d=1, N=3, measure=GAUSS, symbol={"operator": "nonsense"}),
    ])
    def test_exit_two(self, tmp_path, cfg):
        assert run(tmp_path, "symbol", **cfg)[0] == EXIT_INPUT

    def test_missing_config(self, tmp_path):
        assert main(["gen", "--config", str(tmp_path / "absent.json")]) == EXIT_INPUT

    def test_console_script(self, tmp_path):
        cfg = write_config(tmp_path, d=1, N=2, measure=GAUSS)
        res = subprocess.run([sys.executable, "-m", "appell.cli", "gen", "--config", cfg, "--out", str(tmp_path)],
                             capture_output=True, text=True)
        assert res.returncode == 0 and (tmp_path / "appell_system.json").exists()


class TestFormatting:
    def test_float_format(self):
        assert format_float(0.1) == "0.10000000000000001"
        assert format_float(-0.0) == "0"
        with pytest.raises(ValueError):
            format_float(float("nan"))

    def test_dumps_is_valid_json(self):
        obj = {"b": [1, 2.5, True, None], "a": {"x": [{"y": 1e-300}]}, "c": np.float64(1 / 3)}
        back = json.loads(dumps(obj))
        assert back["c"] == 1 / 3 and list(back) == ["b", "a", "c"]
