import json
import subprocess
import sys
from pathlib import Path

import pytest

from statsol.cli import main
from statsol.config import ConfigError, parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def linear_config(**over):
    cfg = {
        "name": "lin",
        "model": {"name": "linear", "dim": 1, "rate": 1.0},
        "initial_measure": {"atoms": [1.0, 3.0], "weights": [0.5, 0.5]},
        "grid": {"t0": 0.0, "dt": 0.05, "steps": 20},
        "dictionary": [{"family": "monomial", "coord": 0, "power": 2, "radius": 5.0}],
        "checks": [{"name": "initial_condition"}, {"name": "liouville", "halvings": 2, "min_order": 1.8}],
    }
    cfg.update(over)
    return cfg


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=2))
    return path


def records(path):
    return [json.loads(line) for line in Path(path).read_text().splitlines()]


class TestValidate:
    def test_ok(self, tmp_path, capsys):
        assert main(["validate", str(write(tmp_path, linear_config()))]) == 0
        assert "ok" in capsys.readouterr().out

    @pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
    def test_bundled(self, name):
        assert main(["validate", str(CONFIGS / name)]) == 0

    def test_negative_dt(self, tmp_path, capsys):
        cfg = linear_config(grid={"dt": -0.1, "steps": 10})
        assert main(["run", str(write(tmp_path, cfg))]) == 2
        err = capsys.readouterr().err
        assert "grid/dt" in err

    def test_unknown_key(self, tmp_path, capsys):
        cfg = linear_config()
        cfg["grid"]["substeps"] = 3
        assert main(["run", str(write(tmp_path, cfg))]) == 2
        assert "substeps" in capsys.readouterr().err

    def test_unknown_top_level_key(self, tmp_path):
        assert main(["validate", str(write(tmp_path, linear_config(extra=1)))]) == 2

    def test_unknown_model_parameter(self, tmp_path):
        cfg = linear_config(model={"name": "linear", "viscosity": 1.0})
        assert main(["validate", str(write(tmp_path, cfg))]) == 2

    def test_malformed_json_location(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "model": {"name": "linear"},\n  "grid": [,\n}')
        assert main(["validate", str(path)]) == 2
        assert f"{path}:3:" in capsys.readouterr().err

    def test_unknown_check(self, tmp_path, capsys):
        cfg = linear_config(checks=[{"name": "vorticity"}])
        assert main(["validate", str(write(tmp_path, cfg))]) == 2
        assert "checks/0" in capsys.readouterr().err

    def test_check_parameter(self, tmp_path):
        cfg = linear_config(checks=[{"name": "liouville", "psi": "tanh"}])
        assert main(["validate", str(write(tmp_path, cfg))]) == 2

    def test_check_model_mismatch(self, tmp_path):
        assert main(["validate", str(write(tmp_path, linear_config(checks=[{"name": "apriori"}])))]) == 2

    def test_unknown_psi(self, tmp_path):
        cfg = linear_config(checks=[{"name": "mean_energy", "psi": "cosh"}])
        assert main(["validate", str(write(tmp_path, cfg))]) == 2

    def test_atom_dimension(self, tmp_path):
        cfg = linear_config(model={"name": "linear", "dim": 2})
        assert main(["validate", str(write(tmp_path, cfg))]) == 2

    def test_dictionary_coordinate(self, tmp_path):
        cfg = linear_config(dictionary=[{"family": "monomial", "coord": 4}])
        assert main(["validate", str(write(tmp_path, cfg))]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["validate", str(tmp_path / "nope.json")]) == 2

    def test_parse_errors_are_config_errors(self):
        with pytest.raises(ConfigError):
            parse_config('{"model": 3}')


class TestRun:
    def test_bundled_linear_oracle(self, tmp_path):
        report = tmp_path / "r.ndjson"
        assert main(["run", str(CONFIGS / "linear_oracle.json"), "--report", str(report)]) == 0
        recs = records(report)
        keys = {"check", "model", "params", "value", "tolerance", "order_estimate", "pass", "seed"}
        assert all(set(r) == keys for r in recs)
        liou = [r for r in recs if r["check"] == "liouville"]
        assert liou and all(r["order_estimate"] >= 1.8 for r in liou if r["order_estimate"] is not None)
        assert any(r["order_estimate"] is not None for r in liou)

    def test_deterministic_across_threads(self, tmp_path, monkeypatch):
        path = CONFIGS / "reacdiff.json"
        a, b, c = (tmp_path / f"{x}.ndjson" for x in "abc")
        assert main(["run", str(path), "--report", str(a)]) == 0
        assert main(["--threads", "4", "run", str(path), "--report", str(b)]) == 0
        monkeypatch.setenv("STATSOL_THREADS", "3")
        assert main(["run", str(path), "--report", str(c)]) == 0
        assert a.read_bytes() == b.read_bytes() == c.read_bytes()

    def test_failed_check_exit_1(self, tmp_path):
        cfg = linear_config(checks=[{"name": "oracle", "tolerance": 0.0}],
                            grid={"dt": 0.5, "steps": 2})
        report = tmp_path / "r.ndjson"
        assert main(["run", str(write(tmp_path, cfg)), "--report", str(report)]) == 1
        assert records(report)[0]["pass"] is False

    def test_numerical_failure_exit_3(self, tmp_path):
        cfg = linear_config(model={"name": "linear", "dim": 1, "rate": -50.0},
                            grid={"dt": 0.1, "steps": 20},
                            initial_measure={"atoms": [0.0, 1.0]},
                            checks=[{"name": "z_carrier"}, {"name": "initial_condition"}])
        report = tmp_path / "r.ndjson"
        assert main(["run", str(write(tmp_path, cfg)), "--report", str(report)]) == 3
        recs = records(report)
        assert len(recs) == 2
        assert all(r["pass"] is False and r["value"] is None and "atom 1" in r["error"] for r in recs)

    def test_curves_written(self, tmp_path):
        cfg = linear_config(checks=[{"name": "statistic_curve", "phi": 0}],
                            output={"report": str(tmp_path / "r.ndjson"), "curves": str(tmp_path / "curves")})
        assert main(["run", str(write(tmp_path, cfg))]) == 0
        csvs = list((tmp_path / "curves").glob("*.csv"))
        assert len(csvs) == 1
        lines = csvs[0].read_text().splitlines()
        assert lines[0] == "t,u_0" and len(lines) == 22

    def test_console_script(self, tmp_path):
        report = tmp_path / "r.ndjson"
        proc = subprocess.run([sys.executable, "-m", "statsol.cli", "run",
                               str(write(tmp_path, linear_config())), "--report", str(report)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert report.exists()


class TestStudy:
    def test_liouville_order(self, tmp_path):
        report = tmp_path / "s.ndjson"
        assert main(["study", str(write(tmp_path, linear_config())), "--halvings", "3",
                     "--report", str(report)]) == 0
        rec = [r for r in records(report) if r["check"] == "liouville"][0]
        assert len(rec["params"]["values"]) == 4
        assert rec["order_estimate"] == pytest.approx(2.0, abs=0.1)
        assert all(o == pytest.approx(2.0, abs=0.1) for o in rec["params"]["successive_orders"])

    def test_frozen_dynamics(self, tmp_path):
        cfg = linear_config(model={"name": "linear", "dim": 1, "rate": 0.0})
        report = tmp_path / "s.ndjson"
        assert main(["study", str(write(tmp_path, cfg)), "--halvings", "2", "--report", str(report)]) == 0
        rec = [r for r in records(report) if r["check"] == "liouville"][0]
        assert rec["params"]["values"] == [0.0, 0.0, 0.0]
        assert rec["order_estimate"] is None

    def test_rk4_trajectory_error(self, tmp_path):
        cfg = linear_config(grid={"dt": 0.1, "steps": 10}, checks=[{"name": "oracle"}])
        report = tmp_path / "s.ndjson"
        main(["study", str(write(tmp_path, cfg)), "--halvings", "3", "--report", str(report)])
        assert records(report)[0]["order_estimate"] == pytest.approx(4.0, abs=0.2)

    def test_default_report_name(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = linear_config(output={"report": "out/lin.ndjson"})
        assert main(["study", str(write(tmp_path, cfg)), "--halvings", "2"]) == 0
        assert (tmp_path / "out" / "lin.study.ndjson").exists()

    def test_halvings_minimum(self, tmp_path):
        assert main(["study", str(write(tmp_path, linear_config())), "--halvings", "1"]) == 2
