import csv
import json
import os

import numpy as np
import pytest

from starflow import cli


def write_config(path, **overrides):
    cfg = {
        "problem": {"n": 1, "k": 1, "mode": "raw"},
        "shape": {"type": "sphere", "params": {"radius": 1.0}},
        "grid": {"N": 64},
        "stepping": {"t_max": 0.05, "dt_init": 1e-3, "cfl_coefficient": 0.2},
        "output": {"trajectory_path": str(path.parent / "traj.csv")},
    }
    for key, val in overrides.items():
        section, leaf = key.split(".")
        cfg.setdefault(section, {})[leaf] = val
    path.write_text(json.dumps(cfg))
    return cfg


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestConfigHandling:
    def test_roundtrip_idempotent(self):
        text = json.dumps({
            "problem": {"n": 2, "k": 1, "mode": "normalized"},
            "grid": {"N": 128},
        })
        cfg = cli.parse_config(text)
        once = cli.serialize_config(cfg)
        twice = cli.serialize_config(cli.parse_config(once))
        assert once == twice

    def test_unknown_key_named(self):
        with pytest.raises(cli.ConfigError, match="problem.kk"):
            cli.parse_config(json.dumps({"problem": {"kk": 1}}))
        with pytest.raises(cli.ConfigError, match="mystery"):
            cli.parse_config(json.dumps({"mystery": {}}))

    def test_type_mismatch_named(self):
        with pytest.raises(cli.ConfigError, match="grid.N"):
            cli.parse_config(json.dumps({"grid": {"N": "lots"}}))

    def test_set_override_applies_after_parse(self):
        cfg = cli.parse_config(json.dumps({"problem": {"n": 1, "k": 1, "mode": "raw"}}))
        cli.apply_overrides(cfg, ["problem.mode=rescaled_raw", "grid.N=128"])
        assert cfg["problem"]["mode"] == "rescaled_raw"
        assert cfg["grid"]["N"] == 128

    def test_set_override_validates(self):
        cfg = cli.parse_config("{}")
        with pytest.raises(cli.ConfigError, match="unknown"):
            cli.apply_overrides(cfg, ["problem.zzz=3"])

    def test_bad_json_reported(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        assert cli.main(["run", str(bad)]) == cli.EXIT_CONFIG


class TestRun:
    def test_sphere_run_and_outputs(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        write_config(cfg_path, **{
            "output.snapshot_every": 2,
            "output.snapshot_dir": str(tmp_path / "snaps"),
            "stepping.sample_every": 10,
        })
        assert cli.main(["run", str(cfg_path)]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "run complete" in out and "I0=" in out
        rows = read_csv(tmp_path / "traj.csv")
        assert rows[0] == ["t", "dt", "log_scale", "V2", "V1", "I0",
                           "r_t", "roundness_rescaled", "min_sigma_k"]
        width = len(rows[0])
        for row in rows[1:]:
            assert len(row) == width
            for cell in row:
                assert "," not in cell
                float(cell)  # strict numeric, '.' decimal separator
        snaps = sorted(os.listdir(tmp_path / "snaps"))
        assert snaps and snaps[0] == "snapshot_00000.csv"

    def test_trajectory_text_is_loadable_and_roundtrips(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        write_config(cfg_path)
        assert cli.main(["run", str(cfg_path), "--quiet"]) == cli.EXIT_OK
        raw = (tmp_path / "traj.csv").read_text()
        assert raw.endswith("\n")
        for row in read_csv(tmp_path / "traj.csv")[1:]:
            for cell in row:
                assert repr(float(cell)) == cell  # shortest round-trip format

    def test_bad_degree_cites_key(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        write_config(cfg_path)
        code = cli.main(["run", str(cfg_path), "--set", "problem.k=3"])
        assert code == cli.EXIT_CONFIG
        assert "problem.k" in capsys.readouterr().err

    def test_nonconvex_initial_is_precondition(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        write_config(cfg_path, **{
            "shape.type": "perturbed_sphere",
            "shape.params": {"radius": 1.0, "eps": 0.3, "mode": 3},
        })
        assert cli.main(["run", str(cfg_path)]) == cli.EXIT_CONFIG
        assert "precondition" in capsys.readouterr().err

    def test_numerical_failure_exports_partial(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        write_config(cfg_path, **{
            "problem.n": 2,
            "problem.mode": "normalized",
            "shape.type": "ellipsoid_of_revolution",
            "shape.params": {"a": 1.2, "c": 1.0},
            "tolerances.tol_conserve": 0.0,
        })
        assert cli.main(["run", str(cfg_path)]) == cli.EXIT_NUMERICAL
        assert "numerical failure" in capsys.readouterr().err
        rows = read_csv(tmp_path / "traj.csv")
        assert len(rows) >= 2  # header plus at least the initial sample

    def test_determinism_byte_identical(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        write_config(cfg_path, **{"shape.type": "perturbed_sphere",
                                  "shape.params": {"radius": 1.0, "eps": 0.08, "mode": 3}})
        assert cli.main(["run", str(cfg_path), "--quiet"]) == cli.EXIT_OK
        first = (tmp_path / "traj.csv").read_bytes()
        assert cli.main(["run", str(cfg_path), "--quiet"]) == cli.EXIT_OK
        assert (tmp_path / "traj.csv").read_bytes() == first


class TestVerify:
    def test_symfunc_suite_passes(self, tmp_path, capsys):
        report = tmp_path / "report.csv"
        code = cli.main(["verify", "symfunc", "--quiet",
                         "--set", "verify.samples=20000",
                         "--set", f"verify.report_path={report}"])
        assert code == cli.EXIT_OK
        rows = read_csv(report)
        assert rows[0] == ["check", "lhs", "rhs", "abs_residual",
                           "rel_residual", "tolerance", "pass"]
        assert all(row[6] == "True" for row in rows[1:])

    def test_tolerance_violation_exits_four(self, tmp_path, capsys):
        report = tmp_path / "report.csv"
        code = cli.main(["verify", "symfunc", "--quiet",
                         "--set", "verify.samples=2000",
                         "--set", f"verify.report_path={report}",
                         "--set", 'verify.tolerance_overrides={"symfunc/euler_identity": 1e-30}'])
        assert code == cli.EXIT_TOLERANCE
        assert "FAILED" in capsys.readouterr().err

    def test_af_on_nonconvex_shape_is_precondition(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "problem": {"n": 1, "k": 1, "mode": "raw"},
            "shape": {"type": "perturbed_sphere",
                      "params": {"radius": 1.0, "eps": 0.45, "mode": 2}},
            "grid": {"N": 128},
        }))
        code = cli.main(["verify", "af", str(cfg_path), "--quiet"])
        assert code == cli.EXIT_CONFIG
        assert "precondition" in capsys.readouterr().err

    def test_af_on_configured_convex_shape(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "problem": {"n": 1, "k": 1, "mode": "raw"},
            "shape": {"type": "ellipse", "params": {"a": 2.0, "b": 1.0}},
            "grid": {"N": 256},
            "verify": {"report_path": str(tmp_path / "r.csv")},
        }))
        assert cli.main(["verify", "af", str(cfg_path), "--quiet"]) == cli.EXIT_OK

    def test_unknown_suite_rejected(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["verify", "everything"])


class TestSweep:
    def _sweep_config(self, tmp_path, shapes=None):
        shapes = shapes or [
            {"type": "sphere", "params": {"radius": 1.0}},
            {"type": "ellipse", "params": {"a": 2.0, "b": 1.0}},
            {"type": "perturbed_sphere", "params": {"radius": 1.0, "eps": 0.08, "mode": 3}},
        ]
        cfg = {
            "problem": {"n": 1, "k": 1, "mode": "rescaled_raw"},
            "shape": shapes[0],
            "grid": {"N": 64},
            "stepping": {"t_max": 0.05, "dt_init": 1e-3, "cfl_coefficient": 0.2},
            "output": {"trajectory_path": str(tmp_path / "unused.csv")},
            "sweep": {
                "shapes": shapes,
                "k_values": [1],
                "seeds": [11, 12],
                "index_path": str(tmp_path / "index.csv"),
                "trajectory_dir": str(tmp_path / "trajs"),
            },
        }
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_sweep_produces_grid(self, tmp_path):
        path = self._sweep_config(tmp_path)
        assert cli.main(["sweep", str(path), "--quiet"]) == cli.EXIT_OK
        rows = read_csv(tmp_path / "index.csv")
        assert len(rows) == 1 + 6  # 3 shapes x 1 k x 2 seeds
        assert sorted(os.listdir(tmp_path / "trajs")) == [
            f"traj_{i:03d}.csv" for i in range(6)
        ]

    def test_sweep_deterministic(self, tmp_path):
        path = self._sweep_config(tmp_path)
        assert cli.main(["sweep", str(path), "--quiet"]) == cli.EXIT_OK
        first = (tmp_path / "index.csv").read_bytes()
        assert cli.main(["sweep", str(path), "--quiet"]) == cli.EXIT_OK
        assert (tmp_path / "index.csv").read_bytes() == first

    def test_sweep_parallel_matches_serial(self, tmp_path):
        path = self._sweep_config(tmp_path)
        assert cli.main(["sweep", str(path), "--quiet"]) == cli.EXIT_OK
        serial = (tmp_path / "index.csv").read_bytes()
        assert cli.main(["sweep", str(path), "--jobs", "2", "--quiet"]) == cli.EXIT_OK
        assert (tmp_path / "index.csv").read_bytes() == serial

    def test_sweep_records_failures(self, tmp_path, capsys):
        shapes = [
            {"type": "sphere", "params": {"radius": 1.0}},
            {"type": "perturbed_sphere", "params": {"radius": 1.0, "eps": 0.45, "mode": 2}},
        ]
        path = self._sweep_config(tmp_path, shapes=shapes)
        assert cli.main(["sweep", str(path), "--quiet"]) == cli.EXIT_TOLERANCE
        rows = read_csv(tmp_path / "index.csv")
        statuses = [row[6] for row in rows[1:]]
        assert any(s == "ok" for s in statuses)
        assert any(s.startswith("failed") for s in statuses)
