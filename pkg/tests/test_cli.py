"""Command-line surface: run, picard, norms, check; determinism and exits."""

import json

import numpy as np
import pytest

from plsim.cli import main
from plsim.storage import read_checkpoint, read_diagnostics_csv

TWO_PI = 2.0 * np.pi


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def cgpe_doc(**overrides):
    doc = {
        "model": "cgpe",
        "grid": {"n_points": 64, "length": TWO_PI},
        "params": {"xi": 1.0, "sigma": 1.0},
        "initial": {"u": {"kind": "gaussian", "amplitude": 0.8, "width": 0.5}},
        "dt": 1e-3,
        "t_end": 0.05,
        "sample_every": 1,
        "checks": ["f1_residual", "abs_set"],
    }
    doc.update(overrides)
    return doc


def ep_doc(**overrides):
    doc = {
        "model": "ep",
        "grid": {"n_points": 64, "length": TWO_PI},
        "params": {"alpha": 0.5, "beta": 1.3, "lambda": 0.5},
        "pump": {"kind": "constant", "level": 1.0},
        "initial": {
            "u": {"kind": "random", "seed": 5, "band": 4},
            "n": {"kind": "constant", "level": 0.3},
        },
        "dt": 2e-3,
        "t_end": 0.1,
        "sample_every": 5,
        "checks": ["ep_lyapunov", "reservoir_bounds"],
    }
    doc.update(overrides)
    return doc


class TestRun:
    def test_cgpe_run_passes_and_writes_artifacts(self, tmp_path):
        config = write_config(tmp_path, cgpe_doc())
        out = tmp_path / "out"
        assert main(["run", "--config", config, "--out", str(out)]) == 0
        d = read_diagnostics_csv(out / "diagnostics.csv")
        assert len(d) == 51
        reports = json.loads((out / "reports.json").read_text())
        assert {r["name"] for r in reports} == {"f1_residual", "abs_set"}
        assert all(r["passed"] for r in reports)
        meta = json.loads((out / "run_meta.json").read_text())
        assert meta["blow_up_time"] is None
        assert meta["checkpoints"]
        u, n, header = read_checkpoint(out / "checkpoints" / meta["checkpoints"][-1])
        assert header["config_hash"] == meta["config_hash"]
        assert n is None

    def test_ep_run_passes(self, tmp_path):
        config = write_config(tmp_path, ep_doc())
        out = tmp_path / "out"
        assert main(["run", "--config", config, "--out", str(out)]) == 0
        d = read_diagnostics_csv(out / "diagnostics.csv")
        assert d.has_reservoir
        assert np.min(d.n_min) >= 0.0

    def test_identical_runs_byte_identical_csv(self, tmp_path):
        config = write_config(tmp_path, cgpe_doc())
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["run", "--config", config, "--out", str(out1)]) == 0
        assert main(["run", "--config", config, "--out", str(out2)]) == 0
        assert (out1 / "diagnostics.csv").read_bytes() == (out2 / "diagnostics.csv").read_bytes()

    def test_seed_override_recorded_and_changes_data(self, tmp_path):
        doc = cgpe_doc(initial={"u": {"kind": "random", "seed": 1, "band": 3}}, checks=[])
        config = write_config(tmp_path, doc)
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        assert main(["run", "--config", config, "--out", str(out1), "--seed", "99"]) == 0
        assert main(["run", "--config", config, "--out", str(out2)]) == 0
        meta = json.loads((out1 / "run_meta.json").read_text())
        assert meta["seed"] == 99
        a = read_diagnostics_csv(out1 / "diagnostics.csv")
        b = read_diagnostics_csv(out2 / "diagnostics.csv")
        assert np.max(np.abs(a.mass - b.mass)) > 0

    def test_builtin_fault_injection_fails(self, tmp_path):
        out = tmp_path / "fault"
        code = main(["run", "--config", "builtin:fault-injection", "--out", str(out)])
        assert code == 1
        reports = json.loads((out / "reports.json").read_text())
        assert not reports[0]["passed"]

    def test_checkpoint_cadence(self, tmp_path):
        config = write_config(tmp_path, cgpe_doc(checkpoint_every=10, checks=[]))
        out = tmp_path / "ck"
        assert main(["run", "--config", config, "--out", str(out)]) == 0
        meta = json.loads((out / "run_meta.json").read_text())
        assert len(meta["checkpoints"]) == 6  # samples 0,10,20,30,40 + final

    def test_blow_up_exits_nonzero_with_partial_outputs(self, tmp_path):
        doc = cgpe_doc(
            params={"xi": 30.0, "sigma": 1e-12},
            initial={"u": {"kind": "flat", "rho": 1e-3, "theta": 0.0}},
            dt=0.05, t_end=5.0, checks=[],
        )
        config = write_config(tmp_path, doc)
        out = tmp_path / "boom"
        assert main(["run", "--config", config, "--out", str(out)]) == 1
        meta = json.loads((out / "run_meta.json").read_text())
        assert meta["blow_up_time"] is not None
        d = read_diagnostics_csv(out / "diagnostics.csv")
        assert len(d) >= 2  # partial trajectory retained

    def test_config_error_exits_2(self, tmp_path):
        config = write_config(tmp_path, {"model": "cgpe", "params": {"sigma": -1}})
        assert main(["run", "--config", config, "--out", str(tmp_path / "x")]) == 2

    def test_locked_output_exits_2(self, tmp_path):
        config = write_config(tmp_path, cgpe_doc())
        out = tmp_path / "locked"
        out.mkdir()
        (out / ".plsim.lock").write_text("1")
        assert main(["run", "--config", config, "--out", str(out)]) == 2


class TestPicard:
    def test_report_written(self, tmp_path):
        doc = cgpe_doc(checks=[])
        doc["initial"] = {"u": {"kind": "gaussian", "amplitude": 0.5, "width": 0.5}}
        config = write_config(tmp_path, doc)
        out = tmp_path / "pic"
        code = main([
            "picard", "--config", config, "--out", str(out),
            "--delta", "0.05", "--n-nodes", "17", "--s", "1.0",
        ])
        assert code == 0
        report = json.loads((out / "picard_report.json").read_text())
        assert report["converged"]
        assert report["rate"] < 0.9
        assert len(report["ratios"]) == report["iterations"] - 1

    def test_assert_mode_flags_divergence(self, tmp_path):
        doc = cgpe_doc(checks=[])
        doc["initial"] = {"u": {"kind": "flat", "rho": 5.0, "theta": 0.0}}
        config = write_config(tmp_path, doc)
        out = tmp_path / "div"
        code = main([
            "picard", "--config", config, "--out", str(out),
            "--delta", "4.0", "--n-nodes", "17", "--assert",
        ])
        assert code == 1

    def test_bisect_writes_bracket(self, tmp_path):
        doc = cgpe_doc(checks=[])
        doc["initial"] = {"u": {"kind": "gaussian", "amplitude": 0.8, "width": 0.5}}
        config = write_config(tmp_path, doc)
        out = tmp_path / "bis"
        code = main([
            "picard", "--config", config, "--out", str(out),
            "--delta", "0.1", "--n-nodes", "17", "--s", "1.0", "--bisect",
        ])
        assert code == 0
        report = json.loads((out / "picard_report.json").read_text())
        bracket = report["bracket"]
        assert bracket["delta_fail"] == pytest.approx(2.0 * bracket["delta_ok"])


class TestNorms:
    def make_checkpoints(self, tmp_path, n_samples=8):
        doc = cgpe_doc(checks=[], checkpoint_every=1, t_end=0.008, dt=1e-3)
        config = write_config(tmp_path, doc)
        out = tmp_path / "traj"
        assert main(["run", "--config", config, "--out", str(out)]) == 0
        meta = json.loads((out / "run_meta.json").read_text())
        return out, [str(out / "checkpoints" / name) for name in meta["checkpoints"]]

    def test_spatial_and_spacetime_tables(self, tmp_path):
        out, paths = self.make_checkpoints(tmp_path)
        norm_out = tmp_path / "norms"
        code = main(["norms", "--checkpoints", *paths[:9], "--out", str(norm_out), "--s", "0"])
        assert code == 0
        lines = (norm_out / "spatial_norms.csv").read_text().strip().splitlines()
        assert lines[0] == "file,t,hs_norm"
        assert len(lines) == 10
        # s = 0 spatial norm squares to the mass column of the diagnostics
        d = read_diagnostics_csv(out / "diagnostics.csv")
        first = float(lines[1].split(",")[2])
        assert first**2 == pytest.approx(d.mass[0], rel=1e-10)
        assert (norm_out / "spacetime_norms.csv").exists()
        header, row = (norm_out / "spacetime_norms.csv").read_text().strip().splitlines()
        assert "windowed_surrogate" in row

    def test_l4_scan_deterministic(self, tmp_path):
        out1, out2 = tmp_path / "n1", tmp_path / "n2"
        args = ["norms", "--l4-scan", "16:16", "--samples", "5", "--seed", "7"]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert (out1 / "l4_scan.csv").read_bytes() == (out2 / "l4_scan.csv").read_bytes()

    def test_trilinear_scan_table(self, tmp_path):
        out = tmp_path / "tri"
        code = main([
            "norms", "--trilinear-scan", "8,16", "--samples", "3",
            "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "trilinear_scan.csv").read_text().strip().splitlines()
        assert lines[0] == "size,seed,ratio,admissible_flag"
        assert len(lines) == 3
        assert lines[1].endswith("true")
        for line in lines[1:]:
            ratio_cell = line.split(",")[2]
            assert float(ratio_cell) > 0
            assert "(" not in ratio_cell  # plain decimal text, no scalar repr wrappers

    def test_requires_exactly_one_mode(self, tmp_path):
        assert main(["norms", "--out", str(tmp_path / "x")]) == 2

    def test_malformed_checkpoint_rejected(self, tmp_path):
        bad = tmp_path / "garbage.ckpt"
        bad.write_bytes(b"NOTMGK" + b"\x00" * 32)
        code = main(["norms", "--checkpoints", str(bad), "--out", str(tmp_path / "n")])
        assert code == 2


class TestCheck:
    def test_recheck_stored_csv(self, tmp_path):
        config = write_config(tmp_path, cgpe_doc())
        out = tmp_path / "run"
        assert main(["run", "--config", config, "--out", str(out)]) == 0
        recheck_out = tmp_path / "recheck"
        code = main([
            "check", "--csv", str(out / "diagnostics.csv"),
            "--config", config, "--out", str(recheck_out),
        ])
        assert code == 0
        reports = json.loads((recheck_out / "reports.json").read_text())
        assert all(r["passed"] for r in reports)

    def test_corrupted_csv_fails_check(self, tmp_path):
        config = write_config(tmp_path, cgpe_doc())
        out = tmp_path / "run"
        assert main(["run", "--config", config, "--out", str(out)]) == 0
        d = read_diagnostics_csv(out / "diagnostics.csv")
        corrupted = out / "bad.csv"
        from plsim.diagnostics import DiagnosticsSeries
        from plsim.storage import write_diagnostics_csv

        bad = DiagnosticsSeries(times=d.times, mass=d.mass, l4_fourth=d.l4_fourth + 0.5)
        write_diagnostics_csv(corrupted, bad)
        code = main([
            "check", "--csv", str(corrupted), "--config", config,
            "--out", str(tmp_path / "r2"),
        ])
        assert code == 1
