import json

import pytest

from halanay_cert.cli import main

from conftest import RING3_PERIODIC, SWITCHED_SCALAR


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def stable_scalar_config(outdir, **overrides):
    cfg = {
        "system": {
            "type": "scalar",
            "a": "2",
            "b": "1",
            "M_a": 2.0,
            "M_b": 1.0,
            "tau_max": 1.0,
            "tau": "1",
        },
        "certify": {"eta": 0.9, "t0": 0.0, "N": 1, "horizon": 40.0,
                    "resolution": 0.01},
        "simulate": {"T": 20.0, "h": 0.01, "histories": ["random:2:1.0"]},
        "outputs": {"dir": str(outdir), "formats": ["csv", "json"]},
        "seed": 3,
    }
    cfg.update(overrides)
    return cfg


class TestExitCodes:
    def test_certified_exits_zero(self, tmp_path):
        cfg = write_config(tmp_path, stable_scalar_config(tmp_path / "out"))
        assert main(["certify", "--config", cfg]) == 0

    def test_refuted_exits_one(self, tmp_path):
        payload = stable_scalar_config(tmp_path / "out")
        payload["system"]["b"] = "2.5"
        payload["system"]["M_b"] = 2.5
        cfg = write_config(tmp_path, payload)
        assert main(["certify", "--config", cfg]) == 1

    def test_unknown_key_exits_two(self, tmp_path):
        payload = stable_scalar_config(tmp_path / "out")
        payload["system"]["bogus"] = 1
        cfg = write_config(tmp_path, payload)
        assert main(["certify", "--config", cfg]) == 2

    def test_missing_file_exits_two(self, tmp_path):
        assert main(["certify", "--config", str(tmp_path / "nope.json")]) == 2

    def test_bad_expression_exits_two(self, tmp_path):
        payload = stable_scalar_config(tmp_path / "out")
        payload["system"]["a"] = "2+"
        cfg = write_config(tmp_path, payload)
        assert main(["certify", "--config", cfg]) == 2

    def test_evaluation_error_exits_three(self, tmp_path):
        payload = stable_scalar_config(tmp_path / "out")
        payload["system"]["a"] = "2+1/(t-1)"
        cfg = write_config(tmp_path, payload)
        assert main(["certify", "--config", cfg]) == 3

    def test_short_horizon_exits_four(self, tmp_path):
        payload = stable_scalar_config(tmp_path / "out")
        payload["certify"]["horizon"] = 4.0  # only 2 windows
        cfg = write_config(tmp_path, payload)
        assert main(["certify", "--config", cfg]) == 4

    def test_inconclusive_exits_four(self, tmp_path):
        payload = stable_scalar_config(tmp_path / "out")
        payload["certify"]["divergence_threshold"] = 1e9
        cfg = write_config(tmp_path, payload)
        assert main(["certify", "--config", cfg]) == 4

    def test_overflow_exits_five(self, tmp_path):
        payload = stable_scalar_config(tmp_path / "out")
        payload["system"]["a"] = "0.1"
        payload["system"]["M_a"] = 0.1
        payload["system"]["b"] = "50"
        payload["system"]["M_b"] = 50.0
        payload.pop("certify")
        payload["simulate"] = {"T": 20.0, "h": 0.01, "histories": [1e300]}
        cfg = write_config(tmp_path, payload)
        assert main(["simulate", "--config", cfg]) == 5


class TestOutputs:
    def test_certify_report_contract(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, stable_scalar_config(out))
        assert main(["certify", "--config", cfg]) == 0
        report = json.loads((out / "report.json").read_text())
        assert set(report) == {
            "eta", "t0", "N", "tau_max", "M_a", "M_b", "delta", "windows",
            "C_star_est", "verdict", "epsilon", "C", "lambda0", "alpha", "K",
        }
        assert report["verdict"] == "certified"
        assert set(report["windows"][0]) == {
            "k", "mu_eta", "mu_minus", "mu_plus", "ratio"}

    def test_measure_writes_totals(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, stable_scalar_config(out))
        assert main(["measure", "--config", cfg]) == 0
        lines = (out / "measures.csv").read_text().strip().splitlines()
        assert lines[0] == "k,mu_eta,mu_minus,mu_plus,ratio"
        assert lines[-1].startswith("total,")

    def test_simulate_writes_trajectories(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, stable_scalar_config(out))
        assert main(["simulate", "--config", cfg]) == 0
        header = (out / "traj_00.csv").read_text().splitlines()[0]
        assert header == "t,x1"
        m0 = (out / "m0_00.csv").read_text().splitlines()[0]
        assert m0 == "t,value"
        payload = json.loads((out / "simulate.json").read_text())
        assert len(payload["final_abs"]) == 2
        # the run is certified, so the oracle battery must have been run
        assert payload["oracles"] and all(r["passed"] for r in payload["oracles"])

    def test_simulate_deterministic(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        cfg = write_config(tmp_path, stable_scalar_config(out1))
        assert main(["simulate", "--config", cfg]) == 0
        assert main(["simulate", "--config", cfg, "--out", str(out2)]) == 0
        assert (out1 / "traj_00.csv").read_bytes() \
            == (out2 / "traj_00.csv").read_bytes()

    def test_seed_override_changes_histories(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        cfg = write_config(tmp_path, stable_scalar_config(out1))
        assert main(["simulate", "--config", cfg]) == 0
        assert main(["simulate", "--config", cfg, "--out", str(out2),
                     "--seed", "99"]) == 0
        assert (out1 / "traj_00.csv").read_bytes() \
            != (out2 / "traj_00.csv").read_bytes()

    def test_svg_output(self, tmp_path):
        out = tmp_path / "out"
        payload = stable_scalar_config(out)
        payload["outputs"]["formats"] = ["csv", "json", "svg"]
        cfg = write_config(tmp_path, payload)
        assert main(["simulate", "--config", cfg]) == 0
        svg = (out / "m0_00.svg").read_text()
        assert svg.startswith("<svg")
        assert 'width="800" height="500"' in svg
        assert "<polyline" in svg

    def test_sync_outputs(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, stable_scalar_config(out))
        assert main(["sync", "--config", cfg]) == 0
        assert (out / "z_00_01.csv").exists()
        payload = json.loads((out / "sync.json").read_text())
        assert "0,1" in payload["final_z"]


class TestShippedConfigs:
    def test_switched_scalar_certifies(self, tmp_path):
        assert main(["certify", "--config", str(SWITCHED_SCALAR),
                     "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["alpha"] > 0

    def test_ring_periodic(self, tmp_path):
        assert main(["periodic", "--config", str(RING3_PERIODIC),
                     "--out", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "periodic.json").read_text())
        assert payload["condition"]["verdict"] is True
        assert payload["condition"]["lhs"] == 0.0
        assert (tmp_path / "orbit.csv").exists()
