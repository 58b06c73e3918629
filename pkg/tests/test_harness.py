"""End-to-end CLI: exit codes, report files, determinism."""

import json
import math

import pytest

from crpursuit.harness import main
from crpursuit.revenue import InputSequence, LinearElasticityRevenue, LinearRevenue, save_sequence

E = math.e


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def write_linear_sequence(tmp_path, prices, delta=1.0, name="seq.json"):
    seq = InputSequence(
        tuple(LinearRevenue(p) for p in prices), delta, min(prices), max(prices)
    )
    path = tmp_path / name
    save_sequence(seq, path)
    return str(path)


class TestOffline:
    def test_linear_sequence_report(self, tmp_path):
        seq_path = write_linear_sequence(tmp_path, [1.0, 3.0, 2.0])
        cfg = write_config(tmp_path, "cfg.json", {"sequence": seq_path})
        assert main(["offline", "--config", cfg, "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "offline.json").read_text())
        assert report["revenue"] == 3.0
        assert report["allocations"] == [0.0, 1.0, 0.0]
        assert report["kkt"]["passed"] is True

    def test_elastic_sequence_report(self, tmp_path):
        seq = InputSequence(
            (LinearElasticityRevenue(2.0, 1.0), LinearElasticityRevenue(4.0, 1.0)),
            1.0,
            2.0,
            4.0,
        )
        seq_path = tmp_path / "elastic.json"
        save_sequence(seq, seq_path)
        cfg = write_config(tmp_path, "cfg.json", {"sequence": str(seq_path)})
        assert main(["offline", "--config", cfg, "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "offline.json").read_text())
        assert report["revenue"] == pytest.approx(3.0, abs=1e-9)

    def test_empty_sequence_exits_2(self, tmp_path):
        bad = tmp_path / "empty.json"
        bad.write_text(json.dumps({"delta": 1.0, "m": 1.0, "M": 2.0, "slots": []}))
        cfg = write_config(tmp_path, "cfg.json", {"sequence": str(bad)})
        assert main(["offline", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_unknown_config_key_exits_2(self, tmp_path):
        seq_path = write_linear_sequence(tmp_path, [1.0, 2.0])
        cfg = write_config(
            tmp_path, "cfg.json", {"sequence": seq_path, "mystery": True}
        )
        assert main(["offline", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_kkt_failure_exits_3(self, tmp_path, monkeypatch):
        from crpursuit import harness
        from crpursuit.offline import KktReport, KktViolation

        seq_path = write_linear_sequence(tmp_path, [1.0, 2.0])
        cfg = write_config(tmp_path, "cfg.json", {"sequence": seq_path})
        failing = KktReport(
            passed=False, violations=(KktViolation(1, "marginal", "forced"),)
        )
        monkeypatch.setattr(harness.offline, "verify_kkt", lambda s, sol: failing)
        assert main(["offline", "--config", cfg, "--out", str(tmp_path)]) == 3


class TestRun:
    def critical_cfg(self, n=2000, rule="one-way"):
        return {"critical": {"m": 1.0, "M": E, "n": n, "delta": 1.0}, "rule": rule}

    def test_one_way_rule_on_critical(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", self.critical_cfg())
        assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["feasible"] is True
        assert summary["empirical_cr"] == pytest.approx(2.0, abs=1e-6)
        trace = (tmp_path / "trace.csv").read_text().splitlines()
        assert trace[0] == "t,p_t,increment,v_bar,inventory_used,online_revenue,eta_opt,breach_flag"
        assert len(trace) == 2001

    def test_below_optimal_ratio_breaches(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", self.critical_cfg(rule=1.5))
        assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["feasible"] is False
        assert summary["total_sold"] > 1.0

    def test_adaptive_single_slot_at_cap(self, tmp_path):
        seq_path = write_linear_sequence(tmp_path, [2.0], name="cap.json")
        cfg = write_config(
            tmp_path, "cfg.json", {"sequence": seq_path, "rule": "adaptive"}
        )
        assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["empirical_cr"] == pytest.approx(1.0, abs=1e-9)
        assert summary["total_sold"] == pytest.approx(1.0, abs=1e-9)

    def test_adaptive_rejects_elastic_input(self, tmp_path):
        seq = InputSequence((LinearElasticityRevenue(2.0, 1.0),), 1.0, 1.0, 2.0)
        seq_path = tmp_path / "elastic.json"
        save_sequence(seq, seq_path)
        cfg = write_config(
            tmp_path, "cfg.json", {"sequence": str(seq_path), "rule": "adaptive"}
        )
        assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_trace_is_byte_identical_across_runs(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", self.critical_cfg(n=500))
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["run", "--config", cfg, "--out", str(out2)]) == 0
        assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()

    def test_random_ensemble(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "random": {
                    "family": "linear",
                    "T": 10,
                    "count": 6,
                    "seed": 3,
                    "delta": 1.0,
                    "m": 1.0,
                    "M": E,
                },
                "rule": "one-way",
            },
        )
        assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
        members = (tmp_path / "members.csv").read_text().splitlines()
        assert members[0].startswith("index,")
        assert len(members) == 7
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["all_feasible"] is True
        assert summary["feasible_count"] == 6

    def test_seed_override_changes_members(self, tmp_path):
        payload = {
            "random": {
                "family": "linear",
                "T": 5,
                "count": 3,
                "seed": 3,
                "delta": 1.0,
                "m": 1.0,
                "M": E,
            },
            "rule": 2.0,
        }
        cfg = write_config(tmp_path, "cfg.json", payload)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", cfg, "--out", str(out1)]) == 0
        assert (
            main(["run", "--config", cfg, "--out", str(out2), "--seed", "99"]) == 0
        )
        assert (out1 / "members.csv").read_text() != (out2 / "members.csv").read_text()

    def test_parallel_workers_match_sequential(self, tmp_path):
        base = {
            "random": {
                "family": "linear_elastic",
                "T": 8,
                "count": 4,
                "seed": 5,
                "delta": 1.0,
                "m": 1.0,
                "M": E,
            },
            "rule": "elasticity",
        }
        cfg1 = write_config(tmp_path, "cfg1.json", base)
        cfg2 = write_config(tmp_path, "cfg2.json", {**base, "workers": 2})
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", cfg1, "--out", str(out1)]) == 0
        assert main(["run", "--config", cfg2, "--out", str(out2)]) == 0
        assert (out1 / "members.csv").read_bytes() == (out2 / "members.csv").read_bytes()

    def test_two_sources_rejected(self, tmp_path):
        seq_path = write_linear_sequence(tmp_path, [1.0, 2.0])
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "sequence": seq_path,
                "critical": {"m": 1.0, "M": E, "n": 5, "delta": 1.0},
                "rule": 2.0,
            },
        )
        assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_unknown_rule_rejected(self, tmp_path):
        seq_path = write_linear_sequence(tmp_path, [1.0, 2.0])
        cfg = write_config(tmp_path, "cfg.json", {"sequence": seq_path, "rule": "best"})
        assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_general_rule_on_critical(self, tmp_path):
        cfg = write_config(tmp_path, "cfg.json", self.critical_cfg(rule="general:2"))
        assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["pi"] == pytest.approx(4.0, abs=1e-12)
        assert summary["feasible"] is True
        assert summary["empirical_cr"] == pytest.approx(4.0, abs=1e-6)


class TestPhi:
    def test_closed_form_column_on_critical(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {
                "pis": [2.0, 3.0, 4.0],
                "critical": {"m": 1.0, "M": E, "n": 2000, "delta": 1.0},
            },
        )
        assert main(["phi", "--config", cfg, "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "phi.csv").read_text().splitlines()
        assert lines[0] == "pi,phi,closed_form"
        rows = [line.split(",") for line in lines[1:]]
        for (pi_s, phi_s, cf_s), expected in zip(rows, (1.0, 2.0 / 3.0, 0.5)):
            assert float(phi_s) == pytest.approx(expected, abs=1e-3)
            assert float(cf_s) == pytest.approx(expected, abs=1e-12)

    def test_flat_band_phi_is_delta_over_pi(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {"pis": [3.0], "critical": {"m": 1.0, "M": 1.0, "n": 50, "delta": 1.0}},
        )
        assert main(["phi", "--config", cfg, "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "phi.csv").read_text().splitlines()
        assert float(lines[1].split(",")[1]) == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_empty_grid_exits_2(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "cfg.json",
            {"pis": [], "critical": {"m": 1.0, "M": E, "n": 10, "delta": 1.0}},
        )
        assert main(["phi", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_sequence_file_source_has_no_closed_form(self, tmp_path):
        seq_path = write_linear_sequence(tmp_path, [1.0, 2.0])
        cfg = write_config(tmp_path, "cfg.json", {"pis": [2.0], "sequence": seq_path})
        assert main(["phi", "--config", cfg, "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "phi.csv").read_text().splitlines()
        assert lines[0] == "pi,phi"
        # increments delta*1 then delta*1: phi = (1 + 1/2) / 2
        assert float(lines[1].split(",")[1]) == pytest.approx(0.75, abs=1e-12)


class TestAdversary:
    def cfg(self, tmp_path, baselines):
        return write_config(
            tmp_path,
            "cfg.json",
            {
                "baselines": baselines,
                "pi_ref": 2.0,
                "critical": {"m": 1.0, "M": E, "n": 1000, "delta": 1.0},
            },
        )

    def test_baseline_reports(self, tmp_path):
        cfg = self.cfg(
            tmp_path, ["greedy", f"threshold:{math.sqrt(E)}", "cr-pursuit:2.0"]
        )
        assert main(["adversary", "--config", cfg, "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "stopper.csv").read_text().splitlines()
        assert lines[0] == "algorithm,tau,alg_revenue,eta_opt,ratio"
        assert len(lines) == 4
        by_name = {line.split(",")[0]: line.split(",") for line in lines[1:]}
        assert float(by_name["greedy"][4]) >= 2.0 - 1e-2
        assert by_name[f"threshold:{math.sqrt(E):.6g}"][4] == "inf"
        assert float(by_name["cr-pursuit:2"][4]) == pytest.approx(2.0, abs=1e-6)

    def test_unknown_baseline_exits_2(self, tmp_path):
        cfg = self.cfg(tmp_path, ["prophet"])
        assert main(["adversary", "--config", cfg, "--out", str(tmp_path)]) == 2
