import json
import math

import numpy as np
import pytest

from crio.cli import format_angle, main, parse_angle, parse_axis
from crio.graphstate import CrioTopology, crio_channel_state
from crio.qcore import X_AXIS


class TestAngleParsing:
    @pytest.mark.parametrize(
        "text,value",
        [
            ("pi", math.pi),
            ("3pi/4", 3 * math.pi / 4),
            ("-pi/2", -math.pi / 2),
            ("2pi", 2 * math.pi),
            ("0.7", 0.7),
            ("0", 0.0),
        ],
    )
    def test_parse(self, text, value):
        assert parse_angle(text) == pytest.approx(value, abs=1e-15)

    def test_reject_garbage(self):
        with pytest.raises(ValueError):
            parse_angle("three")

    def test_format_round_trip_quarter_multiples(self):
        for m in range(8):
            assert parse_angle(format_angle(m * math.pi / 4)) == pytest.approx(m * math.pi / 4, abs=1e-9)
        assert format_angle(0.7) == "0.7"

    def test_parse_axis(self):
        assert parse_axis("x") == X_AXIS
        ax = parse_axis("1,0,1")
        assert ax.norm() == pytest.approx(1.0, abs=1e-12)


class TestBuildState:
    def test_three_qubit_channel_json(self, tmp_path):
        out = tmp_path / "h3.json"
        assert main(["build-state", "h3", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        amps = [complex(re, im) for re, im in data["state"]["amplitudes"]]
        ref = crio_channel_state(CrioTopology(1)).amplitudes
        np.testing.assert_allclose(amps, ref, atol=1e-12)
        assert data["artifact_version"]
        assert data["config_hash"]

    def test_bell_pair_resource(self, tmp_path):
        out = tmp_path / "phi.json"
        assert main(["build-state", "phi", "--n", "1", "--out", str(out)]) == 0
        amps = [complex(re, im) for re, im in json.loads(out.read_text())["state"]["amplitudes"]]
        np.testing.assert_allclose(amps, np.array([1, 0, 0, 1]) / math.sqrt(2), atol=1e-12)

    def test_single_vertex_edge_list(self, tmp_path):
        graph_file = tmp_path / "g.txt"
        graph_file.write_text("n=1\n")
        out = tmp_path / "plus.json"
        assert main(["build-state", "--edge-list", str(graph_file), "--out", str(out)]) == 0
        amps = [complex(re, im) for re, im in json.loads(out.read_text())["state"]["amplitudes"]]
        np.testing.assert_allclose(amps, np.array([1, 1]) / math.sqrt(2), atol=1e-12)

    def test_csv_format(self, tmp_path):
        out = tmp_path / "h3.csv"
        assert main(["build-state", "h3", "--format", "csv", "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("# artifact_version=")
        assert lines[1] == "index,real,imag"
        assert len(lines) == 10

    def test_text_format(self, tmp_path):
        out = tmp_path / "run.txt"
        assert main(["run-protocol", "--n", "1", "--seed", "4", "--format", "text", "--out", str(out)]) == 0
        body = out.read_text()
        assert "min_fidelity:" in body and "branches: [8 entries]" in body

    def test_unknown_family_exits_2(self, tmp_path):
        assert main(["build-state", "nope", "--out", str(tmp_path / "x.json")]) == 2

    def test_missing_edge_list_exits_1(self, tmp_path):
        assert main(["build-state", "--edge-list", str(tmp_path / "absent.txt")]) == 1


class TestRunProtocol:
    def test_enumerate_two_systems(self, tmp_path):
        out = tmp_path / "run.json"
        assert main(["run-protocol", "--n", "2", "--seed", "3", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert len(data["branches"]) == 32
        assert data["min_fidelity"] >= 1 - 1e-10
        assert data["total_probability"] == pytest.approx(1.0, abs=1e-10)

    def test_not_permitted_reports_without_failure_exit(self, tmp_path):
        out = tmp_path / "denied.json"
        assert main(["run-protocol", "--n", "1", "--permitted", "false", "--seed", "5", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["permitted"] is False
        assert data["min_fidelity"] < 1 - 1e-6

    def test_config_file(self, tmp_path):
        cfg = {
            "n_systems": 1,
            "axes": [[1.0, 0.0, 0.0]],
            "betas": [0.4],
            "targets": [[[1.0, 0.0], [0.0, 0.0]]],
            "mode": "enumerate",
            "seed": 1,
            "permitted": True,
            "controlled_groups": None,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "run.json"
        assert main(["run-protocol", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["min_fidelity"] >= 1 - 1e-10


class TestReports:
    def test_gm_channel(self, tmp_path):
        out = tmp_path / "gm.json"
        assert main(["gm", "--family", "h2n1", "--n", "1", "--restarts", "24", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["G"] == pytest.approx(1.0, abs=1e-6)
        assert data["state_id"] == "h3"

    def test_control_power_alpha(self, tmp_path):
        out = tmp_path / "cp.json"
        assert main(["control-power", "--alpha", "3pi/4", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["success_rate"] == 0.5
        assert sorted(map(tuple, data["favorable_branches"])) == [(1, 1), (2, 2)]

    def test_control_power_generic(self, tmp_path):
        out = tmp_path / "cp.json"
        assert main(["control-power", "--alpha", "0.7", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["success_rate"] == 0.25

    def test_table_three_quarter_block(self, tmp_path):
        out = tmp_path / "t3.csv"
        assert main(["reproduce-tables", "III", "--out", str(out)]) == 0
        lines = [ln for ln in out.read_text().strip().splitlines() if not ln.startswith("#")]
        header = lines[0].split(",")
        block1 = [dict(zip(header, ln.split(","))) for ln in lines[1:5]]
        by_pair = {row["pair"]: row for row in block1}
        assert by_pair["M1N1"]["alphas"] == "3pi/4|7pi/4"
        assert by_pair["M1N2"]["alphas"] == "pi/4|5pi/4"
        assert by_pair["M2N1"]["alphas"] == "pi/4|5pi/4"
        assert by_pair["M2N2"]["alphas"] == "3pi/4|7pi/4"
        assert by_pair["M1N1"]["K"].startswith("1")
        assert by_pair["M2N1"]["K"].startswith("-1")
        assert complex(by_pair["M1N1"]["c01"]) == pytest.approx(-0.5j, abs=1e-9)

    def test_table_one(self, tmp_path):
        out = tmp_path / "t1.csv"
        assert main(["reproduce-tables", "I", "--out", str(out)]) == 0
        lines = [ln for ln in out.read_text().strip().splitlines() if not ln.startswith("#")]
        assert lines[0].startswith("n_systems")
        for n, line in enumerate(lines[1:], start=1):
            fields = line.split(",")
            assert float(fields[2]) == pytest.approx(n, abs=1e-6)
            assert float(fields[4]) == pytest.approx(n, abs=1e-6)

    def test_unknown_table_exits_2(self, tmp_path):
        assert main(["reproduce-tables", "IV", "--out", str(tmp_path / "x.csv")]) == 2


class TestDeterminism:
    def test_repeat_invocations_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["run-protocol", "--n", "1", "--seed", "11", "--out"]
        assert main(argv + [str(a)]) == 0
        assert main(argv + [str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_table_output_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["reproduce-tables", "II", "--out", str(a)]) == 0
        assert main(["reproduce-tables", "II", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


def test_verify_all(tmp_path, capsys):
    out = tmp_path / "verify.json"
    assert main(["verify-all", "--seed", "2", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "[PASS]" in printed and "[FAIL]" not in printed
    assert json.loads(out.read_text())["failures"] == 0
