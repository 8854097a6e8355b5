import json

import numpy as np
import pytest

from genbound.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, main
from genbound.experiments import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    build_bundle,
    check_invariants,
    loglog_slope,
)
from genbound.problems import build_problem


def write_config(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig.from_dict({"example": "sign-erm", "n_list": [3]})
        assert cfg.mode == "exact" and cfg.mc_samples == 100000

    @pytest.mark.parametrize("data,field", [
        ({"example": "nope", "n_list": [3]}, "example"),
        ({"example": "sign-erm", "n_list": [0]}, "n_list"),
        ({"example": "sign-erm", "n_list": [3], "mode": "fast"}, "mode"),
        ({"example": "sign-erm", "n_list": [3], "bogus": 1}, "bogus"),
        ({"n_list": [3]}, "example"),
    ])
    def test_named_field_errors(self, data, field):
        with pytest.raises(ConfigError, match=field):
            ExperimentConfig.from_dict(data)

    def test_round_trip(self):
        cfg = ExperimentConfig.from_dict({"example": "threshold-erm", "n_list": [3, 4], "seed": 5})
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


class TestRun:
    def test_csv_shape(self, tmp_path, capsys):
        assert main(["run", "--example", "sign-erm", "--n", "3"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        gen = [l for l in lines if ",gen_error," in l]
        assert len(gen) == 1 and gen[0].split(",")[4] == "0.5"

    def test_byte_identical(self, tmp_path):
        outs = []
        for k in range(2):
            out = tmp_path / f"o{k}.csv"
            cfg = write_config(tmp_path, {"example": "sign-erm", "n_list": [3], "mode": "mc",
                                          "mc_samples": 2000, "seed": 9, "out": str(out)}, f"c{k}.json")
            assert main(["run", "--config", cfg]) == EXIT_OK
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_sweep_slopes(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--example", "sign-erm-scaled", "--n", "3", "--n", "5", "--n", "7",
                     "--n", "9", "--out", str(out)]) == EXIT_OK
        text = (tmp_path / "s.csv.slopes.csv").read_text().splitlines()
        assert text[0] == "example,quantity,slope,n_points"
        row = [l for l in text if ",bound:iomi_uniform," in l][0]
        assert float(row.split(",")[2]) <= -0.8, row

    def test_loglog_slope(self):
        ns = np.array([2, 4, 8])
        assert loglog_slope(ns, 3.0 / ns) == pytest.approx(-1.0)


class TestExitCodes:
    def test_bad_json_names_line(self, tmp_path, capsys):
        cfg = write_config(tmp_path, '{\n  "example": "sign-erm",\n  "n_list": [3,]\n}')
        assert main(["run", "--config", cfg]) == EXIT_CONFIG
        assert "line 3" in capsys.readouterr().err

    def test_bad_field(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"example": "sign-erm", "n_list": [3], "mode": "fast"})
        assert main(["run", "--config", cfg]) == EXIT_CONFIG
        assert "mode" in capsys.readouterr().err

    def test_bad_flag(self):
        with pytest.raises(SystemExit) as err:
            main(["run", "--mode", "fast"])
        assert err.value.code == EXIT_CONFIG

    def test_budget(self, capsys):
        assert main(["run", "--example", "onehot-gd", "--n", "3", "--budget", "10"]) == EXIT_BUDGET
        assert "budget" in capsys.readouterr().err

    def test_verify_passes(self, capsys):
        assert main(["verify", "--example", "threshold-erm", "--n", "3"]) == EXIT_OK
        assert "73/73" in capsys.readouterr().out

    def test_verify_reports_failures(self, capsys):
        assert main(["verify", "--example", "sign-erm", "--n", "3"]) == EXIT_INVARIANT
        out = capsys.readouterr().out
        assert "FAIL soundness:iomi_sch_a" in out
        assert "FAIL hyp_cmi_le_iomi:1" in out


class TestCorruptedTable:
    def test_named_invariant(self):
        bundle = build_bundle(build_problem("threshold-erm", 3))
        label, t = bundle.tables[0]
        t.w = t.w * 1.01
        failed = [r.name for r in check_invariants(bundle) if not r.passed]
        assert failed == [f"table_mass:{label}"]
