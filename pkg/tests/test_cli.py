"""CLI: subcommands, exit codes, report formats, golden snapshot."""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from divsel.cli import main

# Desk-scale configs sit below the study-design ranges on purpose.
pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")

DATA = Path(__file__).parent / "data"


@pytest.fixture
def fixture_args(tmp_path):
    return [
        "--embeddings", str(DATA / "fixture_embeddings.tsv"),
        "--candidates", str(DATA / "fixture_candidates.csv"),
        "--profile", str(DATA / "fixture_profile.csv"),
    ]


def write_sim_config(tmp_path, **extra) -> str:
    values = dict(
        n_candidates=8,
        terms_per_cluster=4,
        dimension=32,
        intra_cluster_similarity=0.99,
        noise_pool_size=40,
        n_symptoms_min=2,
        n_symptoms_max=4,
        n_noise_min=3,
        n_noise_max=8,
        allow_wide_ranges="true",
    )
    values.update(extra)
    path = tmp_path / "sim.cfg"
    path.write_text(
        "# desk-scale test config\n"
        + "".join(f"{k}={v}\n" for k, v in values.items()),
        encoding="utf-8",
    )
    return str(path)


class TestSelect:
    def test_exact_match_fixture(self, fixture_args, capsys):
        assert main(["select", *fixture_args, "--info", "0.9"]) == 0
        out, err = capsys.readouterr()
        lines = out.strip().splitlines()
        assert lines[0].startswith("rank,item_id,")
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) == 3
        for row in rows:
            assert abs(float(row[2]) - 1.0) < 1e-9
        assert "k_optimal=3" in err

    def test_missing_profile_exits_2(self, fixture_args, capsys):
        args = fixture_args.copy()
        args[5] = "/nonexistent/profile.csv"
        assert main(["select", *args]) == 2
        assert "/nonexistent/profile.csv" in capsys.readouterr().err

    def test_invalid_parameter_exits_2(self, fixture_args, capsys):
        assert main(["select", *fixture_args, "--info", "1.5"]) == 2
        assert "info" in capsys.readouterr().err

    def test_no_partial_output_on_error(self, fixture_args, tmp_path, capsys):
        out_path = tmp_path / "report.csv"
        args = fixture_args.copy()
        args[5] = "/nonexistent/profile.csv"
        assert main(["select", *args, "--out", str(out_path)]) == 2
        assert not out_path.exists()

    def test_golden_report_bytes(self, fixture_args, tmp_path):
        golden = (DATA / "golden_report.csv").read_bytes()
        for attempt in range(2):
            out_path = tmp_path / f"report{attempt}.csv"
            assert main(
                ["select", *fixture_args, "--info", "0.9", "--out", str(out_path)]
            ) == 0
            assert out_path.read_bytes() == golden

    def test_json_format(self, fixture_args, capsys):
        assert main(["select", *fixture_args, "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["k_optimal"] == 3
        assert [item["item_id"] for item in payload["items"]] == ["alpha", "beta", "gamma"]
        assert payload["items"][0]["related_terms"][0]["term"] == "t0"

    def test_table_format(self, fixture_args, capsys):
        assert main(["select", *fixture_args, "--format", "table"]) == 0
        out = capsys.readouterr().out
        assert "Rank" in out and "alpha" in out

    def test_select_n_override(self, fixture_args, capsys):
        assert main(["select", *fixture_args, "--info", "0.5", "--select-n", "3"]) == 0
        out = capsys.readouterr().out
        assert out.count(",true,") == 3

    def test_unknown_flag_rejected(self, fixture_args):
        with pytest.raises(SystemExit) as err:
            main(["select", *fixture_args, "--bogus", "1"])
        assert err.value.code == 2

    def test_single_candidate_degenerate(self, tmp_path, capsys):
        emb = tmp_path / "e.tsv"
        emb.write_text("solo\t1\t0\n", encoding="utf-8")
        cand = tmp_path / "c.csv"
        cand.write_text("lonely,,solo\n", encoding="utf-8")
        prof = tmp_path / "p.csv"
        prof.write_text("solo,4\n", encoding="utf-8")
        code = main(["select", "--embeddings", str(emb), "--candidates", str(cand),
                     "--profile", str(prof)])
        assert code == 0
        out, err = capsys.readouterr()
        rows = out.strip().splitlines()
        assert len(rows) == 2
        assert rows[1].startswith("1,lonely,1.0,")
        assert ",true," in rows[1]
        assert "k_optimal=1" in err


class TestSimulate:
    def test_single_run_std_zero(self, tmp_path, capsys):
        cfg = write_sim_config(tmp_path)
        out_path = tmp_path / "report.json"
        code = main(
            ["simulate", "--config", cfg, "--runs", "1", "--seed", "7",
             "--info", "0.975", "--out", str(out_path)]
        )
        assert code == 0
        payload = json.loads(out_path.read_text())
        assert len(payload["runs"]) == 1
        for metric in ("recall", "precision", "f1", "size_simulated"):
            assert payload["summary"][metric]["std"] == 0.0
        table = capsys.readouterr().out
        assert "SizeSimulated" in table and "Mean" in table

    def test_repeat_invocations_identical_bytes(self, tmp_path):
        cfg = write_sim_config(tmp_path)
        outs = []
        for i in range(2):
            out_path = tmp_path / f"r{i}.json"
            assert main(
                ["simulate", "--config", cfg, "--runs", "3", "--seed", "42",
                 "--info", "0.975", "--out", str(out_path)]
            ) == 0
            outs.append(out_path.read_bytes())
        assert outs[0] == outs[1]

    def test_info_flag_required(self, tmp_path):
        cfg = write_sim_config(tmp_path)
        with pytest.raises(SystemExit) as err:
            main(["simulate", "--config", cfg, "--runs", "1"])
        assert err.value.code == 2

    def test_invalid_range_exits_2(self, tmp_path, capsys):
        cfg = write_sim_config(tmp_path, allow_wide_ranges="false")
        assert main(["simulate", "--config", cfg, "--runs", "1", "--info", "0.975"]) == 2
        assert "range" in capsys.readouterr().err

    def test_unknown_config_key_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("mystery_knob=3\n", encoding="utf-8")
        assert main(["simulate", "--config", str(path), "--runs", "1", "--info", "0.9"]) == 2
        assert "mystery_knob" in capsys.readouterr().err

    def test_json_to_stdout(self, tmp_path, capsys):
        cfg = write_sim_config(tmp_path)
        assert main(
            ["simulate", "--config", cfg, "--runs", "2", "--seed", "1",
             "--info", "0.975", "--format", "json"]
        ) == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["runs"]) == 2

    def test_worker_count_does_not_change_report(self, tmp_path):
        cfg = write_sim_config(tmp_path)
        outs = []
        for i, workers in enumerate(("1", "3")):
            out_path = tmp_path / f"w{i}.json"
            assert main(
                ["simulate", "--config", cfg, "--runs", "6", "--seed", "11",
                 "--info", "0.975", "--workers", workers, "--out", str(out_path)]
            ) == 0
            outs.append(out_path.read_bytes())
        assert outs[0] == outs[1]


class TestTpir:
    def test_csv_output(self, tmp_path, capsys):
        cfg = write_sim_config(tmp_path)
        out_path = tmp_path / "tpir.csv"
        assert main(
            ["tpir", "--config", cfg, "--reps", "2", "--seed", "3",
             "--out", str(out_path)]
        ) == 0
        lines = out_path.read_text().strip().splitlines()
        assert lines[0] == "item_id,max_similarity,tpir"
        assert len(lines) == 9  # 8 candidates + header
        assert "median TPIR" in capsys.readouterr().err


class TestReport:
    def test_formats_simulation_json(self, tmp_path, capsys):
        cfg = write_sim_config(tmp_path)
        out_path = tmp_path / "report.json"
        assert main(
            ["simulate", "--config", cfg, "--runs", "2", "--seed", "5",
             "--info", "0.975", "--out", str(out_path)]
        ) == 0
        capsys.readouterr()
        assert main(["report", "--in", str(out_path)]) == 0
        table = capsys.readouterr().out
        for label in ("Mean", "Std", "Min", "Median", "Max", "SizeSimulated", "Recall"):
            assert label in table

    def test_rejects_non_report_json(self, tmp_path, capsys):
        path = tmp_path / "other.json"
        path.write_text('{"k_optimal": 3}', encoding="utf-8")
        assert main(["report", "--in", str(path)]) == 2
        assert "summary" in capsys.readouterr().err


class TestHelp:
    @pytest.mark.parametrize(
        "sub,flags",
        [
            ("select", ["--embeddings", "--candidates", "--profile", "--info", "--k",
                        "--x0", "--beta", "--alpha", "--select-n", "--out", "--format"]),
            ("simulate", ["--config", "--runs", "--seed", "--info", "--workers", "--out"]),
            ("tpir", ["--config", "--reps", "--seed", "--info", "--out"]),
            ("report", ["--in"]),
        ],
    )
    def test_subcommand_help_documents_flags(self, sub, flags):
        proc = subprocess.run(
            [sys.executable, "-m", "divsel.cli", sub, "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        for flag in flags:
            assert flag in proc.stdout

    def test_select_help_shows_defaults(self):
        proc = subprocess.run(
            [sys.executable, "-m", "divsel.cli", "select", "--help"],
            capture_output=True, text=True,
        )
        assert "default: 20" in proc.stdout
        assert "default: 0.8" in proc.stdout
        assert "default: 0.1" in proc.stdout
        assert "default: 0.9" in proc.stdout
