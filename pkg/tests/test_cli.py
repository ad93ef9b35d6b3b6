import json

import pytest

from fedbench.cli import main
from fedbench.data import load_csv


def write_config(tmp_path, **overrides):
    raw = {
        "dataset": {
            "synthetic": {
                "n_drugs": 20,
                "n_proteins": 8,
                "n_records": 200,
                "latent_dim": 4,
                "noise_sd": 0.1,
            }
        },
        "strategy": "entity_protein",
        "rounds": 2,
        "base_seed": 77,
        "client_counts": [2],
        "mixing_levels": [0.0, 1.0],
        "model": {"kind": "linear", "embedding_dim": 4},
        "train": {"epochs": 1, "learning_rate": 0.05, "batch_size": 32},
        "repeats": 1,
    }
    raw.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw))
    return path


class TestSynth:
    def test_writes_dataset(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["synth", "--config", str(cfg), "--out", str(out)]) == 0
        ds = load_csv(out / "dataset.csv")
        assert len(ds) == 200
        meta = json.loads((out / "dataset.json").read_text())
        assert meta["n_records"] == 200

    def test_needs_synthetic_block(self, tmp_path):
        cfg = write_config(tmp_path, dataset={"path": "missing.csv"})
        assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


class TestPartitionCommand:
    def test_manifest_files(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        rc = main(["partition", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        lines = (out / "partition.csv").read_text().splitlines()
        assert lines[0] == "record_index,client_id"
        assert len(lines) == 161  # header + 80% train split of 200
        prov = json.loads((out / "partition.json").read_text())
        assert prov["n_clients"] == 2


class TestFedAndEnsemble:
    def test_fed_outputs(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "fed"
        assert main(["fed", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "history.csv").read_text().splitlines()
        assert lines[0] == "round,global_mse"
        assert len(lines) == 3
        assert (out / "final.params").exists()

    def test_ensemble_outputs(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "ens"
        assert main(["ensemble", "--config", str(cfg), "--out", str(out)]) == 0
        meta = json.loads((out / "mse.json").read_text())
        assert meta["members"] == 2
        assert meta["ensemble_mse"] > 0


class TestCompareAndGrid:
    def test_compare_csv(self, tmp_path):
        cfg = write_config(tmp_path, strategy="iid")
        out = tmp_path / "cmp"
        assert main(["compare", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "compare.csv").read_text().splitlines()
        assert lines[0] == "distribution,client_count,ensemble_mse,federated_mse,pct_difference"
        assert len(lines) == 3  # one client count, two distributions

    def test_grid_then_report_round_trip(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "grid"
        assert main(["grid", "--config", str(cfg), "--out", str(out)]) == 0
        grid_bytes = (out / "grid.csv").read_bytes()
        re_out = tmp_path / "re"
        rc = main(
            [
                "report",
                "--config",
                str(cfg),
                "--cells",
                str(out / "cells.csv"),
                "--out",
                str(re_out),
            ]
        )
        assert rc == 0
        assert (re_out / "grid.csv").read_bytes() == grid_bytes


class TestExitCodes:
    def test_unknown_config_key_is_config_error(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"bogus": 1}))
        assert main(["grid", "--config", str(path), "--out", str(tmp_path / "o")]) == 1

    def test_bad_flag_is_config_error(self, tmp_path):
        assert main(["grid", "--nope"]) == 1

    def test_runtime_error_is_two(self, tmp_path):
        # dataset path that does not exist fails at run time
        cfg = write_config(tmp_path, dataset={"path": str(tmp_path / "missing.csv")})
        assert main(["grid", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_seed_override_changes_results(self, tmp_path):
        cfg = write_config(tmp_path)
        a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        main(["grid", "--config", str(cfg), "--out", str(a)])
        main(["grid", "--config", str(cfg), "--out", str(b), "--seed", "99"])
        main(["grid", "--config", str(cfg), "--out", str(c), "--seed", "99"])
        assert (a / "grid.csv").read_bytes() != (b / "grid.csv").read_bytes()
        assert (b / "grid.csv").read_bytes() == (c / "grid.csv").read_bytes()
