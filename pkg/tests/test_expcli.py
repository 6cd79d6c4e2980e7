"""CLI experiment runner: config validation, artifacts, determinism, exit codes."""
import json

import numpy as np
import pytest

from qcae import expcli
from qcae.errors import DivergenceError


def tiny_config(**overrides):
    cfg = {
        "model": "cq1",
        "sigma_mode": "textbook",
        "train": {"steps": 30, "batch": 16, "lr": 0.05, "seed": 7},
        "eval": {"levels": [0.0, 15.0], "batches": 10, "batch": 16},
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


class TestResolveConfig:
    def test_fills_defaults_and_inlines_model(self):
        resolved = expcli.resolve_config({"model": "qq1", "train": {"seed": 1}})
        assert resolved["model"]["name"] == "qq1"
        assert resolved["train"]["steps"] == 2000
        assert resolved["eval"]["levels"] == list(np.arange(0.0, 19.0, 3.0))

    def test_seed_mandatory(self):
        with pytest.raises(expcli.ConfigError, match="train.seed"):
            expcli.resolve_config({"model": "qq1"})

    def test_unknown_model_named_in_error(self):
        with pytest.raises(expcli.ConfigError, match="model"):
            expcli.resolve_config({"model": "qq9", "train": {"seed": 1}})

    def test_sigma_mode_propagates_to_channel(self):
        resolved = expcli.resolve_config(tiny_config())
        assert resolved["model"]["channel"]["sigma_mode"] == "textbook"

    def test_override_arguments(self):
        resolved = expcli.resolve_config(tiny_config(), seed_override=99,
                                         sigma_mode_override="paper")
        assert resolved["train"]["seed"] == 99
        assert resolved["model"]["channel"]["sigma_mode"] == "paper"

    def test_bad_grid_axis(self):
        with pytest.raises(expcli.ConfigError, match="grid.widths"):
            expcli.resolve_config(tiny_config(grid={"widths": [1, 2]}))


class TestRun:
    def test_writes_artifacts_and_exits_zero(self, tmp_path):
        cfg_path = write_config(tmp_path, tiny_config())
        out = tmp_path / "out"
        assert expcli.main(["run", str(cfg_path), "--out", str(out)]) == 0
        assert (out / "train.json").exists()
        assert (out / "sweep.csv").exists()
        assert (out / "config.resolved.json").exists()

    def test_byte_identical_repeat(self, tmp_path):
        cfg_path = write_config(tmp_path, tiny_config())
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert expcli.main(["run", str(cfg_path), "--out", str(out1)]) == 0
        assert expcli.main(["run", str(cfg_path), "--out", str(out2)]) == 0
        for name in ("train.json", "sweep.csv", "config.resolved.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_resolved_config_is_self_contained(self, tmp_path):
        cfg_path = write_config(tmp_path, tiny_config())
        out1 = tmp_path / "orig"
        assert expcli.main(["run", str(cfg_path), "--out", str(out1)]) == 0
        out2 = tmp_path / "replay"
        assert expcli.main(["run", str(out1 / "config.resolved.json"),
                            "--out", str(out2)]) == 0
        assert (out1 / "train.json").read_bytes() == (out2 / "train.json").read_bytes()
        assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()

    def test_dry_run_writes_nothing(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, tiny_config())
        out = tmp_path / "dry"
        assert expcli.main(["run", str(cfg_path), "--out", str(out), "--dry-run"]) == 0
        assert not out.exists()
        printed = capsys.readouterr().out
        assert "tx params: 8" in printed and "rx params: 8" in printed

    def test_invalid_json_exits_two(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"model": "cq1",')
        assert expcli.main(["run", str(path)]) == 2
        assert "line" in capsys.readouterr().err

    def test_missing_seed_exits_two(self, tmp_path, capsys):
        cfg = tiny_config()
        del cfg["train"]["seed"]
        cfg_path = write_config(tmp_path, cfg)
        assert expcli.main(["run", str(cfg_path)]) == 2
        assert "train.seed" in capsys.readouterr().err

    def test_divergence_exits_three(self, tmp_path, monkeypatch, capsys):
        cfg_path = write_config(tmp_path, tiny_config())

        def explode(*args, **kwargs):
            raise DivergenceError("non-finite loss at step 3")

        monkeypatch.setattr(expcli, "train", explode)
        assert expcli.main(["run", str(cfg_path), "--out", str(tmp_path / "d")]) == 3
        assert "diverged" in capsys.readouterr().err

    def test_qcae_out_env_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QCAE_OUT", str(tmp_path / "root"))
        cfg_path = write_config(tmp_path, tiny_config(), name="envrun.json")
        assert expcli.main(["run", str(cfg_path)]) == 0
        assert (tmp_path / "root" / "envrun" / "train.json").exists()


class TestGrid:
    def test_lr_grid_runs_and_ranks(self, tmp_path):
        cfg = tiny_config(grid={"lr": [0.1, 0.05]})
        cfg_path = write_config(tmp_path, cfg)
        out = tmp_path / "grid"
        assert expcli.main(["grid", str(cfg_path), "--out", str(out)]) == 0
        results = (out / "grid_results.csv").read_text().strip().splitlines()
        assert len(results) == 3  # header + 2 points
        assert results[0].startswith("rank,tag,model,params")
        assert (out / "g000_lr0.1" / "train.json").exists()
        assert (out / "g001_lr0.05" / "train.json").exists()

    def test_grid_of_size_one_matches_plain_run(self, tmp_path):
        cfg = tiny_config(grid={"lr": [0.05]})
        cfg_path = write_config(tmp_path, cfg)
        gout, rout = tmp_path / "g", tmp_path / "r"
        assert expcli.main(["grid", str(cfg_path), "--out", str(gout)]) == 0
        plain = tiny_config()
        plain["train"]["lr"] = 0.05
        plain_path = write_config(tmp_path, plain, name="plain.json")
        assert expcli.main(["run", str(plain_path), "--out", str(rout)]) == 0
        assert ((gout / "g000_lr0.05" / "train.json").read_bytes()
                == (rout / "train.json").read_bytes())

    def test_ranking_deterministic(self, tmp_path):
        cfg = tiny_config(grid={"lr": [0.1, 0.05]})
        cfg_path = write_config(tmp_path, cfg)
        outs = []
        for sub in ("g1", "g2"):
            out = tmp_path / sub
            assert expcli.main(["grid", str(cfg_path), "--out", str(out)]) == 0
            rows = (out / "grid_results.csv").read_text().splitlines()
            outs.append([r.split(",")[:8] for r in rows])  # drop outdir column
        assert outs[0] == outs[1]

    def test_missing_grid_block_exits_two(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, tiny_config())
        assert expcli.main(["grid", str(cfg_path)]) == 2
        assert "grid" in capsys.readouterr().err

    def test_layer_axis_changes_quantum_core(self, tmp_path):
        cfg = tiny_config(grid={"layers": [1, 2]})
        resolved = expcli.resolve_config(cfg)
        points = expcli.expand_grid(resolved)
        assert len(points) == 2
        assert points[1][1]["model"]["rx"]["circuit"]["core"]["layers"] == 2


class TestSweepCommand:
    def test_sweep_from_checkpoint(self, tmp_path):
        cfg_path = write_config(tmp_path, tiny_config())
        out = tmp_path / "orig"
        assert expcli.main(["run", str(cfg_path), "--out", str(out)]) == 0
        sout = tmp_path / "resweep"
        assert expcli.main(["sweep", "--checkpoint", str(out / "train.json"),
                            "--levels", "0", "15", "--batches", "10", "--batch", "16",
                            "--out", str(sout)]) == 0
        # same levels/batches/seed as the original run: identical table
        assert (sout / "sweep.csv").read_bytes() == (out / "sweep.csv").read_bytes()

    def test_too_few_batches_exits_two(self, tmp_path, capsys):
        path = tmp_path / "whatever.json"
        path.write_text("{}")
        assert expcli.main(["sweep", "--checkpoint", str(path), "--batches", "5",
                            "--out", str(tmp_path / "s")]) == 2
        assert "batches" in capsys.readouterr().err

    def test_bad_checkpoint_exits_two(self, tmp_path):
        path = tmp_path / "nope.json"
        path.write_text("{}")
        assert expcli.main(["sweep", "--checkpoint", str(path),
                            "--out", str(tmp_path / "s")]) == 2


class TestZoo:
    def test_lists_documented_counts(self, capsys):
        assert expcli.main(["zoo"]) == 0
        out = capsys.readouterr().out
        assert "qc1 " in out and "226" in out
        for token in ("quantum 6", "quantum 14", "quantum 132", "dense 150"):
            assert token in out
