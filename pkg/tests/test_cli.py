import json
import os

import pytest

from catloop.cli import main


def run_cli(*argv):
    return main(list(argv))


def test_missing_config_file_exits_2(tmp_path):
    code = run_cli("train", "--config", str(tmp_path / "nope.json"),
                   "--out", str(tmp_path / "o"))
    assert code == 2


def test_train_smoke_writes_checkpoint_curve_manifest(tmp_path):
    cfg = {"dim": 8, "horizon": 3, "target_alpha": 1.2, "target_r": 0.6,
           "reward_power": 10, "hidden_sizes": [16, 16], "rollout_steps": 8,
           "minibatch_size": 8, "epochs": 1, "total_steps": 32}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "run"
    code = run_cli("train", "--config", str(cfg_path), "--out", str(out),
                   "--seed", "3", "--n-envs", "2")
    assert code == 0
    names = os.listdir(out)
    assert "training_curve.csv" in names
    assert "checkpoint_final.npz" in names
    assert "manifest.json" in names
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "train"
    assert manifest["seeds"] == [3]


def test_train_determinism_under_seed(tmp_path):
    cfg = {"dim": 8, "horizon": 3, "target_alpha": 1.2, "target_r": 0.6,
           "reward_power": 10, "hidden_sizes": [8, 8], "rollout_steps": 8,
           "minibatch_size": 8, "epochs": 1, "total_steps": 16}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    curves = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert run_cli("train", "--config", str(cfg_path), "--out", str(out),
                       "--seed", "7", "--n-envs", "2") == 0
        curves.append((out / "training_curve.csv").read_bytes())
    assert curves[0] == curves[1]


def test_eval_roundtrip_and_zero_episodes(tmp_path):
    cfg = {"dim": 8, "horizon": 3, "target_alpha": 1.2, "target_r": 0.6,
           "reward_power": 10, "hidden_sizes": [8, 8], "rollout_steps": 8,
           "minibatch_size": 8, "epochs": 1, "total_steps": 16}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    train_out = tmp_path / "train"
    assert run_cli("train", "--config", str(cfg_path), "--out", str(train_out),
                   "--seed", "0", "--n-envs", "2") == 0
    ckpt = str(train_out / "checkpoint_final.npz")

    out0 = tmp_path / "eval0"
    assert run_cli("eval", ckpt, "--episodes", "0", "--seeds", "0",
                   "--out", str(out0), "--horizon", "3") == 0
    report = json.loads((out0 / "evaluation_report.json").read_text())
    assert report["episodes"] == 0

    out = tmp_path / "eval"
    assert run_cli("eval", ckpt, "--episodes", "2", "--seeds", "0,1,2",
                   "--out", str(out), "--horizon", "3") == 0
    report = json.loads((out / "evaluation_report.json").read_text())
    assert report["episodes"] == 6
    for name in ("hist_final_fidelity.csv", "histograms.png", "lookup_table.jsonl"):
        assert (out / name).exists()
    # histogram bin counts sum to the episode count
    rows = (out / "hist_final_fidelity.csv").read_text().strip().splitlines()[1:]
    total = sum(int(r.split(",")[2]) for r in rows)
    assert total == 6


def test_eval_missing_checkpoint_exits_2(tmp_path):
    assert run_cli("eval", str(tmp_path / "none.npz"), "--out", str(tmp_path)) == 2


def test_sweep_fixed_and_moving_outputs(tmp_path):
    out = tmp_path / "fixed"
    assert run_cli("sweep", "fixed", "--out", str(out), "--dim", "20",
                   "--n-max", "4", "--grid-step", "0.05") == 0
    assert (out / "sweep_fixed.csv").exists()
    assert (out / "sweep_fixed.png").exists()

    out2 = tmp_path / "moving"
    assert run_cli("sweep", "moving", "--out", str(out2), "--dim", "20",
                   "--n-max", "3", "--grid-step", "0.05",
                   "--tau-min", "0.1", "--tau-max", "0.2") == 0
    header = (out2 / "sweep_moving.csv").read_text().splitlines()[1]
    assert header == "tau_sq,n,p_n,fid_fixed,fid_opt,alpha_opt,r_opt"
    assert (out2 / "average_optimal_fidelity.csv").exists()

    out3 = tmp_path / "avg"
    assert run_cli("sweep", "average", "--out", str(out3), "--dim", "20",
                   "--n-max", "4", "--grid-step", "0.05") == 0
    assert (out3 / "average_fidelity.png").exists()


def test_sweep_determinism(tmp_path):
    files = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert run_cli("sweep", "fixed", "--out", str(out), "--dim", "16",
                       "--n-max", "3", "--grid-step", "0.1", "--seed", "5") == 0
        files.append((out / "sweep_fixed.csv").read_bytes())
    assert files[0] == files[1]


def test_breed_dry_run_and_bad_descriptor(tmp_path):
    assert run_cli("breed", "fig8", "--dry-run") == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "cutoff": 10,
                               "prep": {"tau_sq": 0.1, "counts": [1]},
                               "stages": [{"kind": "wormhole"}]}))
    assert run_cli("breed", str(bad), "--dry-run") == 2
    assert run_cli("breed", str(tmp_path / "missing.json")) == 2


def test_breed_small_descriptor_runs(tmp_path):
    desc = {"name": "small", "cutoff": 16,
            "prep": {"tau_sq": 0.2, "r0": 0.9, "counts": [1, 2]},
            "stages": [{"kind": "breed_cats",
                        "target": {"kind": "squeezed_cat", "alpha": 1.0,
                                   "r": 0.8, "parity": -1}}]}
    path = tmp_path / "d.json"
    path.write_text(json.dumps(desc))
    out = tmp_path / "out"
    assert run_cli("breed", str(path), "--out", str(out)) == 0
    report = json.loads((out / "breeding_report.json").read_text())
    assert report[1]["stage"] == "breed_cats"
    assert 0.0 <= report[1]["fidelity"] <= 1.0
    assert (out / "stage_0_wigner.png").exists()


def test_table_query_cli(tmp_path, capsys):
    from catloop.lookup import LookupTable
    from catloop.env import EpisodeRecord

    table_path = tmp_path / "t.jsonl"
    table = LookupTable(table_path)
    table.append(EpisodeRecord(sequence=[(0.5, 0.3, 2, 0.1)], total_photons=2,
                               label="even_plain", best_fidelity=0.4,
                               final_fidelity=0.3, steps=1, seed=0))
    assert run_cli("table", str(table_path), "--prefix", "0.5,0.3,2") == 0
    out = capsys.readouterr().out
    assert json.loads(out)[0]["total_photons"] == 2
