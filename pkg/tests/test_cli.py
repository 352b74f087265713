"""End-to-end CLI tests on a miniature mesh and dataset."""

import json

import numpy as np
import pytest

from knitpad import nn
from knitpad.cli import main
from knitpad.io import read_sample_csv, write_mesh_config, write_washdry_csv
from knitpad.mesh import MeshConfig
from knitpad.resistance import PAIR_KEYS, PairwiseResistance, WashDryRecord

TINY = ["--duration", "0.32", "--frame-rate", "50"]
TINY_FILTER = ["--kept-levels", "1", "--depth", "1"]
TINY_TRAIN = ["--variant", "lstm_only", "--epochs", "1", "--batch-size", "16",
              "--dropout", "0.0", "--lr", "0.01"] + TINY_FILTER


@pytest.fixture(scope="module")
def mesh_ini(tmp_path_factory):
    path = tmp_path_factory.mktemp("mesh") / "mesh.ini"
    write_mesh_config(MeshConfig(rows=4, cols=4), str(path))
    return str(path)


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory, mesh_ini):
    out = tmp_path_factory.mktemp("data") / "train"
    code = main(["gen-dataset", "--out", str(out), "--subjects", "5",
                 "--trials", "1", "--seed", "3", "--mesh", mesh_ini] + TINY)
    assert code == 0
    return str(out)


@pytest.fixture(scope="module")
def model_path(tmp_path_factory, dataset_dir):
    out = tmp_path_factory.mktemp("model") / "m.bin"
    code = main(["train", "--data", dataset_dir, "--out", str(out),
                 "--seed", "1"] + TINY_TRAIN)
    assert code == 0
    return str(out)


def test_gen_dataset_layout(dataset_dir, capsys):
    import os
    assert os.path.exists(os.path.join(dataset_dir, "manifest.csv"))
    assert os.path.exists(os.path.join(dataset_dir, "mesh.ini"))
    names = os.listdir(os.path.join(dataset_dir, "samples"))
    assert len(names) == 5 * 12


def test_train_writes_loadable_model(model_path):
    params = nn.load_model(model_path)
    assert params.spec.variant == "lstm_only"
    assert params.spec.seq_len == 16


def test_classify_sample(model_path, dataset_dir, tmp_path, capsys):
    import os
    sample = os.path.join(dataset_dir, "samples",
                          sorted(os.listdir(os.path.join(dataset_dir, "samples")))[0])
    baseline = os.path.join(dataset_dir, "baselines",
                            sorted(os.listdir(os.path.join(dataset_dir, "baselines")))[0])
    out_json = tmp_path / "result.json"
    code = main(["classify", "--model", model_path, "--sample", sample,
                 "--baseline", baseline, "--json", str(out_json),
                 "--mesh", os.path.join(dataset_dir, "mesh.ini")] + TINY_FILTER)
    assert code == 0
    text = capsys.readouterr().out
    assert "predicted:" in text and "latency:" in text
    body = json.loads(out_json.read_text())
    assert len(body["log_probs"]) == 12
    assert body["predicted_index"] == int(np.argmax(body["log_probs"]))


def test_classify_trajectory(model_path, mesh_ini, tmp_path, capsys):
    traj = tmp_path / "traj.csv"
    rows = ["t,u,v"] + [f"{k / 20},{0.2 + 0.03 * k},0.5" for k in range(21)]
    traj.write_text("\n".join(rows) + "\n")
    code = main(["classify", "--model", model_path, "--trajectory", str(traj),
                 "--mesh", mesh_ini] + TINY_FILTER)
    assert code == 0
    assert "predicted:" in capsys.readouterr().out


def test_simulate_canonical_and_jittered(mesh_ini, tmp_path, capsys):
    out = tmp_path / "o.csv"
    base = tmp_path / "b.csv"
    code = main(["simulate", "--gesture", "O", "--out", str(out),
                 "--baseline-out", str(base), "--mesh", mesh_ini] + TINY)
    assert code == 0
    series = read_sample_csv(str(out))
    assert series.frames.shape == (16, 4)
    baseline = read_sample_csv(str(base))
    assert np.allclose(baseline.frames, baseline.frames[0])

    out2 = tmp_path / "o_jitter.csv"
    code = main(["simulate", "--gesture", "O", "--out", str(out2),
                 "--jitter-seed", "7", "--mesh", mesh_ini] + TINY)
    assert code == 0
    assert read_sample_csv(str(out2)).frames.shape == (16, 4)


def test_cv_eval_round_trip(dataset_dir, mesh_ini, tmp_path, capsys):
    cv_dir = tmp_path / "cv"
    code = main(["cv", "--data", dataset_dir, "--out", str(cv_dir),
                 "--seed", "2"] + TINY_TRAIN)
    assert code == 0
    assert sorted(p.name for p in cv_dir.glob("fold*.bin")) == [
        f"fold{i}.bin" for i in range(5)]
    meta = json.loads((cv_dir / "folds.json").read_text())
    assert len(meta["folds"]) == 5
    assert "mean" in (cv_dir / "report.txt").read_text()

    eval_dir = tmp_path / "eval_data"
    code = main(["gen-dataset", "--out", str(eval_dir), "--subjects", "2",
                 "--trials", "1", "--seed", "9", "--mesh", mesh_ini] + TINY)
    assert code == 0
    out_dir = tmp_path / "eval_out"
    code = main(["eval", "--models-dir", str(cv_dir), "--data", str(eval_dir),
                 "--out", str(out_dir)] + TINY_FILTER)
    assert code == 0
    assert (out_dir / "confusion_holdout.csv").exists()
    metrics = json.loads((out_dir / "metrics_holdout.json").read_text())
    assert 0.0 <= metrics["accuracy"] <= 1.0

    # overlapping subjects are rejected as a domain error
    code = main(["eval", "--models-dir", str(cv_dir), "--data", dataset_dir]
                + TINY_FILTER)
    assert code == 1

    worn_dir = tmp_path / "worn_data"
    code = main(["gen-dataset", "--out", str(worn_dir), "--subjects", "1",
                 "--trials", "1", "--seed", "11", "--mesh", mesh_ini,
                 "--worn-offset", "25e-12"] + TINY)
    assert code == 0
    code = main(["eval", "--models-dir", str(cv_dir), "--data", str(worn_dir),
                 "--worn"] + TINY_FILTER)
    assert code == 0
    # benchtop data under --worn is a protocol violation
    code = main(["eval", "--models-dir", str(cv_dir), "--data", str(eval_dir),
                 "--worn"] + TINY_FILTER)
    assert code == 1


def test_bench_command(model_path, mesh_ini, tmp_path, capsys):
    out_json = tmp_path / "bench.json"
    code = main(["bench", "--model", model_path, "--trials", "30",
                 "--mesh", mesh_ini, "--json", str(out_json)] + TINY_FILTER)
    assert code == 0
    text = capsys.readouterr().out
    assert "first trial" in text and "steady mean" in text
    report = json.loads(out_json.read_text())
    assert report["n_trials"] == 30
    assert report["steady_mean"] <= report["first_trial"]


def test_washdry_command(tmp_path, capsys):
    record = WashDryRecord(
        baseline=PairwiseResistance({k: 4000.0 for k in PAIR_KEYS}),
        after_cycle=(
            PairwiseResistance(
                {k: 4000.0 * (1.1 + 0.01 * i) for i, k in enumerate(PAIR_KEYS)}),
            PairwiseResistance({k: 4000.0 * 1.3 for k in PAIR_KEYS}),
        ),
    )
    path = tmp_path / "wd.csv"
    write_washdry_csv(record, str(path))
    out_json = tmp_path / "wd.json"
    code = main(["washdry", "--record", str(path), "--json", str(out_json)])
    assert code == 0
    text = capsys.readouterr().out
    assert "cycle 1:" in text and "cycle 2:" in text and "cumulative" in text
    payload = json.loads(out_json.read_text())
    assert abs(payload["2"]["cumulative"] - 0.3) < 1e-12

    code = main(["washdry", "--record", str(path), "--cycle", "9"])
    assert code == 1


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["bench", "--model", "m.bin", "--no-such-flag"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_domain_errors_exit_1(tmp_path, capsys):
    code = main(["classify", "--model", str(tmp_path / "missing.bin"),
                 "--sample", str(tmp_path / "missing.csv")])
    assert code == 1
    assert "error:" in capsys.readouterr().err
    code = main(["bench", "--model", str(tmp_path / "missing.bin"),
                 "--trials", "10"])
    assert code == 1
