import json
from pathlib import Path

import numpy as np
import pytest

from bandmix import make_rng, read_tensor, write_tensor
from bandmix.cli import main

FIXTURE_CORPUS = Path(__file__).parent / "fixtures" / "corpus"


@pytest.fixture
def batch_files(tmp_path):
    rng = make_rng(0)
    x = rng.random((4, 16, 16, 3), dtype=np.float32)
    y = np.eye(4, dtype=np.float32)
    xp = tmp_path / "x.rten"
    yp = tmp_path / "y.rten"
    write_tensor(x, xp)
    write_tensor(y, yp)
    return tmp_path, xp, yp


def run(argv):
    return main([str(a) for a in argv])


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    for sub in ("augment", "spectrum", "lowpass-eval", "train-demo", "mce", "shape-bias", "bench"):
        assert run([sub, "--help"]) == 0
        assert "usage" in capsys.readouterr().out


def test_unknown_flag_is_usage_error(capsys):
    assert run(["augment", "--frobnicate"]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_subcommand_is_usage_error():
    assert run(["transmogrify"]) == 1


def test_augment_round_trip_is_deterministic(batch_files, capsys):
    tmp, xp, yp = batch_files
    argv = [
        "augment", "--policy", "robustmix", "--alpha", "0.2", "--tau", "0",
        "--seed", "7", "--in", xp, "--labels", yp,
        "--out-images", tmp / "xh.rten", "--out-labels", tmp / "yh.rten",
    ]
    assert run(argv) == 0
    draw = json.loads(capsys.readouterr().out)
    assert draw["seed"] == 7 and 0 <= draw["energy_weight"] <= 1
    first_x = (tmp / "xh.rten").read_bytes()
    first_y = (tmp / "yh.rten").read_bytes()
    assert run(argv) == 0
    assert (tmp / "xh.rten").read_bytes() == first_x
    assert (tmp / "yh.rten").read_bytes() == first_y


def test_augment_threads_bit_identical(batch_files):
    tmp, xp, yp = batch_files
    outs = []
    for threads in (1, 4):
        argv = [
            "augment", "--policy", "robustmix", "--seed", "3", "--threads", threads,
            "--in", xp, "--labels", yp,
            "--out-images", tmp / f"x{threads}.rten", "--out-labels", tmp / f"y{threads}.rten",
        ]
        assert run(argv) == 0
        outs.append((tmp / f"x{threads}.rten").read_bytes())
    assert outs[0] == outs[1]


def test_augment_env_seed(batch_files, capsys, monkeypatch):
    tmp, xp, yp = batch_files
    argv = [
        "augment", "--in", xp, "--labels", yp,
        "--out-images", tmp / "a.rten", "--out-labels", tmp / "b.rten",
    ]
    monkeypatch.setenv("ROBUSTMIX_SEED", "11")
    assert run(argv) == 0
    via_env = json.loads(capsys.readouterr().out)
    assert run(argv + ["--seed", "11"]) == 0
    via_flag = json.loads(capsys.readouterr().out)
    assert via_env == via_flag


def test_augment_missing_file_is_data_error(batch_files, capsys):
    tmp, xp, yp = batch_files
    argv = [
        "augment", "--in", tmp / "absent.rten", "--labels", yp,
        "--out-images", tmp / "a.rten", "--out-labels", tmp / "b.rten",
    ]
    assert run(argv) == 2


def test_augment_bad_tau_is_usage_error(batch_files):
    tmp, xp, yp = batch_files
    argv = [
        "augment", "--tau", "1.5", "--in", xp, "--labels", yp,
        "--out-images", tmp / "a.rten", "--out-labels", tmp / "b.rten",
    ]
    assert run(argv) == 1


def test_augment_zero_energy_is_numeric_error(tmp_path):
    write_tensor(np.zeros((2, 8, 8, 1), dtype=np.float32), tmp_path / "x.rten")
    write_tensor(np.eye(2, dtype=np.float32), tmp_path / "y.rten")
    argv = [
        "augment", "--in", tmp_path / "x.rten", "--labels", tmp_path / "y.rten",
        "--out-images", tmp_path / "a.rten", "--out-labels", tmp_path / "b.rten",
    ]
    assert run(argv) == 3


def test_spectrum_fixture_corpus(capsys):
    assert run(["spectrum", "--corpus", FIXTURE_CORPUS, "--cutoffs", "0,0.25,0.5,1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "cutoff,value"
    first = lines[1].split(",")
    last = lines[-1].split(",")
    assert float(first[1]) == 0.0
    assert float(last[1]) == 1.0


def test_spectrum_empty_dir_is_data_error(tmp_path):
    assert run(["spectrum", "--corpus", tmp_path]) == 2


def test_mce_self_normalized_table(tmp_path, capsys):
    p = tmp_path / "errors.csv"
    rows = ["corruption,severity,model_error,ref_error"]
    for name in ("gaussian_noise", "fog"):
        for s in range(1, 6):
            e = 0.1 * s
            rows.append(f"{name},{s},{e},{e}")
    p.write_text("\n".join(rows) + "\n")
    assert run(["mce", "--table", p]) == 0
    out = capsys.readouterr().out
    assert "mCE,100.0" in out
    assert "CE_gaussian_noise,100.0" in out


def test_mce_malformed_table_is_data_error(tmp_path):
    p = tmp_path / "errors.csv"
    p.write_text("wrong,header\n1,2\n")
    assert run(["mce", "--table", p]) == 2


def test_shape_bias_output(capsys):
    assert run(["shape-bias", "--correct-shape", "37", "--correct-texture", "63"]) == 0
    assert capsys.readouterr().out.strip() == "shape_bias,0.37"


def test_shape_bias_no_decisions_is_data_error(capsys):
    assert run(["shape-bias", "--correct-shape", "0", "--correct-texture", "0"]) == 2


def test_bench_reports_mac_model(capsys):
    assert run(["bench", "--size", "32", "--channels", "3", "--batch", "2", "--repeats", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["macs_per_image"] == 6 * 32**3 * 3
    assert report["images_per_second"] > 0
    assert report["mac_convention"] == "1 MAC = 1 FLOP"


def test_train_demo_and_lowpass_eval(tmp_path, capsys):
    argv = [
        "train-demo", "--policies", "baseline,robustmix", "--seeds", "1",
        "--size", "16", "--classes", "3", "--train-size", "24", "--test-size", "30",
        "--epochs", "3", "--save-models", tmp_path / "models",
        "--out-json", tmp_path / "report.json",
    ]
    assert run(argv) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "policy,seed,test_accuracy"
    assert any(l.startswith("robustmix,0,") for l in lines)
    report = json.loads((tmp_path / "report.json").read_text())
    assert "robustmix" in report["policies"]

    model_dir = tmp_path / "models" / "robustmix_seed0"
    manifest = json.loads((model_dir / "manifest.json").read_text())
    assert manifest["policy"] == "robustmix"

    rng = make_rng(1)
    write_tensor(rng.random((10, 16, 16, 1), dtype=np.float32), tmp_path / "ex.rten")
    write_tensor(np.eye(3, dtype=np.float32)[rng.integers(0, 3, 10)], tmp_path / "ey.rten")
    assert run([
        "lowpass-eval", "--model", model_dir, "--images", tmp_path / "ex.rten",
        "--labels", tmp_path / "ey.rten", "--cutoffs", "0,0.5,1",
        "--out", tmp_path / "curve.csv",
    ]) == 0
    curve = (tmp_path / "curve.csv").read_text().strip().splitlines()
    assert curve[0] == "cutoff,value"
    assert len(curve) == 4


def test_train_demo_bad_policy_is_usage_error():
    assert run(["train-demo", "--policies", "nonsense", "--seeds", "1"]) == 1


def test_spectrum_out_file(tmp_path):
    out = tmp_path / "curve.csv"
    assert run(["spectrum", "--corpus", FIXTURE_CORPUS, "--cutoffs", "0,1", "--out", out]) == 0
    assert out.read_text().startswith("cutoff,value")
