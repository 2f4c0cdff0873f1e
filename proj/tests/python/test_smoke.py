import json
import os
import subprocess
import sys

import numpy as np
import pytest

import linn


def test_stft_istft_roundtrip():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, 48000)
    spec = linn.stft(x)
    assert spec.shape == (188, 257)
    rec = linn.istft(spec, len(x))
    interior = slice(512, len(x) - 512)
    assert np.max(np.abs(rec[interior] - x[interior])) < 1e-6 * np.max(np.abs(x))


def test_model_render_shapes_and_determinism():
    model = linn.Model(seed=7)
    assert model.param_count() == 146132
    rng = np.random.default_rng(2)
    mono = rng.uniform(-0.5, 0.5, 9600).astype(np.float32)
    theta = np.linspace(0.0, 0.9, 27)
    poses = np.zeros((27, 7))
    poses[:, 0] = 1.5 * np.cos(theta)
    poses[:, 1] = 1.5 * np.sin(theta)
    poses[:, 6] = 1.0
    out1 = model.render(mono, poses)
    out2 = model.render(mono, poses)
    assert out1.shape == (2, 9600)
    assert np.array_equal(out1, out2)
    tdw = model.warp_only(mono, poses)
    assert tdw.shape == (2, 9600)


def test_model_save_load_roundtrip(tmp_path):
    model = linn.Model(seed=3)
    path = str(tmp_path / "m.ckpt")
    model.save(path)
    loaded = linn.Model.load(path)
    assert loaded.param_count() == model.param_count()
    cfg = json.loads(loaded.config_json())
    assert cfg["stft"]["window_len"] == 512
    rng = np.random.default_rng(4)
    mono = rng.uniform(-0.5, 0.5, 4800).astype(np.float32)
    poses = np.zeros((15, 7))
    poses[:, 0] = 1.2
    poses[:, 6] = 1.0
    assert np.array_equal(model.render(mono, poses), loaded.render(mono, poses))


def test_metrics_zero_on_identical():
    rng = np.random.default_rng(5)
    x = rng.uniform(-0.5, 0.5, (2, 24000)).astype(np.float32)
    rep = linn.metrics(x, x)
    assert rep == {"wave_l2": 0.0, "amplitude_l2": 0.0, "phase_l2": 0.0, "ipd_l2": 0.0}
    y = rng.uniform(-0.5, 0.5, (2, 24000)).astype(np.float32)
    rep2 = linn.metrics(y, x)
    assert rep2["wave_l2"] > 0


def test_probe_and_mac_counts():
    model = linn.Model(seed=9)
    probe = model.probe(1.5, 0.0, 0.0)
    assert set(probe) == {"left", "right"}
    macs = linn.count_macs(1.0)
    assert macs["macs_per_query"] == 144128
    assert macs["param_count"] == 146132


def test_synth_dataset_layout(tmp_path):
    out = str(tmp_path / "ds")
    linn.synth_dataset(out, seed=1, n_items=2, duration_s=0.3)
    for i in range(2):
        item = os.path.join(out, f"item_{i:03d}")
        for name in ("mono.wav", "binaural.wav", "pose.txt"):
            assert os.path.exists(os.path.join(item, name))
    assert os.path.exists(os.path.join(out, "oracle.json"))


@pytest.mark.skipif("LINN_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_end_to_end(tmp_path):
    cli = os.environ["LINN_CLI"]
    data = str(tmp_path / "data")
    ckpt = str(tmp_path / "model.ckpt")
    wav = str(tmp_path / "out.wav")

    def run(*args):
        proc = subprocess.run([cli, *args], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        return proc.stdout

    run("synth-data", "--out", data, "--seed", "11", "--items", "2", "--duration", "0.4")
    run("train", "--data", data, "--out", ckpt, "--epochs", "2", "--batch", "2",
        "--chunk-len", "7680", "--seed", "1")
    assert os.path.exists(ckpt)
    assert os.path.exists(ckpt + ".log")
    mono = os.path.join(data, "item_000", "mono.wav")
    pose = os.path.join(data, "item_000", "pose.txt")
    run("render", "--input", mono, "--pose", pose, "--checkpoint", ckpt, "--out", wav)
    ref = os.path.join(data, "item_000", "binaural.wav")
    out = run("eval", "--estimate", wav, "--reference", ref)
    fields = dict(line.split("=", 1) for line in out.strip().splitlines())
    assert float(fields["wave_l2"]) >= 0.0
    bench_out = run("bench", "--checkpoint", ckpt, "--seconds", "0.5", "--reps", "1")
    assert "param_count=146132" in bench_out
    csv = str(tmp_path / "probe.csv")
    run("probe", "--checkpoint", ckpt, "--out", csv, "--points", "5")
    with open(csv) as fh:
        rows = fh.read().strip().splitlines()
    assert len(rows) == 1 + 5 * 2  # header + points x ears
