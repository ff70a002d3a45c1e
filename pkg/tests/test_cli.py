import numpy as np
import pytest

from oplearn.cli import main, parse_config_file, write_ppm
from oplearn.dataset import load, read_header


def run(argv):
    return main(argv)


def gen_dataset(tmp_path, name="d.bin", n=6, res="9 17", extra=()):
    path = tmp_path / name
    argv = ["generate", "--out", str(path),
            "--set", "problem=burgers", "--set", f"N={n}",
            "--set", f"resolutions={res}",
            "--set", "K=8", "--set", "K_solver=32", "--set", "T=0.2",
            "--seed", "4"]
    for item in extra:
        argv += ["--set", item]
    assert run(argv) == 0
    return path


def test_parse_config_file(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\nproblem = burgers\nN=5  # trailing\n\n")
    assert parse_config_file(str(p)) == {"problem": "burgers", "N": "5"}


def test_config_errors_exit_2(tmp_path, capsys):
    out = str(tmp_path / "x")
    # unknown key
    assert run(["generate", "--out", out, "--set", "problem=burgers",
                "--set", "N=2", "--set", "resolutions=9",
                "--set", "bogus=1"]) == 2
    # missing required key
    assert run(["generate", "--out", out, "--set", "problem=burgers"]) == 2
    # malformed --set
    assert run(["generate", "--out", out, "--set", "problem"]) == 2
    # bad proportions
    assert run(["generate", "--out", out, "--set", "problem=burgers",
                "--set", "N=2", "--set", "resolutions=9 17",
                "--set", "proportions=0.5 0.6"]) == 2
    assert "config error" in capsys.readouterr().err


def test_unknown_preset_and_resume_rejected(tmp_path, capsys):
    ds = gen_dataset(tmp_path)
    out = str(tmp_path / "m.ckpt")
    assert run(["train", "--out", out, "--set", "preset=nope",
                "--set", f"dataset={ds}"]) == 2
    assert run(["train", "--out", out, "--set", "preset=smoke",
                "--set", f"dataset={ds}", "--set", "resume=old.ckpt"]) == 2
    capsys.readouterr()


def test_missing_files_exit_3(tmp_path, capsys):
    out = str(tmp_path / "x")
    assert run(["train", "--out", out, "--set", "preset=smoke",
                "--set", "dataset=/nonexistent.bin"]) == 3
    assert run(["eval", "--out", out, "--set", "checkpoint=/nonexistent.ckpt",
                "--set", "datasets=/nonexistent.bin"]) == 3
    assert run(["inspect", "--set", "dataset=/nonexistent.bin"]) == 3
    capsys.readouterr()


def test_generate_writes_dataset_and_snapshot(tmp_path):
    path = gen_dataset(tmp_path)
    ds = load(str(path))
    assert ds.N == 6
    snap = parse_config_file(str(path) + ".config")
    assert snap["command"] == "generate"
    assert snap["seed"] == "4"
    assert "proportions" in snap


def test_pipeline_and_snapshot_rerun_bit_identical(tmp_path, capsys):
    ds = gen_dataset(tmp_path)
    test_ds = gen_dataset(tmp_path, name="t.bin", n=4, res="17")

    ckpt = tmp_path / "m.ckpt"
    assert run(["train", "--out", str(ckpt), "--set", "preset=smoke",
                "--set", f"dataset={ds}", "--set", "epochs=2",
                "--seed", "1"]) == 0
    assert (tmp_path / "m.ckpt.history.csv").exists()

    rep = tmp_path / "r.csv"
    assert run(["eval", "--out", str(rep), "--set", f"checkpoint={ckpt}",
                "--set", f"datasets={test_ds}",
                "--set", "train_resolutions=9"]) == 0
    capsys.readouterr()

    # replay every stage from its snapshot into fresh outputs
    def replay(snap_path, out_path, command):
        snap = parse_config_file(snap_path)
        argv = [command, "--out", out_path]
        for k, v in snap.items():
            if k != "command":
                argv += ["--set", f"{k}={v}"]
        assert run(argv) == 0

    ds2 = tmp_path / "d2.bin"
    replay(str(ds) + ".config", str(ds2), "generate")
    assert ds2.read_bytes() == ds.read_bytes()

    snap = parse_config_file(str(ckpt) + ".config")
    snap["dataset"] = str(ds2)
    ckpt2 = tmp_path / "m2.ckpt"
    argv = ["train", "--out", str(ckpt2)]
    for k, v in snap.items():
        if k != "command":
            argv += ["--set", f"{k}={v}"]
    assert run(argv) == 0
    assert ckpt2.read_bytes() == ckpt.read_bytes()

    rep2 = tmp_path / "r2.csv"
    snap = parse_config_file(str(rep) + ".config")
    snap["checkpoint"] = str(ckpt2)
    argv = ["eval", "--out", str(rep2)]
    for k, v in snap.items():
        if k != "command":
            argv += ["--set", f"{k}={v}"]
    assert run(argv) == 0
    capsys.readouterr()
    assert rep2.read_bytes() == rep.read_bytes()


def test_gap_command(tmp_path, capsys):
    ds = gen_dataset(tmp_path)
    over = gen_dataset(tmp_path, name="o.bin", n=3, res="17")
    non = gen_dataset(tmp_path, name="n.bin", n=3, res="14")
    ckpt = tmp_path / "m.ckpt"
    assert run(["train", "--out", str(ckpt), "--set", "preset=smoke",
                "--set", f"dataset={ds}", "--set", "epochs=1"]) == 0
    out = tmp_path / "g.json"
    assert run(["gap", "--out", str(out), "--set", f"checkpoint={ckpt}",
                "--set", f"datasets={over} {non}",
                "--set", "train_resolutions=9 17"]) == 0
    text = capsys.readouterr().out
    assert "performance gap" in text
    assert out.exists()
    # one class missing: gap undefined, data error
    out2 = tmp_path / "g2.json"
    assert run(["gap", "--out", str(out2), "--set", f"checkpoint={ckpt}",
                "--set", f"datasets={over}",
                "--set", "train_resolutions=9 17"]) == 3
    capsys.readouterr()


def test_inspect_prints_header(tmp_path, capsys):
    ds = gen_dataset(tmp_path)
    assert run(["inspect", "--set", f"dataset={ds}"]) == 0
    out = capsys.readouterr().out
    assert "problem = burgers" in out
    assert "N = 6" in out
    assert "sample_offsets" not in out


def test_render_1d_writes_csv(tmp_path, capsys):
    ds = gen_dataset(tmp_path, name="r.bin", n=3, res="9")
    ckpt = tmp_path / "m.ckpt"
    assert run(["train", "--out", str(ckpt), "--set", "preset=smoke",
                "--set", f"dataset={ds}", "--set", "epochs=1"]) == 0
    base = tmp_path / "fig"
    assert run(["render", "--out", str(base), "--set", f"checkpoint={ckpt}",
                "--set", f"dataset={ds}", "--set", "sample=1"]) == 0
    capsys.readouterr()
    for name in ("input", "truth", "prediction", "error"):
        vals = np.loadtxt(f"{base}.{name}.csv", delimiter=",")
        assert vals.shape == (9,)
    assert not (tmp_path / "fig.truth.ppm").exists()


def test_render_2d_writes_ppm(tmp_path, capsys):
    path = tmp_path / "p.bin"
    assert run(["generate", "--out", str(path), "--set", "problem=poisson",
                "--set", "N=3", "--set", "resolutions=6", "--set", "K=4",
                "--seed", "2"]) == 0
    ckpt = tmp_path / "m.ckpt"
    assert run(["train", "--out", str(ckpt), "--set", "preset=smoke2d",
                "--set", f"dataset={path}", "--set", "epochs=1"]) == 0
    base = tmp_path / "fig"
    assert run(["render", "--out", str(base), "--set", f"checkpoint={ckpt}",
                "--set", f"dataset={path}"]) == 0
    capsys.readouterr()
    raw = (tmp_path / "fig.truth.ppm").read_bytes()
    assert raw.startswith(b"P6\n6 6\n255\n")
    assert len(raw) == len(b"P6\n6 6\n255\n") + 6 * 6 * 3


def test_write_ppm_format(tmp_path):
    rgb = np.zeros((2, 3, 3), dtype=np.uint8)
    rgb[0, 0] = (255, 0, 0)
    path = tmp_path / "x.ppm"
    write_ppm(str(path), rgb)
    raw = path.read_bytes()
    assert raw == b"P6\n3 2\n255\n" + rgb.tobytes()


def test_seed_flag_overrides_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("problem = burgers\nN = 2\nresolutions = 9\n"
                   "K = 8\nK_solver = 32\nT = 0.2\nseed = 1\n")
    out = tmp_path / "a.bin"
    assert run(["generate", "--out", str(out), "--config", str(cfg),
                "--seed", "9"]) == 0
    assert read_header(str(out))["master_seed"] == "9"
