import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from geoseg import io
from geoseg.cli import bench_ratios, main


@pytest.fixture(scope="module")
def phantom_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["phantom", "--rows", "256", "--cols", "512", "--sigma", "0.05", "--seed", "7",
                 "--out", str(d / "p.pgm"), "--truth", str(d / "truth.json")]) == 0
    return d


def test_phantom_segment_eval(phantom_files, capsys):
    d = phantom_files
    assert main(["segment", str(d / "p.pgm"), str(d / "seg.json"), "--overlay", str(d / "o.ppm")]) == 0
    assert io.read_ppm(d / "o.ppm").shape == (256, 512, 3)
    capsys.readouterr()
    assert main(["eval", str(d / "seg.json"), str(d / "truth.json")]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["boundary", "se", "ae", "hd"]
    assert [r[0] for r in rows[1:]] == [f"B{i}" for i in range(1, 10)] + ["overall"]
    assert all(float(r[2]) <= 1.0 for r in rows[1:])


def test_eval_scaling(phantom_files, tmp_path):
    d = phantom_files
    out1, out2 = tmp_path / "px.csv", tmp_path / "um.csv"
    assert main(["eval", str(d / "truth.json"), str(d / "truth.json"), "--output", str(out1)]) == 0
    assert main(["eval", str(d / "truth.json"), str(d / "truth.json"), "--scale-um", "3.3",
                 "--output", str(out2)]) == 0
    assert all(float(v) == 0 for r in list(csv.reader(open(out2)))[1:] for v in r[1:])


def test_distance_seed_is_zero(tmp_path, capsys):
    io.write_grid(tmp_path / "w.bin", np.ones((20, 30)))
    assert main(["distance", str(tmp_path / "w.bin"), str(tmp_path / "d.bin"), "--source", "4", "7"]) == 0
    d = io.read_grid(tmp_path / "d.bin")
    assert d[4, 7] == 0 and d.shape == (20, 30)
    assert json.loads(capsys.readouterr().out)["converged"]


def test_distance_trace(tmp_path, capsys):
    io.write_grid(tmp_path / "w.bin", np.ones((11, 40)))
    main(["distance", str(tmp_path / "w.bin"), str(tmp_path / "d.bin"), "--source", "5", "0"])
    capsys.readouterr()
    assert main(["trace", str(tmp_path / "d.bin"), "--source", "5", "0", "--target", "5", "39"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["reached_seed"] and np.allclose(out["depths"], 5.0, atol=0.5)
    assert main(["trace", str(tmp_path / "d.bin"), "--source", "5", "1", "--target", "5", "39"]) == 1


def test_weights_denoise_baseline(tmp_path, rng):
    img = np.where(np.arange(30)[:, None] < 15, 0.2, 0.8) * np.ones((1, 25))
    io.write_pgm(tmp_path / "s.pgm", img)
    assert main(["weights", str(tmp_path / "s.pgm"), str(tmp_path / "w.bin"), "--strategy", "vertical"]) == 0
    assert io.read_grid(tmp_path / "w.bin").shape == (30, 25)
    assert main(["denoise", str(tmp_path / "s.pgm"), str(tmp_path / "dn.pgm")]) == 0
    assert main(["baseline", str(tmp_path / "s.pgm"), str(tmp_path / "b.json"), "--id", "B4"]) == 0
    b = io.read_boundaries(tmp_path / "b.json")
    assert list(b) == ["B4"] and np.all(np.abs(b["B4"] - 14.5) <= 1)
    assert main(["overlay", str(tmp_path / "s.pgm"), str(tmp_path / "o.ppm"),
                 "--boundaries", str(tmp_path / "b.json")]) == 0


def test_segment3d(tmp_path):
    assert main(["phantom", "--slices", "2", "--dip", "0", "--out", str(tmp_path / "v.bin")]) == 0
    assert main(["segment3d", str(tmp_path / "v.bin"), str(tmp_path / "s.json"), "--no-denoise",
                 "--threads", "2"]) == 0
    assert io.read_boundaries(tmp_path / "s.json")["B9"].shape == (2, 512)


def test_segmentation_failure_exit_code(tmp_path, capsys):
    io.write_pgm(tmp_path / "n.pgm", np.random.default_rng(0).uniform(0, 1, (60, 60)))
    assert main(["segment", str(tmp_path / "n.pgm"), str(tmp_path / "x.json"), "--max-cycles", "1"]) == 2
    assert "B7" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    assert main(["segment", str(tmp_path / "missing.pgm"), str(tmp_path / "x.json")]) == 1
    (tmp_path / "junk.pgm").write_bytes(b"hello")
    assert main(["segment", str(tmp_path / "junk.pgm"), str(tmp_path / "x.json")]) == 1
    with pytest.raises(SystemExit) as err:
        main(["segment", "--strategy", "bogus"])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 1


def test_bench(capsys):
    assert main(["bench", "--rows", "32", "--cols", "32", "--repeats", "1"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["method", "small_s", "large_s", "ratio"] and [r[0] for r in rows[1:]] == ["gdm", "dijkstra"]
    res = bench_ratios(16, 16, repeats=1, baseline=False)
    assert "dijkstra_ratio" not in res and res["gdm_ratio"] > 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "geoseg", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "segment3d" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "geoseg", "nope"], capture_output=True, text=True)
    assert proc.returncode == 1
