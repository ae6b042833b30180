import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from hypertopo import soft_euler
from hypertopo.harness.cli import main
from hypertopo.harness.codecs import read_mask, read_prediction, write_mask, write_probmap
from hypertopo.harness.evaluate import parse_config
from hypertopo.metrics import evaluate_sample


@pytest.fixture
def ring_file(tmp_path, ring):
    path = tmp_path / "ring.pgm"
    write_mask(ring, path)
    return path


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_topo(ring_file, tmp_path, capsys):
    assert main(["topo", str(ring_file)]) == 0
    assert capsys.readouterr().out.strip() == "beta0=1 beta1=1 chi=0"
    write_mask(np.zeros((4, 4), np.uint8), tmp_path / "empty.pgm")
    assert main(["topo", str(tmp_path / "empty.pgm")]) == 0
    assert capsys.readouterr().out.strip() == "beta0=0 beta1=0 chi=0"


def test_topo_io_errors(tmp_path, capsys):
    assert main(["topo", str(tmp_path / "missing.pgm")]) == 2
    (tmp_path / "bad.pgm").write_bytes(b"P5 2 2 7\n" + bytes(4))
    assert main(["topo", str(tmp_path / "bad.pgm")]) == 2


def test_probchi(tmp_path, capsys):
    write_probmap(np.full((2, 2), 0.5), tmp_path / "half.pmap")
    assert main(["probchi", str(tmp_path / "half.pmap")]) == 0
    assert capsys.readouterr().out.strip() == "chi_soft=1.0625"


def test_usage_errors(capsys):
    assert_exit = pytest.raises(SystemExit)
    with assert_exit as exc:
        main([])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["gradcheck", "--sizes", "a,b"])
    assert exc.value.code == 1


def test_select(tmp_path, capsys):
    log = tmp_path / "log.csv"
    log.write_text("checkpoint_id,mean_dice,mean_pd\nA,0.50,0.30\nB,0.52,0.28\nC,0.51,0.25\n")
    assert main(["select", str(log), "--k", "2"]) == 0
    assert capsys.readouterr().out.strip() == "C"
    # k beyond the row count reduces to the global minimum PD
    assert main(["select", str(log), "--k", "10"]) == 0
    assert capsys.readouterr().out.strip() == "C"
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("select.k = 1\n")
    assert main(["select", str(log), "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.strip() == "B"


def test_select_rejects_bad_logs(tmp_path, capsys):
    log = tmp_path / "log.csv"
    log.write_text("checkpoint_id,mean_dice,mean_pd\nA,0.5,0.3\nA,0.6,0.2\n")
    assert main(["select", str(log)]) == 2
    log.write_text("checkpoint_id,mean_dice,mean_pd\n")
    assert main(["select", str(log)]) == 2
    log.write_text("nonsense\n")
    assert main(["select", str(log)]) == 2
    assert main(["select", str(log), "--k", "0"]) == 1


def test_config_parsing():
    run = parse_config("threshold=0.4\nbf1_tolerance=3  # px\npd.kind=bottleneck\npd.q=2\nselect.k=7\n")
    assert run.eval.threshold == 0.4 and run.eval.bf1_tolerance == 3
    assert run.eval.pd.kind == "bottleneck" and run.eval.pd.q == 2.0 and run.select_k == 7
    assert parse_config("threshold=0.4", threshold=0.6).eval.threshold == 0.6
    defaults = parse_config("")
    assert (defaults.eval.threshold, defaults.eval.bf1_tolerance, defaults.select_k) == (0.5, 2, 5)
    for bad in ("colour=red", "threshold", "threshold=2", "pd.kind=sliced", "select.k=0"):
        with pytest.raises(ValueError):
            parse_config(bad)


def make_dataset(tmp_path, n=10):
    gt, pred = tmp_path / "gt", tmp_path / "pred"
    assert main(["synth", "--out", str(gt), "--pred", str(pred), "--n", str(n), "--seed", "3",
                 "--height", "40", "--width", "40", "--blobs", "3", "--holes", "2"]) == 0
    return pred, gt


def test_eval_self_prediction_is_perfect(tmp_path):
    _, gt = make_dataset(tmp_path, 4)
    out = tmp_path / "out.csv"
    assert main(["eval", "--pred", str(gt), "--gt", str(gt), "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == ["sample_id", "dice", "iou", "bf1", "d_beta0", "d_beta1", "pd_dist"]
    assert [r[0] for r in rows[1:]] == [f"sample_{i:04d}" for i in range(4)] + ["#mean", "#median"]
    assert all(float(r[1]) == 1.0 for r in rows[1:])


def test_eval_matches_library(tmp_path):
    pred, gt = make_dataset(tmp_path, 10)
    out = tmp_path / "out.csv"
    jsonl = tmp_path / "out.jsonl"
    assert main(["eval", "--pred", str(pred), "--gt", str(gt), "--out", str(out),
                 "--jsonl", str(jsonl), "--workers", "3"]) == 0
    rows = read_rows(out)[1:-2]
    assert len(rows) == 10
    for row, line in zip(rows, jsonl.read_text().splitlines()):
        stem = row[0]
        rec = evaluate_sample(stem, read_prediction(pred / f"{stem}.pmap"), read_mask(gt / f"{stem}.pgm"))
        assert row == rec.csv_row()
        assert json.loads(line) == rec.as_dict()
    meta = json.loads((tmp_path / "out.csv.meta.json").read_text())
    assert meta["select.k"] == 5 and meta["bf1_tolerance"] == 2 and meta["samples"] == 10


def test_eval_reports_missing_files(tmp_path, capsys):
    pred, gt = make_dataset(tmp_path, 3)
    (gt / "sample_0001.pgm").unlink()
    (pred / "sample_0002.pmap").write_bytes(b"PMAP1\n40 40\n")
    out = tmp_path / "out.csv"
    assert main(["eval", "--pred", str(pred), "--gt", str(gt), "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "sample_0001" in err and "sample_0002" in err
    # the good sample is still written
    assert [r[0] for r in read_rows(out)[1:]] == ["sample_0000", "#mean", "#median"]


def test_eval_shape_mismatch_is_per_sample(tmp_path, capsys):
    pred, gt = make_dataset(tmp_path, 2)
    write_mask(np.zeros((5, 5), np.uint8), gt / "sample_0000.pgm")
    out = tmp_path / "out.csv"
    assert main(["eval", "--pred", str(pred), "--gt", str(gt), "--out", str(out)]) == 2
    assert "ShapeMismatchError" in capsys.readouterr().err
    assert read_rows(out)[1][0] == "sample_0001"


def test_eval_empty_intersection(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    out = tmp_path / "out.csv"
    assert main(["eval", "--pred", str(tmp_path / "a"), "--gt", str(tmp_path / "b"),
                 "--out", str(out)]) == 2
    assert not out.exists()


def test_eval_bad_config_is_usage_error(tmp_path):
    pred, gt = make_dataset(tmp_path, 1)
    cfg = tmp_path / "cfg"
    cfg.write_text("threshold=7\n")
    assert main(["eval", "--pred", str(pred), "--gt", str(gt), "--out", str(tmp_path / "o.csv"),
                 "--config", str(cfg)]) == 1


def test_gradcheck_small_run(capsys):
    assert main(["gradcheck", "--trials", "5", "--sizes", "2,4"]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if "max_rel_err" in l]
    assert len(lines) >= 6 and all(l.endswith("PASS") for l in lines)


def test_gradcheck_catches_sign_flip(monkeypatch, capsys):
    original = soft_euler.soft_euler_grad
    monkeypatch.setattr(soft_euler, "soft_euler_grad", lambda p: -original(p))
    assert main(["gradcheck", "--trials", "3", "--sizes", "3"]) == 3
    assert "soft_euler_char" in capsys.readouterr().err


def test_module_entry_point(ring_file):
    result = subprocess.run([sys.executable, "-m", "hypertopo", "topo", str(ring_file)],
                            capture_output=True, text=True)
    assert result.returncode == 0
    assert result.stdout.strip() == "beta0=1 beta1=1 chi=0"
