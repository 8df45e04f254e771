import csv
import subprocess
import sys

import numpy as np
import pytest

from s2vaudit.cli import main
from s2vaudit.embed_store import EmbeddingTable, save_embeddings_file

TINY_TRAIN = ["--vocab", "12", "--sentences", "30", "--sentence-len", "4", "--dim", "4", "--hidden", "3",
              "--window", "1", "--fixed-frames", "6", "--batch-size", "16", "--min-count", "1"]


@pytest.fixture
def files(tmp_path):
    rng = np.random.default_rng(0)
    words = ["ate", "eight", "sea", "see", "cat", "dog", "sun", "moon"]
    emb = tmp_path / "emb.txt"
    save_embeddings_file(EmbeddingTable(words, rng.normal(size=(8, 5))), emb)
    homo = tmp_path / "homo.txt"
    homo.write_text("ate,eight\nsea\tsee\nhail,hale\n")
    bench = tmp_path / "bench"
    bench.mkdir()
    (bench / "MEN.txt").write_text("cat\tdog\t8\nsun\tmoon\t6\ncat\tsun\t1\nate\tsea\t2\nzzz\tdog\t3\n")
    (bench / "RG-65.csv").write_text("word1,word2,score\ncat,dog,3.5\nsun,moon,2.0\ndog,moon,0.5\n")
    trans = tmp_path / "trans.txt"
    trans.write_text("the cat ate\nthe dog\nthe sun\n")
    return dict(emb=emb, homo=homo, bench=bench, trans=trans, root=tmp_path)


def run(args, out):
    return main(["--quiet", "--out-dir", str(out), *args])


def test_inspect_writes_reports_and_is_deterministic(files):
    r = files["root"]
    args = ["inspect", str(files["emb"]), "--homophones", str(files["homo"]), "--random-n", "10", "--seed", "1"]
    assert run(args, r / "a") == 0
    assert run(args, r / "b") == 0
    for name in ("report.txt", "report_table.txt", "pairs.csv"):
        assert (r / "a" / name).read_bytes() == (r / "b" / name).read_bytes()
    summary = dict(line.split("=", 1) for line in (r / "a" / "report.txt").read_text().splitlines())
    assert summary["homophone_n_evaluated"] == "2" and summary["homophone_n_skipped_oov"] == "1"
    assert summary["verdict"] in {"PhoneticallyConsistent", "PhoneticallyInconsistent", "Inconclusive"}
    rows = list(csv.DictReader((r / "a" / "pairs.csv").open()))
    assert [(x["word_a"], x["word_b"]) for x in rows] == [("ate", "eight"), ("sea", "see")]


def test_inspect_default_list_and_flag_placement(files, capsys):
    r = files["root"]
    assert main(["inspect", str(files["emb"]), "--random-n", "5", "--out-dir", str(r / "c"), "--seed", "2"]) == 0
    assert "verdict=" in capsys.readouterr().out


def test_inspect_errors(files):
    r = files["root"]
    assert run(["inspect", str(files["emb"]), "--homophones", str(r / "missing.txt")], r / "o") == 2
    assert run(["inspect", str(r / "nope.txt")], r / "o") == 2
    bad = r / "bad.txt"
    bad.write_text("a 1 2\nb 1\n")
    assert run(["inspect", str(bad), "--homophones", str(files["homo"])], r / "o") == 2
    assert run(["inspect", str(files["emb"]), "--homophones", str(files["homo"]), "--random-n", "1000"], r / "o") == 1
    oov = r / "oov.txt"
    oov.write_text("hail,hale\n")
    assert run(["inspect", str(files["emb"]), "--homophones", str(oov), "--random-n", "3"], r / "o") == 1
    assert run(["inspect", str(files["emb"]), "--margin", "0"], r / "o") == 2


def test_vocab(files, capsys):
    r = files["root"]
    assert main(["--out-dir", str(r / "v"), "vocab", str(files["emb"]), str(files["trans"]), "--benchmarks", str(files["bench"])]) == 0
    assert "Missing: 4" in capsys.readouterr().out
    assert (r / "v" / "missing.txt").read_text().split() == ["eight", "moon", "sea", "see"]
    oov = (r / "v" / "benchmark_oov.csv").read_text().splitlines()
    assert oov == ["name,pairs,not_found", "MEN,5,3", "RG-65,3,2"]


def test_vocab_empty_transcripts_miss_everything(files):
    r = files["root"]
    empty = r / "empty.txt"
    empty.write_text("")
    assert run(["vocab", str(files["emb"]), str(empty)], r / "v") == 0
    assert len((r / "v" / "missing.txt").read_text().split()) == 8
    assert run(["vocab", str(files["emb"]), str(r / "absent")], r / "v") == 2


def test_bench(files):
    r = files["root"]
    assert run(["bench", str(files["emb"]), str(files["bench"])], r / "b1") == 0
    assert run(["bench", str(files["emb"]), str(files["bench"])], r / "b2") == 0
    text = (r / "b1" / "bench.csv").read_text()
    assert text == (r / "b2" / "bench.csv").read_text()
    lines = text.splitlines()
    assert lines[0] == "name,rho,n_used,n_oov"
    assert [l.split(",")[0] for l in lines[1:]] == ["MEN", "RG-65"]
    empty = r / "emptydir"
    empty.mkdir()
    assert run(["bench", str(files["emb"]), str(empty)], r / "b3") == 2


def test_inputs_not_mutated(files):
    r = files["root"]
    before = {k: files[k].read_bytes() for k in ("emb", "homo", "trans")}
    run(["inspect", str(files["emb"]), "--homophones", str(files["homo"]), "--random-n", "4"], r / "m")
    run(["vocab", str(files["emb"]), str(files["trans"])], r / "m")
    run(["bench", str(files["emb"]), str(files["bench"])], r / "m")
    assert before == {k: files[k].read_bytes() for k in ("emb", "homo", "trans")}


def test_train_echoes_defaults(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path), "train", "--synthetic", "--epochs", "0", "--sentences", "20"]) == 0
    out = capsys.readouterr().out
    assert "window=3 dim=50 lr=0.001" in out
    assert sorted(p.name for p in (tmp_path / "checkpoints").iterdir()) == ["epoch_0000.ckpt"]
    assert not (tmp_path / "metrics.csv").exists()


def test_train_tiny_outputs(tmp_path):
    assert run(["train", "--synthetic", "--epochs", "2", *TINY_TRAIN, "--save-corpus", "--eval-every", "1"], tmp_path) == 0
    for name in ("config.json", "homophones.txt", "metrics.csv", "embeddings.txt", "corpus.txt"):
        assert (tmp_path / name).is_file()
    rows = list(csv.DictReader((tmp_path / "metrics.csv").open()))
    assert len(rows) == 2 and "rho_MEN" in rows[0]
    # the saved corpus trains to the same result as the generator flags
    assert run(["train", "--corpus", str(tmp_path / "corpus.txt"), "--epochs", "2", *TINY_TRAIN[6:], "--eval-every", "0"],
               tmp_path / "again") == 0
    a = (tmp_path / "checkpoints" / "epoch_0002.ckpt").read_bytes()
    b = (tmp_path / "again" / "checkpoints" / "epoch_0002.ckpt").read_bytes()
    assert a.split(b"\n", 2)[2] == b.split(b"\n", 2)[2]


def test_train_usage_errors(tmp_path):
    assert run(["train", "--epochs", "1"], tmp_path) == 2
    assert run(["train", "--synthetic", "--vocab", "2"], tmp_path) == 2
    assert run(["train", "--synthetic", "--lr", "-1"], tmp_path) == 2
    assert run(["train", "--corpus", str(tmp_path / "none.txt")], tmp_path) == 2


def test_train_thirty_epoch_example(tmp_path):
    # --synthetic --vocab 100 --epochs 30 --seed 7: 30 rows, loss falling from row 1 to row 10
    assert run(["train", "--synthetic", "--vocab", "100", "--epochs", "30", "--seed", "7"], tmp_path) == 0
    rows = list(csv.DictReader((tmp_path / "metrics.csv").open()))
    assert len(rows) == 30
    losses = [float(r["loss"]) for r in rows[:10]]
    assert all(b < a for a, b in zip(losses, losses[1:]))


def test_mds_from_run_and_table(tmp_path, files):
    run_dir = tmp_path / "run"
    assert run(["train", "--synthetic", "--epochs", "1", *TINY_TRAIN], run_dir) == 0
    pairs = (run_dir / "homophones.txt").read_text().split()[0].split(",")
    vocab = [line.split()[0] for line in (run_dir / "embeddings.txt").read_text().splitlines()[1:]]
    words = pairs + [w for w in vocab if w not in pairs][:2]
    args = ["mds", "--run", str(run_dir), "--words", *words, "--per-word-cap", "5", "--seed", "3"]
    assert run(args, tmp_path / "m1") == 0
    assert run(args, tmp_path / "m2") == 0
    text = (tmp_path / "m1" / "mds.csv").read_text()
    assert text == (tmp_path / "m2" / "mds.csv").read_text()
    rows = list(csv.DictReader(text.splitlines()))
    assert {r["label"] for r in rows} == set(words)
    assert all(sum(r["label"] == w for r in rows) <= 5 for w in words)

    assert run(["mds", "--embeddings", str(files["emb"]), "--words", "cat", "dog", "sun"], tmp_path / "m3") == 0
    assert run(["mds", "--embeddings", str(files["emb"]), "--words", "cat", "dog"], tmp_path / "m4") == 2
    assert run(["mds", "--embeddings", str(files["emb"]), "--words", "cat", "qq", "sun"], tmp_path / "m4") == 2
    assert run(["mds", "--words", "cat", "dog", "sun"], tmp_path / "m4") == 2


def test_gradcheck_command(tmp_path):
    assert run(["gradcheck", "--models", "2"], tmp_path) == 0
    lines = (tmp_path / "gradcheck.csv").read_text().splitlines()
    assert lines[0] == "seed,max_rel_err" and len(lines) == 3
    assert run(["gradcheck", "--models", "1", "--tol", "1e-30"], tmp_path) == 1
    assert run(["gradcheck", "--epsilon", "0"], tmp_path) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "s2vaudit", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("inspect", "vocab", "bench", "train", "mds", "gradcheck"):
        assert cmd in out.stdout
    bad = subprocess.run([sys.executable, "-m", "s2vaudit", "frobnicate"], capture_output=True, text=True)
    assert bad.returncode == 2
