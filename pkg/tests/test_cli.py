import json

import pytest

from mlterm.cli import main
from mlterm.corpus import write_column_corpus
from mlterm.synthetic import make_extraction_data


@pytest.fixture
def corpora(tmp_path):
    data = make_extraction_data(n_sentences=40, seed=1, n_background=100)
    write_column_corpus(data.domain, tmp_path / "dom.col")
    write_column_corpus(data.background, tmp_path / "bg.col")
    return tmp_path


def _run(*args):
    return main([str(a) for a in args])


def test_missing_file_names_path(tmp_path, capsys):
    code = _run("train", "--input", tmp_path / "nope.tsv", "-o", tmp_path / "m.json")
    assert code == 2
    assert "nope.tsv" in capsys.readouterr().err


def test_tag_before_train(corpora):
    d = corpora
    assert _run("features", "--corpus", d / "dom.col", "--background", d / "bg.col",
                "-o", d / "f.tsv") == 0
    assert _run("tag", "--model", d / "missing.json", "--input", d / "f.tsv") == 2


def test_config_errors(corpora, tmp_path):
    d = corpora
    assert _run("features", "--corpus", d / "dom.col", "--background", d / "bg.col",
                "--features", "bogus", "-o", d / "f.tsv") == 3
    bad = tmp_path / "bad.cfg"
    bad.write_text("no_such_key = 1\n")
    assert _run("train", "--config", bad, "--input", d / "dom.col") == 3


def test_flags_override_config_file(corpora):
    d = corpora
    _run("features", "--corpus", d / "dom.col", "--background", d / "bg.col",
         "--features", "ΔFreq", "-o", d / "f.tsv")
    cfg = d / "train.cfg"
    cfg.write_text("# comment\nsigma2 = 5\nmax_iterations = 3\n")
    assert _run("train", "--config", cfg, "--max-iterations", 4, "--input", d / "f.tsv",
                "-o", d / "m.json") == 0
    doc = json.loads("".join(l for l in (d / "m.json").read_text().splitlines(True)
                             if not l.startswith("##")))
    assert doc["meta"]["config"]["sigma2"] == 5.0
    assert doc["meta"]["config"]["max_iterations"] == 4
    manifest = json.loads((d / "m.json.manifest.json").read_text())
    assert manifest["seed"] == 0
    assert manifest["config_hash"] in (d / "m.json").read_text().splitlines()[0]


def test_pipeline_is_byte_identical(corpora):
    d = corpora
    outputs = []
    for _ in range(2):
        assert _run("features", "--corpus", d / "dom.col", "--background", d / "bg.col",
                    "-o", d / "f.tsv") == 0
        assert _run("train", "--input", d / "f.tsv", "--max-iterations", 20, "-o", d / "m.json") == 0
        assert _run("tag", "--model", d / "m.json", "--input", d / "f.tsv", "-o", d / "t.tsv") == 0
        assert _run("eval", "--system", d / "t.tsv", "--gold", d / "f.tsv", "-o", d / "e.tsv") == 0
        assert _run("ngram", "--corpus", d / "dom.col", "--background", d / "bg.col",
                    "-o", d / "n.tsv") == 0
        outputs.append([(d / n).read_bytes() for n in ("f.tsv", "m.json", "t.tsv", "e.tsv", "n.tsv")])
    assert outputs[0] == outputs[1]


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert "mlterm" in capsys.readouterr().out
