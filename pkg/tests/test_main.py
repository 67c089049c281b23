import json
from pathlib import Path

import jsonschema
import pytest

from file_processor import FileProcessor
from main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, run

SCHEMAS = Path(__file__).resolve().parent.parent / "schemas"


def _schema(command):
    return json.loads((SCHEMAS / f"{command}.schema.json").read_text())


def _run_json(capsys, command, *args):
    code = run([command, "--seed", "3", "--threads", "1", "--format", "json", *args])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    document = json.loads(out)
    jsonschema.validate(document, _schema(command))
    return document


@pytest.fixture(autouse=True)
def _isolated(clean_env, restore_config):
    yield


def test_sample_text_is_a_tree_word(capsys):
    assert run(["sample", "--n", "5", "--seed", "1"]) == EXIT_OK
    word = capsys.readouterr().out.strip()
    assert len(word) == 2 * 11
    assert word.count("(") == word.count(")")


def test_sample_is_reproducible(capsys):
    run(["sample", "--n", "40", "--seed", "8"])
    first = capsys.readouterr().out
    run(["sample", "--n", "40", "--seed", "8"])
    assert capsys.readouterr().out == first


def test_sample_json(capsys):
    document = _run_json(capsys, "sample", "--n", "12", "--measure")
    assert document["n"] == 12
    assert len(document["masses"]) == 13
    assert sum(document["masses"]) == pytest.approx(1.0)
    assert document["meta"]["seed"] == 3


def test_sample_density_csv(capsys):
    assert run(["sample", "--n", "30", "--seed", "2", "--density"]) == EXIT_OK
    frame, meta = FileProcessor.read_frame(capsys.readouterr().out)
    assert meta["command"] == "sample" and meta["seed"] == "2"
    assert len(frame) == 31
    assert frame["density"].mean() == pytest.approx(1.0)


def test_sample_dot(capsys):
    assert run(["sample", "--n", "3", "--seed", "2", "--format", "dot", "--measure"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("// command=sample")
    assert out.count("mass=") == 4


def test_measure_exact_json(capsys, tmp_path):
    path = tmp_path / "tree.txt"
    path.write_text("((()())())\n")
    document = _run_json(capsys, "measure", "--input", str(path), "--exact")
    assert [leaf["exact_mass"] for leaf in document["leaves"]] == ["2/5", "2/5", "1/5"]


def test_measure_csv_to_file(capsys, tmp_path):
    source = tmp_path / "tree.txt"
    source.write_text("(()())")
    target = tmp_path / "masses.csv"
    assert run(["measure", "--input", str(source), "--output", str(target), "--seed", "1"]) == EXIT_OK
    frame, meta = FileProcessor.read_frame(str(target))
    assert frame["mass"].tolist() == pytest.approx([0.5, 0.5])
    assert "total mass" in capsys.readouterr().err


def test_measure_rejects_bad_words(capsys, tmp_path):
    path = tmp_path / "tree.txt"
    path.write_text("(()")
    assert run(["measure", "--input", str(path)]) == EXIT_USAGE
    assert "position 3" in capsys.readouterr().err


def test_measure_exact_above_cap(capsys, tmp_path):
    path = tmp_path / "tree.txt"
    path.write_text("(" * 31 + "()" + "())" * 31)
    assert run(["measure", "--input", str(path), "--exact"]) == EXIT_USAGE
    assert "cap" in capsys.readouterr().err


def test_grow_json(capsys):
    document = _run_json(capsys, "grow", "--n", "100", "--replicas", "4", "--max-mass")
    assert [row["n"] for row in document["summary"]] == [10, 100]
    assert document["max_mass_exponent"] is not None


def test_grow_jsonl_records(capsys):
    assert run(["grow", "--n", "20", "--replicas", "2", "--seed", "1", "--threads", "1",
                "--format", "jsonl", "--checkpoints", "5,20"]) == EXIT_OK
    lines = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert "meta" in lines[0]
    assert [(row["replica"], row["n"]) for row in lines[1:]] == [(0, 5), (0, 20), (1, 5), (1, 20)]


def test_spectrum_json(capsys):
    document = _run_json(capsys, "spectrum", "--alphas", "0,1")
    betas = [row["beta"] for row in document["results"]]
    assert betas[0] == pytest.approx(0.0, abs=1e-9)
    assert betas[1] == pytest.approx(0.6972243622680054, abs=1e-8)


def test_spectrum_grid_csv(capsys):
    assert run(["spectrum", "--alpha-min", "0", "--alpha-max", "1", "--alpha-step", "0.5",
                "--seed", "1"]) == EXIT_OK
    frame, _ = FileProcessor.read_frame(capsys.readouterr().out)
    assert frame["alpha"].tolist() == [0.0, 0.5, 1.0]


def test_moments_json(capsys):
    document = _run_json(capsys, "moments", "--alpha", "-1", "--n-max", "256")
    assert len(document["log_e"]) == 257
    assert document["fit"]["slope"] == pytest.approx(-1.0, abs=0.03)
    assert document["fit"]["window"] == [16, 256]


def test_moments_bad_window(capsys):
    assert run(["moments", "--n-max", "64", "--window", "1,64"]) == EXIT_USAGE
    assert "window" in capsys.readouterr().err


def test_spine_continuum_json(capsys):
    document = _run_json(capsys, "spine", "--replicas", "4", "--eps-cut", "1e-2", "--eps-grid", "0.1")
    assert len(document["rows"]) == 4
    assert "extinction" in document["means"]


def test_spine_discrete_histogram(capsys):
    assert run(["spine", "--mode", "discrete", "--n", "100", "--replicas", "20", "--bins", "5",
                "--seed", "4", "--threads", "1"]) == EXIT_OK
    frame, meta = FileProcessor.read_frame(capsys.readouterr().out)
    assert meta["mode"] == "discrete"
    assert frame["count"].sum() == 20


def test_verify_identities_json(capsys):
    document = _run_json(capsys, "verify", "identities")
    assert document["passed"] is True
    assert document["suites"][0]["suite"] == "identities"


def test_verify_text_lines(capsys):
    assert run(["verify", "uniformity", "--seed", "1", "--quiet"]) == EXIT_OK
    captured = capsys.readouterr()
    rows = [line.split("\t") for line in captured.out.splitlines()]
    assert all(row[0] == "uniformity" and row[2] == "ok" for row in rows)
    assert captured.err == ""


def test_verify_failure_exit_code(capsys, monkeypatch):
    import verification

    def broken(report, seed, threads):
        report.add_exact("always wrong", 1, 2)

    monkeypatch.setitem(verification.SUITES, verification.VerifySuite.IDENTITIES, broken)
    assert run(["verify", "identities", "--seed", "1"]) == EXIT_FAILED
    assert "verification failed" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["sample", "--format", "jsonl"],
    ["grow", "--n", "-3"],
    ["prune"],
    ["verify", "everything"],
    ["moments", "--n-max", "999999"],
])
def test_usage_exit_code(capsys, argv):
    assert run(argv) == EXIT_USAGE


def test_generated_seed_is_reported(capsys):
    assert run(["sample", "--n", "2", "--format", "json"]) == EXIT_OK
    captured = capsys.readouterr()
    document = json.loads(captured.out)
    assert document["meta"]["seed_generated"] is True
    assert f"seed {document['meta']['seed']}" in captured.err
