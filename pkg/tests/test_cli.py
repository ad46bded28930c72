"""Command-line front end: parsing, exit codes, schema-valid reports."""

import importlib.resources
import json

import jsonschema
import pytest

from cvbell.cli import main


@pytest.fixture(scope="module")
def schema():
    text = importlib.resources.files("cvbell").joinpath(
        "schemas/report.schema.json").read_text()
    return json.loads(text)


def write_spec(tmp_path, doc, name="state.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_eval_ghz3(tmp_path, capsys, schema):
    spec = write_spec(tmp_path, {"type": "ghz", "n": 3, "cutoff": 4})
    code, out = run(capsys, ["eval", spec, "--theta", "0,0,0",
                             "--delta", "0,0,0", "--s", "1,1,1"])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema)
    assert doc["report"]["lhs"] == pytest.approx(0.25)
    assert doc["report"]["violated"] is False


def test_eval_vacuum(tmp_path, capsys):
    spec = write_spec(tmp_path, {"type": "basis", "occupations": [0, 0],
                                 "cutoff": 5})
    code, out = run(capsys, ["eval", spec, "--theta", "0.3,0.1",
                             "--delta", "0.2,-0.2", "--s", "1,-1"])
    assert code == 0
    assert json.loads(out)["report"]["violated"] is False


def test_eval_mismatched_lengths(tmp_path, capsys):
    spec = write_spec(tmp_path, {"type": "ghz", "n": 3, "cutoff": 4})
    code, _ = run(capsys, ["eval", spec, "--theta", "0,0",
                           "--delta", "0,0", "--s", "1,1"])
    assert code == 2


def test_eval_unknown_field(tmp_path, capsys):
    spec = write_spec(tmp_path, {"type": "ghz", "n": 2, "cutoff": 4,
                                 "wobble": 3})
    code, _ = run(capsys, ["eval", spec, "--theta", "0,0",
                           "--delta", "0,0", "--s", "1,-1"])
    assert code == 2


def test_eval_corrupted_spec(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _ = run(capsys, ["eval", str(path), "--theta", "0",
                           "--delta", "0", "--s", "1"])
    assert code == 2


def test_eval_physics_error_exit_code(tmp_path, capsys):
    spec = write_spec(tmp_path, {"type": "ghz", "n": 2, "cutoff": 4})
    code, _ = run(capsys, ["eval", spec, "--theta", "0,0",
                           "--delta", "1.6,0", "--s", "1,-1"])
    assert code == 3


def test_verify_tmsv(tmp_path, capsys, schema):
    spec = write_spec(tmp_path, {"type": "tmsv", "r": 0.3, "cutoff": 14})
    code, out = run(capsys, ["verify", spec, "--theta", "0.4,1.2",
                             "--delta", "0.3,-0.5", "--s", "1,-1"])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema)
    assert doc["consistent"] is True
    assert doc["pt_min_eig"] < 0


def test_verify_random_mixed(tmp_path, capsys):
    spec = write_spec(tmp_path, {"type": "random", "kind": "mixed", "seed": 7,
                                 "cutoff": 6, "headroom": 3, "n": 2})
    code, out = run(capsys, ["verify", spec, "--theta", "0.9,0.2",
                             "--delta", "0.7,-0.3", "--s=-1,1"])
    assert code == 0
    assert json.loads(out)["consistent"] is True


def test_minors_coherent_product(tmp_path, capsys, schema):
    spec = write_spec(tmp_path, {"type": "coherent",
                                 "alphas": [[0.5, 0.0], [0.3, 0.2]],
                                 "cutoff": 16, "headroom": 4})
    code, out = run(capsys, ["minors", spec, "--bipartition", "01",
                             "--order", "2", "--max-size", "3"])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema)
    assert doc["negative_minor"] is None


def test_minors_tmsv(tmp_path, capsys, schema):
    spec = write_spec(tmp_path, {"type": "tmsv", "r": 0.3, "cutoff": 14,
                                 "headroom": 4})
    code, out = run(capsys, ["minors", spec, "--bipartition", "01",
                             "--order", "2", "--max-size", "2"])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema)
    assert doc["negative_minor"]["determinant"] < -1e-9
    assert doc["negative_minor"]["subset"]


def test_minors_all_modes_notice(tmp_path, capsys, schema):
    spec = write_spec(tmp_path, {"type": "tmsv", "r": 0.3, "cutoff": 14,
                                 "headroom": 4})
    code, out = run(capsys, ["minors", spec, "--bipartition", "11",
                             "--order", "1", "--max-size", "2"])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema)
    assert "state-positivity" in doc["notice"]


def test_scan_small_range(tmp_path, capsys):
    out_path = tmp_path / "scan.csv"
    code, _ = run(capsys, ["scan", "--family", "cat", "--n-min", "1",
                           "--n-max", "4", "--alpha-points", "12",
                           "--out", str(out_path)])
    assert code == 0
    lines = out_path.read_text().strip().splitlines()
    assert lines[0] == "n,alpha_re,alpha_im,lhs,rhs,ratio,beta"
    assert len(lines) == 5
    ratios = [float(line.split(",")[5]) for line in lines[1:]]
    assert all(r < 1 for r in ratios)


def test_scan_invalid_family(capsys):
    code, _ = run(capsys, ["scan", "--family", "kitten", "--n-min", "1",
                           "--n-max", "2", "--out", "/dev/null"])
    assert code == 2


def test_scan_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        code, _ = run(capsys, ["scan", "--family", "cat", "--n-min", "1",
                               "--n-max", "3", "--alpha-points", "8",
                               "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_optimize_two_mode(tmp_path, capsys, schema):
    spec = write_spec(tmp_path, {"type": "random", "kind": "pure", "seed": 3,
                                 "cutoff": 6, "headroom": 3, "n": 2})
    argv = ["optimize", spec, "--restarts", "2", "--seed", "11",
            "--max-evals", "1200"]
    code, out = run(capsys, argv)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema)
    assert doc["report"]["beta"] <= 1e-9

    code2, out2 = run(capsys, argv)
    assert code2 == 0
    assert out2 == out  # fixed seed reproduces byte-identical output


def test_optimize_zero_budget(tmp_path, capsys):
    spec = write_spec(tmp_path, {"type": "random", "kind": "pure", "seed": 3,
                                 "cutoff": 6, "headroom": 3, "n": 2})
    code, _ = run(capsys, ["optimize", spec, "--restarts", "1", "--seed", "0",
                           "--max-evals", "0"])
    assert code == 2
