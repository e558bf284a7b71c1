import json

import pytest

from bautin.cli import main

EXAMPLE = {
    "family": {"kind": "bautin", "point": {"l1": 0, "l2": 0, "l3": 0, "l4": 1, "l5": 0, "l6": -1}},
    "series": {"l1": {"1": "23/1286"}, "l2": {"1": "293/513"}, "l5": {"1": 1}},
    "numeric": {"grid": {"n": 8, "lo": 0.05, "hi": 0.95}},
}


@pytest.fixture
def example_config(tmp_path):
    path = tmp_path / "example.json"
    path.write_text(json.dumps(EXAMPLE))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out) if out else None, err


def test_focal_quadratic(capsys):
    code, doc, _ = run_json(capsys, "focal", "--family", "bautin", "-n", "4")
    assert code == 0
    assert [v["name"] for v in doc["result"]["values"]] == ["v1", "v3", "v5", "v7"]
    assert [a["factor"] for a in doc["result"]["reference_alignment"]] == ["1", "-1/8", "1/48", "-5/64"]
    assert doc["config"]["seed"] == 0


def test_focal_cubic(capsys):
    code, doc, _ = run_json(capsys, "focal", "--family", "sibirsky", "-n", "6")
    assert code == 0
    assert len(doc["result"]["values"]) == 6


def test_focal_single_value(capsys):
    code, out, _ = run(capsys, "focal", "--family", "bautin", "-n", "1")
    assert code == 0
    assert out.splitlines()[0] == "v1 = l1"
    assert "v3" not in out


def test_classify_example(capsys):
    code, out, _ = run(capsys, "classify", "--point", "0,0,0,1,0,-1")
    assert code == 0
    assert out.splitlines()[0] == "Q-GenericSymmetric"


def test_classify_not_a_center(capsys):
    code, _, err = run(capsys, "classify", "--point", "1,0,0,0,0,0")
    assert code == 2
    assert "not on center variety" in err


def test_classify_bad_point(capsys):
    code, _, err = run(capsys, "classify", "--point", "0,0,0")
    assert code == 2
    code, _, err = run(capsys, "classify", "--point", "0,0,0,1,0,half")
    assert code == 2


def test_plan_case(capsys):
    code, doc, _ = run_json(capsys, "plan", "--case", "q-ix")
    assert code == 0
    assert doc["result"]["verification"]["passed"] is True
    assert doc["result"]["plan"]["k_star"] == 4


def test_expand_case(capsys):
    code, doc, _ = run_json(capsys, "expand", "--case", "q-v", "--order", "3")
    assert code == 0
    assert doc["result"]["melnikov_order"] == 2


def test_expand_needs_series(capsys):
    code, _, err = run(capsys, "expand")
    assert code == 2


def test_melnikov_both_methods(capsys, example_config, tmp_path):
    out_dir = tmp_path / "out"
    code, doc, _ = run_json(capsys, "melnikov", "--config", example_config, "--out", str(out_dir))
    assert code == 0
    res = doc["result"]
    assert set(res) == {"line_integral", "eps_ladder", "agreement"}
    assert res["agreement"]["max_relative_difference"] < 1e-5
    assert len(res["line_integral"]["zeros"]) == 2
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ["melnikov.json", "melnikov.txt", "melnikov_eps_ladder.csv", "melnikov_line_integral.csv"]
    assert (out_dir / "melnikov_line_integral.csv").read_text().startswith("h,M,method,k\n")


def test_melnikov_csv(capsys, example_config):
    code, out, _ = run(capsys, "melnikov", "--config", example_config, "--method", "line_integral",
                       "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "h,M,method,k" and len(lines) == 9


def test_bifurcate(capsys, example_config):
    code, doc, _ = run_json(capsys, "bifurcate", "--config", example_config)
    assert code == 0
    reps = doc["result"]["reports"]
    assert len(reps) == 2 and all(r["found"] for r in reps)


def test_bifurcate_at_zero_eps(capsys, example_config):
    code, doc, _ = run_json(capsys, "bifurcate", "--config", example_config, "--eps", "0", "--h-star", "0.4")
    assert code == 0
    assert doc["result"]["reports"][0]["verdict"].startswith("center")


def test_numeric_failure_exit_code(capsys, tmp_path):
    cfg = dict(EXAMPLE, numeric={"grid": {"n": 3, "lo": 0.5, "hi": 1.5}, "method": "line_integral"})
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run(capsys, "melnikov", "--config", str(path))
    assert code == 3


def test_unknown_config_key(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"famly": {}}))
    code, _, err = run(capsys, "focal", "--config", str(path))
    assert code == 2
    assert "famly" in err


def test_verify_only_case(capsys):
    code, doc, _ = run_json(capsys, "verify-paper", "--only", "q-viii")
    # the table contains known discrepancies, so the suite reports failure
    assert code == 1
    items = {row["item"]: row["status"] for row in doc["result"]["matrix"]}
    assert items["lemma/q-viii/v5,4"] == "recorded"
    assert items["plan/q-viii"] == "pass"
    assert items["lemma/q-viii"] == "fail"


def test_verify_clean_case_passes(capsys):
    code, out, _ = run(capsys, "verify-claims", "--only", "q-i")
    assert code == 0
    assert out.splitlines()[-1] == "overall: PASS"


def test_json_is_deterministic(capsys):
    outs = [run(capsys, "plan", "--case", "q-iv", "--format", "json", "--seed", "5")[1] for _ in range(2)]
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["config"]["seed"] == 5
