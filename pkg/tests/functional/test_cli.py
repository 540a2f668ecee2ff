#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
命令行端到端测试：退出码与 JSON 输出
"""

import json

import pytest

from qrefl.cli import run


def _json(path, data):
    path.write_text(json.dumps(data, ensure_ascii=False), encoding="utf-8")
    return str(path)


def _run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.fixture
def files(tmp_path):
    return {
        "a11": _json(tmp_path / "a11.json", {"n": 2, "rows": [["0", "1"], ["1", "0"]]}),
        "a11_symbolic": _json(
            tmp_path / "a11s.json", {"n": 2, "rows": [["l + m", "y1"], ["y2", "0"]], "relations": [[1, 2]]}
        ),
        "a21_symbolic": _json(tmp_path / "a21s.json", {"n": 3, "rows": [["l + m", "0", "y1"], ["0", "l", "0"], ["y3", "0", "0"]]}),
        "diag12": _json(tmp_path / "diag12.json", {"n": 2, "rows": [["1", "0"], ["0", "2"]]}),
        "irrational": _json(tmp_path / "irr.json", {"n": 2, "rows": [["1", "1"], ["1", "0"]]}),
        "type1": _json(tmp_path / "type1.json", {"type": 1, "n": 2, "b_minus": 1, "b_plus": 2}),
        "type2": _json(tmp_path / "type2.json", {"type": 2, "n": 3, "Y": [], "Z": [], "b": 2}),
        "params": _json(tmp_path / "params.json", {"l": "2", "m": "3", "y1": "1"}),
        "equal_params": _json(tmp_path / "equal.json", {"l": "1", "m": "1", "y1": "1"}),
        "bad_family": _json(tmp_path / "bad.json", {"type": 1, "n": 2, "b_minus": 1, "b_plus": 3}),
    }


# ---------- braid / families ---------- #

def test_braid_json(capsys):
    code, data = _run_json(capsys, ["braid", "--n", "2", "--json"])
    assert code == 0
    assert data["schema"] == 1
    assert data["rows"][1] == ["0", "q + -1*q^-1", "1", "0"]


def test_braid_text(capsys):
    assert run(["braid", "--n", "2"]) == 0
    assert "q + -1*q^-1" in capsys.readouterr().out


def test_families_json(capsys):
    code, data = _run_json(capsys, ["families", "--n", "2", "--json"])
    assert code == 0
    assert len(data["families"]) == 6
    assert data["families"][0] == {"type": 1, "n": 2, "b_minus": 1, "b_plus": 2}


def test_json_output_is_deterministic(capsys):
    run(["families", "--n", "3", "--json"])
    first = capsys.readouterr().out
    run(["families", "--n", "3", "--json"])
    assert capsys.readouterr().out == first


# ---------- verify ---------- #

def test_verify_solution(capsys, files):
    code, data = _run_json(capsys, ["verify", "--n", "2", "--input", files["a11"], "--q", "2", "--json"])
    assert code == 0
    assert data["residual_zero"] is True


def test_verify_symbolic_with_relations(files):
    assert run(["verify", "--n", "2", "--input", files["a11_symbolic"], "--q", "5/2"]) == 0


def test_verify_symbolic_without_relations_fails(files):
    assert run(["verify", "--n", "3", "--input", files["a21_symbolic"], "--q", "3"]) == 1


def test_verify_failure_reports_equation(capsys, files):
    code, data = _run_json(capsys, ["verify", "--n", "2", "--input", files["diag12"], "--q", "2", "--json"])
    assert code == 1
    assert data["residual_zero"] is False
    assert data["first_violation"] == "eq5.1(1, 2)"


# ---------- classify ---------- #

def test_classify_type1(capsys, files):
    code, data = _run_json(capsys, ["classify", "--n", "2", "--input", files["a11"], "--q", "2", "--json"])
    assert code == 0
    assert data["result"] == "type1"
    assert (data["e1"], data["e2"], data["l"], data["m"]) == ("0", "-1", "1", "-1")


def test_classify_irrational(capsys, files):
    code, data = _run_json(capsys, ["classify", "--n", "2", "--input", files["irrational"], "--q", "2", "--json"])
    assert code == 0
    assert (data["e1"], data["e2"]) == ("1", "-1")
    assert "l" not in data


def test_classify_not_a_character(capsys, files):
    code, data = _run_json(capsys, ["classify", "--n", "2", "--input", files["diag12"], "--q", "2", "--json"])
    assert code == 0
    assert data == {"schema": 1, "result": "not_a_character", "tag": "eq5", "equation": "eq5.1(1, 2)"}


def test_classify_symbolic_input_is_usage_error(files):
    assert run(["classify", "--n", "2", "--input", files["a11_symbolic"], "--q", "2"]) == 2


# ---------- spectrum ---------- #

def test_spectrum_symbolic(capsys, files):
    code, data = _run_json(capsys, ["spectrum", "--family", files["type2"], "--json"])
    assert code == 0
    assert data["spectrum"] == [{"value": "l", "mult": 2}, {"value": "0", "mult": 1}]


def test_spectrum_instance(capsys, files):
    code, data = _run_json(capsys, ["spectrum", "--family", files["type1"], "--params", files["params"], "--json"])
    assert code == 0
    assert data["spectrum"] == [{"value": "m", "mult": 1}, {"value": "l", "mult": 1}]
    assert data["instance"]["char_poly_matches"] is True
    assert data["instance"]["semisimple"] is True
    assert {e["value"] for e in data["instance"]["spectrum"]} == {"2", "3"}


def test_spectrum_jordan_instance(capsys, files):
    code, data = _run_json(
        capsys, ["spectrum", "--family", files["type1"], "--params", files["equal_params"], "--q", "3", "--json"]
    )
    assert code == 0
    assert data["instance"]["spectrum"] == [{"value": "1", "mult": 2}]
    assert data["instance"]["semisimple"] is False


# ---------- oracle / examples / check ---------- #

def test_oracle_n2(capsys):
    code, data = _run_json(capsys, ["oracle", "--n", "2", "--q", "3", "--samples", "5", "--json"])
    assert code == 0
    assert data["q"] == "3"
    assert data["missing"] == [] and data["extra"] == []
    assert len(data["components"]) == 5


def test_examples(capsys):
    code, data = _run_json(capsys, ["examples", "--max-n", "3", "--json"])
    assert code == 0
    names = [f["name"] for f in data["fixtures"]]
    assert "A^{1,1}" in names and "A^{2,1}" in names and "D_3" in names
    assert all(f["matches_family"] and f["residual_zero"] for f in data["fixtures"])


def test_examples_show_matrices(capsys):
    code, data = _run_json(capsys, ["examples", "--max-n", "2", "--json"])
    assert code == 0
    fixtures = {f["name"]: f for f in data["fixtures"]}
    assert fixtures["A^{1,1}"]["matrix"] == {"n": 2, "rows": [["l + m", "y1"], ["y2", "0"]], "relations": [[1, 2]]}
    assert fixtures["D_2"]["matrix"]["rows"] == [["0", "l"], ["l", "0"]]
    assert run(["examples", "--max-n", "2"]) == 0
    text = capsys.readouterr().out
    assert "l + m" in text and "y1·y2 = -l*m" in text


def test_check_with_config(capsys, tmp_path):
    config = _json(
        tmp_path / "configs.json",
        {
            "settings": {"seed": 3},
            "checks": [
                {"class": "CountingCheck", "alias": "计数", "params": {"max_n": 6, "brute_force_n": 4}},
                {"class": "FixtureCheck", "alias": "已知矩阵", "params": {"max_n": 2}},
            ],
        },
    )
    code, data = _run_json(capsys, ["check", "--config", config, "--only", "计数", "--json"])
    assert code == 0
    assert [c["alias"] for c in data["checks"]] == ["计数"]
    assert data["checks"][0]["passed"] is True


def test_check_no_match_fails(tmp_path):
    config = _json(tmp_path / "c.json", [{"class": "CountingCheck", "params": {"max_n": 2}}])
    assert run(["check", "--config", config, "--only", "nothing"]) == 1


def test_init_copies_config(tmp_path, capsys):
    target = tmp_path / "cfg"
    assert run(["init", "--dir", str(target)]) == 0
    assert (target / "configs.json").exists()


# ---------- 用法错误 ---------- #

@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nope"],
        ["braid"],
        ["braid", "--n", "2", "--unknown"],
        ["verify", "--n", "2", "--input", "missing.json", "--q", "2"],
        ["oracle", "--n", "4", "--q", "2"],
        ["families", "--n", "0"],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(argv) == 2


def test_non_generic_q_rejected(files, capsys):
    assert run(["verify", "--n", "2", "--input", files["a11"], "--q", "1"]) == 2
    assert "不是通用值" in capsys.readouterr().err
    assert run(["verify", "--n", "2", "--input", files["a11"], "--q", "1/0"]) == 2


def test_dimension_mismatch(files):
    assert run(["verify", "--n", "3", "--input", files["a11"], "--q", "2"]) == 2


def test_bad_family_file(files):
    assert run(["spectrum", "--family", files["bad_family"]]) == 2


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert run(["verify", "--n", "2", "--input", str(path), "--q", "2"]) == 2
