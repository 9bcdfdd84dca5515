import json

import pytest
from sympy import S, Symbol

from redmod.errors import InvalidRequest
from redmod.expr import is_zero
from redmod.jet import U
from redmod.utils.io_util import (context_from_dict, context_to_dict, infer_context,
                                  load_module, matrix_from_json, module_from_dict, read_equation)
from redmod.utils.json_util import dumps_report, read_jsonl, write_jsonl, write_report
from redmod.utils.summary_util import report_to_markdown


@pytest.mark.parametrize("texts, n, time_alias", [
    (["u[1,0] - u[0,2]", "u*exp(-t-x)"], 2, True),
    (["x2*u[3,0,0] + x1*u[0,3,0]"], 3, False),
    (["t + x1"], 2, True),
    (["u[1] - 1"], 1, False),
    (["u[1,0] - u[0,2] # heat, with a comment about x7"], 2, False),
])
def test_infer_context(texts, n, time_alias):
    ctx = infer_context(texts)
    assert ctx.n == n
    assert ctx.time_alias == time_alias


def test_context_round_trip():
    ctx = context_from_dict({"n": 2, "r": 3, "time_alias": True,
                             "symbols": [{"name": "c", "positive": True}, "k"]})
    assert ctx.positive_symbols == (Symbol("c"),)
    assert ctx.nonzero_symbols == (Symbol("c"),)
    data = context_to_dict(ctx)
    assert data["coordinates"] == ["t", "x1"]
    assert context_from_dict(data) == ctx


def test_context_needs_n():
    with pytest.raises(InvalidRequest):
        context_from_dict({"r": 2})


def test_module_from_dict(ctx2, x):
    module = module_from_dict({"n": 2, "fields": [{"xi": ["1", "0"], "eta": "x2*u"}]}, ctx2)
    assert is_zero(module.basis[0].eta - x["x2"] * U)
    with pytest.raises(InvalidRequest):
        module_from_dict({"n": 3, "fields": []}, ctx2)
    with pytest.raises(InvalidRequest):
        module_from_dict({"fields": [{"xi": ["1"]}]}, ctx2)


def test_load_module_and_equation(tmp_path, ctx2):
    path = tmp_path / "module.json"
    path.write_text(json.dumps({"fields": [{"xi": [1, 0]}]}), encoding="utf-8")
    assert load_module(str(path), ctx2).dim == 1
    equation = tmp_path / "eq.txt"
    equation.write_text("u[2,0] # comment\n", encoding="utf-8")
    assert read_equation(str(equation)).startswith("u[2,0]")


def test_matrix_from_json(ctx2, x):
    assert matrix_from_json("identity", 2, ctx2) == ((S.One, S.Zero), (S.Zero, S.One))
    assert matrix_from_json(2, 1, ctx2) == ((2,),)
    rows = matrix_from_json([["1", "x1"], ["x1", "1"]], 2, ctx2)
    assert rows[0][1] == x["x1"]
    with pytest.raises(InvalidRequest):
        matrix_from_json([["1"]], 2, ctx2)


def test_reports_are_deterministic(tmp_path):
    report = {"schema": "redmod/1", "b": [1, 2], "a": {"z": 1, "y": None}}
    text = dumps_report(report)
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    path = tmp_path / "out" / "report.json"
    write_report(report, str(path))
    assert path.read_text(encoding="utf-8") == text


def test_jsonl_round_trip(tmp_path):
    path = tmp_path / "lines.jsonl"
    write_jsonl(str(path), [{"a": 1}, {"b": "exp(u)"}])
    with open(path, "a", encoding="utf-8") as f:
        f.write("\n")
    assert read_jsonl(str(path)) == [{"a": 1}, {"b": "exp(u)"}]


def test_summary_markdown():
    text = report_to_markdown({"command": "sco", "strong_coorder": 2, "notes": [],
                               "module": {"n": 2}})
    assert text.startswith("# redmod sco")
    assert "- **strong_coorder**: 2" in text
    assert "## module" in text
    error = report_to_markdown({"command": "sco", "error": {"type": "RankDeficient",
                                                            "message": "no"}})
    assert "**RankDeficient**: no" in error
