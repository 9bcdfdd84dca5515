import json

import pandas as pd
import pytest

from redmod.commands.batch import read_requests, run_batch
from redmod.commands.export import export_reports
from redmod.entrypoint import cli
from redmod.utils.json_util import read_jsonl, write_jsonl

EICONAL = {"command": "eiconal", "a": "identity", "psi": "t+x1", "count": 1}


def test_cli_prints_json_report(capsys):
    cli(["eiconal", "--a", "identity", "--psi", "t+x1", "--count", "1"])
    report = json.loads(capsys.readouterr().out)
    assert report["schema"] == "redmod/1"
    assert report["residual"] == "0"


def test_cli_reads_equation_files(tmp_path, capsys):
    equation = tmp_path / "heat.txt"
    equation.write_text("# heat equation\nu[1,0] = u[0,2]\n", encoding="utf-8")
    cli(["check-reduction", "--eq", str(equation), "--phi", "u*exp(-t-x)"])
    assert json.loads(capsys.readouterr().out)["is_reduction_module"] is True


def test_cli_writes_output_file(tmp_path):
    output = tmp_path / "reports" / "sco.json"
    cli(["sco", "--expr", "u[2,0] - u[0,2]", "--p", "1", "-o", str(output)])
    assert json.loads(output.read_text(encoding="utf-8"))["strong_coorder"] == 2


@pytest.mark.parametrize("argv, code", [
    (["sco", "--expr", "u[1,0] - y", "--p", "1"], 2),
    (["sco", "--expr", "u[2,0]", "--p", "1", "--json", "--pretty"], 2),
    (["sco", "--eq", "heat.txt", "--expr", "u[2,0]", "--p", "1"], 2),
])
def test_cli_exit_codes(argv, code):
    with pytest.raises(SystemExit) as info:
        cli(argv)
    assert info.value.code == code


def test_cli_reports_analysis_errors(capsys):
    cli(["reduce", "--expr", "u[1,0] - u[0,2] - x*u", "--directions", "1",
         "--context", '{"n": 2, "time_alias": true}'])
    report = json.loads(capsys.readouterr().out)
    assert report["command"] == "reduce"
    assert report["error"]["type"] == "NotReductionModule"
    assert report["error"]["exit_code"] == 0


def test_cli_json_with_output(tmp_path, capsys):
    output = tmp_path / "eiconal.json"
    cli(["eiconal", "--a", "identity", "--psi", "t+x1", "--count", "1", "--json",
         "-o", str(output)])
    assert json.loads(capsys.readouterr().out) == json.loads(output.read_text(encoding="utf-8"))


def test_batch_isolates_failures():
    reports = run_batch([EICONAL, {"command": "sco", "equation": "u[1"}])
    assert reports[0]["eiconal"] is True
    assert reports[1]["error"]["type"] == "ExprSyntaxError"


def test_batch_applies_options():
    reports = run_batch([EICONAL], options={"seed": 5})
    assert reports == run_batch([{**EICONAL, "options": {"seed": 5}}])


def test_batch_reads_sheets(tmp_path):
    path = tmp_path / "requests.xlsx"
    pd.DataFrame([{"command": "sco", "equation": "u[2,0] - u[0,2]", "p": 1, "phi": None,
                   "context": json.dumps({"n": 2})}]).to_excel(path, index=False)
    requests = read_requests(str(path))
    assert requests == [{"command": "sco", "equation": "u[2,0] - u[0,2]", "p": 1,
                         "context": {"n": 2}}]


def test_batch_command(tmp_path):
    requests = tmp_path / "requests.jsonl"
    write_jsonl(str(requests), [EICONAL])
    output = tmp_path / "reports.jsonl"
    cli(["batch", "-i", str(requests), "-o", str(output)])
    assert read_jsonl(str(output))[0]["command"] == "eiconal"


@pytest.fixture
def reports_path(tmp_path):
    path = tmp_path / "reports.jsonl"
    write_jsonl(str(path), run_batch([EICONAL]))
    return path


def test_export_csv(tmp_path, reports_path):
    output = tmp_path / "reports.csv"
    export_reports(str(reports_path), str(output))
    df = pd.read_csv(output)
    assert len(df) == 1
    assert df["residual"].tolist() == [0]


def test_export_html(tmp_path, reports_path):
    output = tmp_path / "reports.html"
    export_reports(str(reports_path), str(output))
    assert "<h1>redmod eiconal</h1>" in output.read_text(encoding="utf-8")
