import pytest

from redmod.errors import InvalidRequest, NotReductionModule
from redmod.request import SCHEMA, AnalysisRequest, run, run_safely
from redmod.utils.json_util import dumps_report

L1 = "x2*u[3,0,0] + x1*u[0,3,0] - exp(u[0,0,2])*(u[0,0,1] + u)"
SHIFTS = {"n": 3, "fields": [{"xi": ["1", "0", "0"], "eta": "0"},
                             {"xi": ["0", "1", "0"], "eta": "0"}]}
HEAT = {"n": 2, "time_alias": True}


def test_sco_golden():
    report = run(AnalysisRequest(command="sco", equation=L1, module=SHIFTS))
    assert report["schema"] == SCHEMA
    assert report["command"] == "sco"
    assert report["context"]["n"] == 3
    assert report["strong_coorder"] == 2
    assert report["weak_coorder"] == 1


def test_sco_with_shift_split():
    report = run(AnalysisRequest(command="sco", equation=L1, p=2))
    assert report["strong_coorder"] == 2


def test_check_reduction_of_heat_family():
    request = AnalysisRequest.from_dict({"command": "check-reduction",
                                         "equation": "u[1,0] - u[0,2]",
                                         "phi": "u*exp(-t-x)"})
    report = run(request)
    assert report["is_reduction_module"] is True
    assert report["context"]["time_alias"] is True
    assert report["module"]["fields"][0]["eta"] == "u"


def test_check_reduction_by_eta():
    report = run(AnalysisRequest(command="check-reduction", equation="u[1,0] - u[0,2] - u^2",
                                 eta=["u"], context=HEAT))
    assert report["is_reduction_module"] is False
    assert report["residuals"] == ["-u^2"]


def test_eiconal_request():
    report = run(AnalysisRequest(command="eiconal", a="identity", psi="t+x1", count=2))
    assert report["residual"] == "0"
    assert report["eiconal"] is True
    assert len(report["submodules"]["samples"]) == 2


def test_deteqs_request():
    report = run(AnalysisRequest(command="deteqs", equation="u[1,0] = u[0,2]", eta=["u"],
                                 context=HEAT))
    assert report["is_reduction_module"] is True
    assert report["tilde_extension"]["ultra"] is True
    report = run(AnalysisRequest(command="deteqs", equation="u[1,0] = u[0,2]", phi="u - t",
                                 context=HEAT))
    assert report["phi_residual"]["chi_repairable"] is True


def test_reduce_and_ndim_reduce_requests():
    report = run(AnalysisRequest(command="reduce", equation="u[1,0] - u[0,2]", directions=[1],
                                 context=HEAT))
    assert report["equation"] == "u[1]"
    report = run(AnalysisRequest(command="ndim-reduce", equation="u[1] - u + x1", phi="u - x1",
                                 inverse="x1 + kappa"))
    assert report["zeta"] == "1 - kappa"
    assert report["family"]["verdict"]["is_reduction_module"] is False


def test_classify_elliptic_request():
    report = run(AnalysisRequest(command="classify", kind="elliptic", a="identity",
                                 module={"fields": [{"xi": ["1", "0"]}]},
                                 context={"n": 2}))
    assert report["strong_coorder"] == 2
    assert report["a_hat"] == [["1"]]


def test_coorder1_request():
    report = run(AnalysisRequest(command="coorder1", equation="u[0,1] - u[2,0]",
                                 phi="u*exp(-x1)"))
    assert report["is_reduction_module"] is True


def test_reports_are_reproducible():
    request = AnalysisRequest(command="eiconal", a="identity", psi="t+x1", count=2)
    assert dumps_report(run(request)) == dumps_report(run(request))


def test_request_validation():
    with pytest.raises(InvalidRequest):
        AnalysisRequest.from_dict({"command": "reduce", "equation": "u[1]", "phi": "u"})
    with pytest.raises(InvalidRequest):
        AnalysisRequest.from_dict({"command": "sco", "bogus": 1})
    with pytest.raises(InvalidRequest):
        AnalysisRequest.from_dict({"equation": "u[1]"})
    with pytest.raises(InvalidRequest):
        run(AnalysisRequest(command="sco", equation="u[1]"))
    with pytest.raises(InvalidRequest):
        run(AnalysisRequest(command="check-reduction", equation="u[1,0]", phi="u", eta=["u"]))


def test_analysis_errors_surface():
    with pytest.raises(NotReductionModule):
        run(AnalysisRequest(command="reduce", equation="u[1,0] - u[0,2] - x*u", directions=[1],
                            context=HEAT))


def test_run_safely_reports_errors():
    report = run_safely({"command": "sco", "equation": "u[1,0] - y", "p": 1})
    assert report["error"]["type"] == "UnknownIdentifier"
    assert report["error"]["exit_code"] == 2
