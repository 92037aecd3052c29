import json

import pytest

from cli.__main__ import EXIT_ANALYSIS_ERROR, EXIT_INPUT_ERROR, EXIT_OK, exit_code_for, main
from cli.config import resolve_max_generations, resolve_picture, resolve_seed
from src.config.settings import settings
from src.core.exceptions import GenerationBudgetExceeded, InputError, ParseError
from src.core.models import AnalysisRequest, OutputFormat, Picture, Report, Termination
from src.core.parser import load_system, parse_system
from src.services.analysis import analyze
from src.services.report import render_report, render_reports
from src.utils.validation import parse_override, validate_picture
from tests.conftest import EXAMPLES, system_path


def run(tmp_path, *args, name="report.out"):
    out = tmp_path / name
    code = main(["analyze", *args, "--verify-samples", "2", "--out", str(out)])
    return code, out


def test_analyze_ex1_both_pictures():
    report = analyze(AnalysisRequest(spec=load_system(system_path("ex1")), verify_samples=2))
    assert set(report.pictures) == {"lagrangian", "hamiltonian"}
    lagrangian = report.pictures["lagrangian"]
    assert lagrangian.termination == Termination.FULLY_DETERMINED.value
    assert lagrangian.second_class == ["phi_1"]
    assert lagrangian.two_form is not None and lagrangian.two_form.evolution_agrees
    assert report.pictures["hamiltonian"].routh.phi == {}
    assert report.equivalence.matched
    assert report.verification.passed
    assert report.functions == ["U"]


def test_single_picture_skips_cross_check():
    request = AnalysisRequest(spec=load_system(system_path("ex4")), picture=Picture.HAMILTONIAN, verify_samples=0)
    report = analyze(request)
    assert list(report.pictures) == ["hamiltonian"]
    assert report.equivalence is None
    assert report.pictures["hamiltonian"].first_class == ["phi_2", "phi_2^(1)"]
    assert report.pictures["hamiltonian"].undetermined == ["vdot2"]
    assert "exp(q2)" in report.side_conditions


def test_ex5b_report_records_bracket_stage():
    report = analyze(AnalysisRequest(spec=load_system(system_path("ex5b")), verify_samples=0))
    brackets = report.pictures["hamiltonian"].brackets
    assert len(brackets.stages) == 1
    assert set(brackets.stages[0].labels) == {"phi_2", "phi_2^(1)"}
    assert brackets.staged_agrees
    assert "beta" in report.side_conditions
    assert report.parameters == {"alpha": "0", "beta": None}


def test_json_marks_constraint_class():
    report = analyze(AnalysisRequest(spec=load_system(system_path("ex2")), verify_samples=0))
    payload = json.loads(render_report(report, OutputFormat.JSON))
    assert payload["pictures"]["lagrangian"]["generations"][0]["constraints"][0]["class"] == "second"


@pytest.mark.parametrize("name", EXAMPLES)
def test_json_round_trip(name):
    report = analyze(AnalysisRequest(spec=load_system(system_path(name)), verify_samples=2))
    payload = json.loads(render_report(report, OutputFormat.JSON))
    assert Report.model_validate(payload) == report


def test_text_report_names_the_system():
    report = analyze(AnalysisRequest(spec=load_system(system_path("ex3")), verify_samples=0))
    text = render_report(report).decode("utf-8")
    assert text.startswith("System ex3 (N = 2)")


def test_several_reports_render_as_json_list():
    reports = [
        analyze(AnalysisRequest(spec=load_system(system_path(name)), verify_samples=0))
        for name in ("ex1", "ex4")
    ]
    payload = json.loads(render_reports(reports, OutputFormat.JSON))
    assert [r["system"] for r in payload] == ["ex1", "ex4"]


# Command line

def test_cli_json(tmp_path):
    code, out = run(tmp_path, system_path("ex4"), "--format", "json")
    assert code == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["system"] == "ex4"
    assert payload["pictures"]["lagrangian"]["termination"] == "GaugeFreedom"
    assert payload["equivalence"]["matched"] is True


@pytest.mark.parametrize("name", EXAMPLES)
def test_cli_output_is_deterministic(tmp_path, name):
    _, first = run(tmp_path, system_path(name), "--format", "json", "--seed", "7", name="a.json")
    _, second = run(tmp_path, system_path(name), "--format", "json", "--seed", "7", name="b.json")
    assert first.read_bytes() == second.read_bytes()


def test_cli_missing_file(tmp_path):
    code, out = run(tmp_path, str(tmp_path / "missing.lag"))
    assert code == EXIT_INPUT_ERROR
    assert not out.exists()


def test_cli_invalid_utf8_is_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.lag"
    bad.write_bytes(b'system "bad"\ndim 1\nlagrangian = v1^2/2 \xff\n')
    code, out = run(tmp_path, str(bad))
    assert code == EXIT_INPUT_ERROR
    assert not out.exists()
    assert "not valid UTF-8" in capsys.readouterr().err


def test_cli_budget_exhaustion(tmp_path, capsys):
    code, _ = run(tmp_path, system_path("ex4"), "--max-gen", "1")
    assert code == EXIT_ANALYSIS_ERROR
    assert "GenerationBudgetExceeded" in capsys.readouterr().err


def test_cli_worst_exit_code_wins(tmp_path):
    code, out = run(tmp_path, system_path("ex1"), str(tmp_path / "missing.lag"), "--format", "json")
    assert code == EXIT_INPUT_ERROR
    assert json.loads(out.read_text(encoding="utf-8"))["system"] == "ex1"


def test_cli_override_selects_gauge_branch(tmp_path):
    code, out = run(tmp_path, system_path("ex5b"), "--set", "beta=0", "--format", "json")
    assert code == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["pictures"]["hamiltonian"]["termination"] == "GaugeFreedom"
    assert payload["parameters"]["beta"] == "0"


def test_cli_multiple_files_give_list(tmp_path):
    code, out = run(tmp_path, system_path("ex1"), system_path("ex2"), "--format", "json")
    assert code == EXIT_OK
    assert len(json.loads(out.read_text(encoding="utf-8"))) == 2


@pytest.mark.parametrize("args", [["--picture", "sideways"], ["--format", "xml"], ["--set", "beta"], ["--max-gen", "0"]])
def test_cli_rejects_bad_options(tmp_path, args):
    code, _ = run(tmp_path, system_path("ex1"), *args)
    assert code == EXIT_INPUT_ERROR


def test_exit_codes():
    assert exit_code_for(ParseError("bad")) == EXIT_INPUT_ERROR
    assert exit_code_for(FileNotFoundError()) == EXIT_INPUT_ERROR
    assert exit_code_for(GenerationBudgetExceeded(3)) == EXIT_ANALYSIS_ERROR


def test_environment_overrides_settings(monkeypatch):
    monkeypatch.setenv("ANALYZER_MAX_GENERATIONS", "3")
    monkeypatch.setenv("ANALYZER_PICTURE", "lagrangian")
    assert resolve_max_generations(None) == 3
    assert resolve_max_generations(5) == 5
    assert resolve_picture(None) == "lagrangian"


def test_override_parsing():
    assert parse_override("beta = 1/2")["beta"] * 2 == 1
    with pytest.raises(InputError):
        parse_override("1beta=2")
    assert validate_picture(" Both ") == Picture.BOTH


def test_invalid_environment_integer_falls_back_with_warning(monkeypatch, caplog):
    monkeypatch.setenv("ANALYZER_SEED", "seven")
    with caplog.at_level("WARNING", logger="analyzer.cli.config"):
        assert resolve_seed(None) == settings.analyzer_seed
    assert "ANALYZER_SEED='seven' is not an integer" in caplog.text


def test_rational_hessian_reports_factor_side_condition():
    spec = parse_system('system "mass"\ndim 1\nlagrangian = v1^2/(2*q1)\n')
    report = analyze(AnalysisRequest(spec=spec, verify_samples=2))
    assert report.side_conditions == ["q1"]
    assert report.verification.passed
