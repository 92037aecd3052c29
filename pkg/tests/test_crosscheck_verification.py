import random

import pytest
import sympy as sp

from src.core.exceptions import EquivalenceFailure, SideConditionViolated
from src.core.models import VerificationSummary
from src.core.parser import parse_system
from src.services.crosscheck import cross_check, generation_zero_map
from src.services.lagreduce import run_lagrangian
from src.services.phasespace import build_model
from src.services.verification import CHECKS, _draw, merge_summaries, numeric_verify
from tests.conftest import EXAMPLES, p1, q1, v1


@pytest.mark.parametrize("name", EXAMPLES)
def test_pictures_agree(lagrangian_reductions, hamiltonian_reductions, name):
    record = cross_check(lagrangian_reductions[name], hamiltonian_reductions[name])
    assert record.matched
    assert record.termination_agrees
    assert record.undetermined_agrees
    labels = [c.label for c in lagrangian_reductions[name].state.constraints]
    assert [m.label for m in record.map] == labels


def test_variable_map_ex4(lagrangian_reductions, hamiltonian_reductions):
    record = cross_check(lagrangian_reductions["ex4"], hamiltonian_reductions["ex4"])
    assert len(record.variables) == 2
    assert record.variables[0].startswith("lagrangian: p1 = ")
    assert record.variables[1].startswith("hamiltonian: v1 = ")


def test_generation_zero_map_ex1(lagrangian_reductions, hamiltonian_reductions):
    assert generation_zero_map(lagrangian_reductions["ex1"].state) == {p1: v1}
    assert generation_zero_map(hamiltonian_reductions["ex1"].state) == {v1: p1}


def test_mismatched_systems_fail(lagrangian_reductions, hamiltonian_reductions):
    with pytest.raises(EquivalenceFailure):
        cross_check(lagrangian_reductions["ex5a"], hamiltonian_reductions["ex5b"])


# Numeric verification

@pytest.mark.parametrize("name", EXAMPLES)
def test_lagrangian_residuals_vanish(lagrangian_reductions, name):
    summary = numeric_verify(lagrangian_reductions[name], samples=4, seed=11)
    assert summary.samples == 4
    assert summary.passed
    assert set(summary.checks) == set(CHECKS)


@pytest.mark.parametrize("name", EXAMPLES)
def test_hamiltonian_residuals_vanish(hamiltonian_reductions, name):
    summary = numeric_verify(hamiltonian_reductions[name], samples=4, seed=11)
    assert summary.passed


@pytest.mark.parametrize("name", ["ex2", "ex3", "ex5b"])
def test_polynomial_systems_have_exact_zero_residual(lagrangian_reductions, hamiltonian_reductions, name):
    for reduction in (lagrangian_reductions[name], hamiltonian_reductions[name]):
        assert numeric_verify(reduction, samples=3, seed=1).max_residual == "0"


def test_zero_samples_skips(lagrangian_reductions):
    summary = numeric_verify(lagrangian_reductions["ex1"], samples=0)
    assert summary == VerificationSummary(samples=0)


def test_free_particle():
    model = build_model(parse_system('system "free"\ndim 1\nlagrangian = v1^2/2\n'))
    summary = numeric_verify(run_lagrangian(model), samples=5, seed=2)
    assert summary.passed
    assert summary.checks["energy"] == "0"


def test_same_seed_same_summary(hamiltonian_reductions):
    reduction = hamiltonian_reductions["ex4"]
    assert numeric_verify(reduction, samples=3, seed=5) == numeric_verify(reduction, samples=3, seed=5)


def test_vanishing_side_condition_exhausts_budget():
    with pytest.raises(SideConditionViolated):
        _draw({q1}, [], [sp.Integer(0)], random.Random(0), 3)


def test_draw_returns_point_when_conditions_hold():
    point = _draw({q1}, [], [sp.Integer(1)], random.Random(0), 1)
    assert q1 in point


def test_merge_takes_worst_case():
    a = VerificationSummary(samples=4, max_residual="0", passed=True, checks={"energy": "0"})
    b = VerificationSummary(samples=8, max_residual="1/10", passed=False, checks={"energy": "1/10"})
    merged = merge_summaries([a, b])
    assert merged.samples == 8
    assert merged.max_residual == "1/10"
    assert not merged.passed
    assert merged.checks["energy"] == "1/10"
    assert merged.checks["brackets"] == "0"


def test_merge_of_skipped_runs():
    assert merge_summaries([VerificationSummary(samples=0)]).samples == 0
