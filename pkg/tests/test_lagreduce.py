import pytest
import sympy as sp

from src.core import kernel
from src.core.exceptions import GenerationBudgetExceeded, InconsistentConstraints
from src.core.linalg import generic_rank
from src.core.models import ConstraintClass, Termination
from src.core.parser import parse_system
from src.services.lagreduce import (
    classify_generation,
    consistency_matrix,
    initial_state,
    lagrangian_step,
    reducibility_check,
    run_lagrangian,
)
from src.services.phasespace import build_model
from src.services.surface import trial_surface
from tests.conftest import (
    EXAMPLES,
    U,
    beta,
    model_for,
    p1,
    p2,
    p3,
    q1,
    q2,
    q3,
    same_up_to_sign,
    v1,
    v2,
    v3,
)


def resolutions(reduction):
    return {
        c.resolution.variable: c.resolution.solution
        for c in reduction.state.constraints
        if c.is_resolved
    }


def exprs(reduction, generation):
    return [c.expr for c in reduction.state.constraints if c.generation == generation]


def test_ex1(lagrangian_reductions):
    lag = lagrangian_reductions["ex1"]
    assert lag.termination == Termination.FULLY_DETERMINED
    assert lag.state.generation == 1
    assert lag.state.labels(ConstraintClass.SECOND) == ["phi_1"]
    assert kernel.is_zero(lag.state.determined_accelerations["vdot1"] + sp.diff(U(q1), q1))
    assert kernel.is_zero(lag.energy - (v1 ** 2 / 2 + U(q1)))


def test_ex2(lagrangian_reductions):
    lag = lagrangian_reductions["ex2"]
    assert lag.termination == Termination.FULLY_DETERMINED
    assert lag.state.determined_accelerations["vdot1"] == 0
    secondaries = exprs(lag, 1)
    assert len(secondaries) == 2
    assert same_up_to_sign(lag.state.constraint("phi_2^(1)").expr, v3)
    assert same_up_to_sign(lag.state.constraint("phi_3^(1)").expr, v2)
    assert resolutions(lag) == {p1: v1, v3: 0, p2: -q3, v2: 0, p3: 0}
    assert lag.state.labels(ConstraintClass.FIRST) == []
    free = {name: c for name, c in lag.field.coefficients.items()
            if sp.Symbol(name) not in lag.state.surface and c != 0}
    assert free == {"q1": v1}


def test_ex3(lagrangian_reductions):
    lag = lagrangian_reductions["ex3"]
    first_step = lag.steps[0]
    assert first_step.certificate.rank == 0
    assert same_up_to_sign(lag.state.constraint("phi_1^(1)").expr, v2 - q1)
    assert same_up_to_sign(lag.state.constraint("phi_2^(1)").expr, v1 + q2)
    assert resolutions(lag) == {v2: q1, v1: -q2, p1: -q2 / 2, p2: q1 / 2}
    assert lag.field.coefficients["q1"] == -q2
    assert lag.field.coefficients["v1"] == -q1
    assert lag.termination == Termination.FULLY_DETERMINED


def test_ex4_gauge_freedom(lagrangian_reductions):
    lag = lagrangian_reductions["ex4"]
    assert lag.termination == Termination.GAUGE_FREEDOM
    assert lag.field.undetermined == ["vdot2"]
    assert kernel.is_zero(lag.state.determined_accelerations["vdot1"] + v1 * v2)
    assert set(lag.state.labels(ConstraintClass.FIRST)) == {"phi_2", "phi_2^(1)"}
    assert lag.state.constraint("phi_2^(1)").expr == v1
    assert sp.exp(q2) in lag.state.side_conditions


def test_ex5a_gauge_freedom(lagrangian_reductions):
    lag = lagrangian_reductions["ex5a"]
    assert lag.termination == Termination.GAUGE_FREEDOM
    assert lag.state.labels(ConstraintClass.FIRST) == ["phi_2"]
    assert len(lag.field.undetermined) == 1


def test_ex5b_chain(lagrangian_reductions):
    lag = lagrangian_reductions["ex5b"]
    assert same_up_to_sign(lag.state.constraint("phi_2^(1)").expr, q2 - q1)
    assert same_up_to_sign(lag.state.constraint("phi_2^(2)").expr, v2 - v1)
    assert kernel.is_zero(lag.steps[2].determined["vdot2"] - beta * (q1 - q2))
    assert lag.state.determined_accelerations == {"vdot1": 0, "vdot2": 0}
    assert resolutions(lag)[v2] == v1
    assert resolutions(lag)[q1] == q2
    assert resolutions(lag)[p2] == q2
    assert kernel.is_zero(lag.energy - v1 ** 2 / 2)
    assert beta in lag.steps[0].side_conditions
    assert lag.termination == Termination.FULLY_DETERMINED


SUM_OF_VELOCITIES = 'system "sum"\ndim 2\nlagrangian = (v1 + v2)^2/2 - q1^2/2\n'


def test_chain_with_late_multiplier():
    lag = run_lagrangian(build_model(parse_system(SUM_OF_VELOCITIES)))
    assert lag.termination == Termination.FULLY_DETERMINED
    assert lag.state.determined_accelerations == {"vdot1": 0, "vdot2": 0}
    assert lag.field.coefficients["q2"] == v2


def test_primaries_are_resolved_for_their_momentum():
    lag = run_lagrangian(build_model(parse_system(SUM_OF_VELOCITIES)))
    primaries = [c for c in lag.state.constraints if c.generation == 0 and c.is_resolved]
    assert len(primaries) == 2
    for constraint in primaries:
        assert constraint.resolution.variable == kernel.p(constraint.root)
    for name, coefficient in lag.field.coefficients.items():
        assert not kernel.depends_on(coefficient, lag.model.vars.p), name


def test_opaque_derivative_at_resolved_point():
    spec = parse_system('system "pinned"\ndim 2\nfunction U\nlagrangian = v1^2/2 - U(q1) + q1*q2\n')
    lag = run_lagrangian(build_model(spec))
    bindings = lag.state.surface.bindings
    assert bindings[q1] == 0
    assert kernel.print_expression(bindings[q2]) == "U'(0)"


@pytest.mark.parametrize("name", EXAMPLES)
def test_determined_accelerations_satisfy_pivot_consistency(models, name):
    model = models[name]
    state = initial_state(model)
    while state.pending:
        dots = [state.surface.restrict(state.evolution.apply(state.constraint(label).expr)) for label in state.pending]
        state = lagrangian_step(state, model)
        step = state.steps[-1]
        determined = {sp.Symbol(m): value for m, value in step.determined.items()}
        for row in step.certificate.pivot_rows:
            assert state.surface.restrict(kernel.substitute(dots[row], determined)) == 0, step.pending[row]


@pytest.mark.parametrize("name", EXAMPLES)
def test_reported_accelerations_are_settled(lagrangian_reductions, name):
    lag = lagrangian_reductions[name]
    determined = [sp.Symbol(n) for n in lag.state.determined_accelerations]
    bound = list(lag.state.surface.bindings)
    for value in lag.state.determined_accelerations.values():
        assert not kernel.depends_on(value, determined + bound)


def test_classify_generation_ex2(models):
    state = initial_state(models["ex2"])
    state = lagrangian_step(state, models["ex2"])
    assert state.steps[0].second_class == ["phi_1"]
    assert state.steps[0].produced == ["phi_2^(1)", "phi_3^(1)"]


def test_classify_generation_ex4():
    model = model_for("ex4")
    state = initial_state(model)
    dots = [state.evolution.apply(state.constraint(label).expr) for label in state.pending]
    gamma, _ = consistency_matrix(dots, state.evolution.undetermined_symbols)
    state.certificate = generic_rank(gamma)
    second, rest = classify_generation(state)
    assert second == ["phi_1"]
    assert rest == ["phi_2"]


def test_reducibility_of_zero_candidate(models):
    state = initial_state(models["ex4"])
    assert reducibility_check(sp.Integer(0), state)


def test_ex5b_new_constraint_is_not_reducible(models):
    model = models["ex5b"]
    state = lagrangian_step(initial_state(model), model)
    assert not reducibility_check(v2 - v1, state)


@pytest.mark.parametrize("name", EXAMPLES)
def test_acceleration_count_totals_dimension(lagrangian_reductions, name):
    lag = lagrangian_reductions[name]
    determined = sum(step.certificate.rank for step in lag.steps)
    assert determined + len(lag.field.undetermined) == lag.model.spec.dim


@pytest.mark.parametrize("name", EXAMPLES)
def test_constraints_are_preserved_on_final_surface(lagrangian_reductions, name):
    lag = lagrangian_reductions[name]
    trial, _ = trial_surface(lag.state.surface, lag.state.unresolved)
    for constraint in lag.state.constraints:
        assert trial.restrict(lag.field.apply(constraint.expr)) == 0, constraint.label


@pytest.mark.parametrize("name", EXAMPLES)
def test_energy_is_conserved(lagrangian_reductions, name):
    lag = lagrangian_reductions[name]
    trial, _ = trial_surface(lag.state.surface, lag.state.unresolved)
    assert trial.restrict(lag.field.apply(lag.model.energy)) == 0


@pytest.mark.parametrize("name", EXAMPLES)
def test_resolved_constraints_vanish_on_surface(lagrangian_reductions, name):
    lag = lagrangian_reductions[name]
    for constraint in lag.state.constraints:
        if constraint.is_resolved:
            assert constraint.constraint_class == ConstraintClass.SECOND
            assert lag.state.surface.restrict(constraint.expr) == 0


def test_budget_exhaustion(models):
    with pytest.raises(GenerationBudgetExceeded):
        run_lagrangian(models["ex5b"], max_generations=2)


def test_inconsistent_system():
    model = build_model(parse_system('system "bad"\ndim 1\nlagrangian = q1\n'))
    with pytest.raises(InconsistentConstraints):
        run_lagrangian(model)
