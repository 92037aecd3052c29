import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from src.core import kernel
from src.core.exceptions import DegenerateLagrangian
from src.core.parser import parse_system
from src.services.lagreduce import run_lagrangian
from src.services.phasespace import (
    build_model,
    evolution_field,
    field_matches_lagrangian_bracket,
    hessian_identity_holds,
    lagrangian_bracket,
    lagrangian_two_form,
    poisson_bracket,
    vertical_differential,
)
from tests.conftest import EXAMPLES, U, p1, p2, p3, q1, q2, q3, v1, v2, v3, vdot1, model_for


def test_energy_of_ex2():
    model = model_for("ex2")
    expected = p1 * v1 + p2 * v2 + p3 * v3 - v1 ** 2 / 2 + v2 * q3
    assert kernel.is_zero(model.energy - expected)


def test_energy_of_ex4():
    model = model_for("ex4")
    assert kernel.is_zero(model.energy - (p1 * v1 + p2 * v2 - sp.exp(q2) * v1 ** 2 / 2))


def test_zero_lagrangian_is_maximally_degenerate():
    model = build_model(parse_system('system "null"\ndim 1\nlagrangian = 0\n'))
    assert model.energy == p1 * v1
    assert model.hessian.entries == [0]
    assert [c.expr for c in model.primary] == [p1]
    field = evolution_field(model)
    assert field.coefficients["q1"] == v1
    assert field.undetermined == ["vdot1"]


@pytest.mark.parametrize(
    "name, expected",
    [
        ("ex2", [p1 - v1, p2 + q3, p3]),
        ("ex3", [p1 + q2 / 2, p2 - q1 / 2]),
        ("ex5b", [p1 - q2 - v1, p2 - q1]),
    ],
)
def test_primary_constraints(name, expected):
    model = model_for(name)
    assert [c.label for c in model.primary] == [f"phi_{i}" for i in range(1, len(expected) + 1)]
    for constraint, e in zip(model.primary, expected):
        assert kernel.is_zero(constraint.expr - e)
        assert constraint.generation == 0


@pytest.mark.parametrize("name", EXAMPLES)
def test_hessian_identity(name):
    assert hessian_identity_holds(model_for(name))


def test_vertical_differential_of_energy_ex4():
    model = model_for("ex4")
    components = vertical_differential(model, model.energy)
    assert kernel.is_zero(components["v1"] - (p1 - sp.exp(q2) * v1))
    assert components["v2"] == p2


def test_vertical_differential_of_constant():
    model = model_for("ex1")
    assert vertical_differential(model, sp.Integer(5)) == {"v1": 0}


def test_evolution_field_ex1():
    field = evolution_field(model_for("ex1"))
    assert field.coefficients["q1"] == v1
    assert field.coefficients["v1"] == vdot1
    assert field.coefficients["p1"] == -sp.diff(U(q1), q1)


def test_evolution_field_ex2():
    field = evolution_field(model_for("ex2"))
    assert field.coefficients["p3"] == -v2
    assert field.coefficients["p1"] == 0
    assert field.undetermined == ["vdot1", "vdot2", "vdot3"]


# Poisson bracket

def test_canonical_pair():
    assert poisson_bracket(p1, q1, 2) == 1
    assert poisson_bracket(q1, p1, 2) == -1
    assert poisson_bracket(p1, q2, 2) == 0


def test_ex5b_velocity_from_bracket():
    h = (p1 - q2) ** 2 / 2
    assert kernel.is_zero(-poisson_bracket(h, q2 - q1, 2) - (p1 - q2))


poly = st.builds(
    lambda a, b, c, d: a * q1 * p2 + b * p1 ** 2 + c * q2 * p1 * q1 + d * p2,
    st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3),
)


@settings(max_examples=60, deadline=None)
@given(poly, poly, poly)
def test_poisson_bracket_properties(f, g, h):
    assert kernel.is_zero(poisson_bracket(f, g, 2) + poisson_bracket(g, f, 2))
    assert kernel.is_zero(poisson_bracket(f, 2 * g + h, 2) - 2 * poisson_bracket(f, g, 2) - poisson_bracket(f, h, 2))
    jacobi = (
        poisson_bracket(f, poisson_bracket(g, h, 2), 2)
        + poisson_bracket(g, poisson_bracket(h, f, 2), 2)
        + poisson_bracket(h, poisson_bracket(f, g, 2), 2)
    )
    assert kernel.is_zero(jacobi)


# Regular-case Lagrangian objects

def test_two_form_ex1():
    gamma, m = lagrangian_two_form(model_for("ex1"))
    assert gamma.entries == [1]
    assert m.entries == [0]


def test_two_form_ex3_is_antisymmetric():
    _, m = lagrangian_two_form(model_for("ex3"))
    assert m.to_rows() == [[0, 1], [-1, 0]]


def test_lagrangian_bracket_ex1():
    model = model_for("ex1")
    energy = v1 ** 2 / 2 + U(q1)
    assert lagrangian_bracket(model, v1, q1) == 1
    assert lagrangian_bracket(model, q1, q1) == 0
    assert kernel.is_zero(lagrangian_bracket(model, energy, q1) - v1)


def test_lagrangian_bracket_refuses_degenerate():
    with pytest.raises(DegenerateLagrangian):
        lagrangian_bracket(model_for("ex2"), v1, q1)


def test_evolution_matches_lagrangian_bracket_ex1():
    model = model_for("ex1")
    assert field_matches_lagrangian_bracket(model, {"vdot1": -sp.diff(U(q1), q1)})
    assert not field_matches_lagrangian_bracket(model, {"vdot1": sp.diff(U(q1), q1)})


# Regular case with a gyroscopic term

GYROSCOPIC = 'system "gyro"\ndim 2\nlagrangian = v1^2/2 + v2^2/2 + q1*v2\n'


def test_two_form_with_nonzero_m():
    _, m = lagrangian_two_form(build_model(parse_system(GYROSCOPIC)))
    assert m.to_rows() == [[0, 1], [-1, 0]]


@pytest.mark.parametrize("f, g", [(q1, v1), (v1, v2), (q1 * v2, v1 ** 2), (q2, q1 * v1)])
def test_lagrangian_bracket_antisymmetric_with_nonzero_m(f, g):
    model = build_model(parse_system(GYROSCOPIC))
    assert kernel.is_zero(lagrangian_bracket(model, f, g) + lagrangian_bracket(model, g, f))


def test_lagrangian_bracket_of_velocities_carries_m():
    model = build_model(parse_system(GYROSCOPIC))
    assert lagrangian_bracket(model, v1, v2) == -1


def test_evolution_matches_lagrangian_bracket_with_nonzero_m():
    model = build_model(parse_system(GYROSCOPIC))
    assert field_matches_lagrangian_bracket(model, {"vdot1": v2, "vdot2": -v1})
    assert not field_matches_lagrangian_bracket(model, {"vdot1": -v2, "vdot2": v1})
    lag = run_lagrangian(model)
    assert lag.state.determined_accelerations == {"vdot1": v2, "vdot2": -v1}
    assert field_matches_lagrangian_bracket(model, lag.state.determined_accelerations)
