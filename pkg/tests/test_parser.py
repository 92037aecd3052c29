import pytest
import sympy as sp

from src.core.exceptions import InputError, ParseError, UnknownIdentifier, ZeroDivisionInExpression
from src.core.models import VarTable
from src.core.parser import load_system, parse_expression, parse_rational, parse_system, tokenize
from tests.conftest import U, beta, q1, q2, v1, v2, system_path

VARS = VarTable(dim=2, parameters=["beta"], functions=["U"])


def test_tokenize_positions():
    tokens = tokenize("v1^2 + 3")
    assert [t.kind for t in tokens] == ["ident", "op", "number", "op", "number", "end"]
    assert tokens[3].position == 5


def test_precedence_and_unary_minus():
    assert parse_expression("-v1^2 + 2*q1/4", VARS) == -v1 ** 2 + q1 / 2


def test_negative_integer_exponent():
    assert parse_expression("q1^-2", VARS) == q1 ** -2


def test_opaque_function_and_derivative():
    assert parse_expression("U(q1)", VARS) == U(q1)
    assert parse_expression("U''(q1)", VARS) == sp.diff(U(q1), q1, 2)


def test_exp_of_polynomial():
    assert parse_expression("exp(q2)*v1", VARS) == sp.exp(q2) * v1


@pytest.mark.parametrize("text", ["v1 +", "(q1", "q1^1.5", "2 $ q1", "exp(U(q1))", "U(U(q1))", "U"])
def test_malformed_expressions(text):
    with pytest.raises(ParseError):
        parse_expression(text, VARS)


def test_unknown_identifier_names_the_symbol():
    with pytest.raises(UnknownIdentifier) as info:
        parse_expression("gamma*q1", VARS)
    assert "gamma" in info.value.message


def test_out_of_range_coordinate_is_unknown():
    with pytest.raises(UnknownIdentifier):
        parse_expression("q3", VARS)


def test_literal_division_by_zero():
    with pytest.raises(ZeroDivisionInExpression):
        parse_expression("q1/0", VARS)


def test_parse_rational():
    assert parse_rational("-1/2") == sp.Rational(-1, 2)
    assert parse_rational("0.25") == sp.Rational(1, 4)
    with pytest.raises(InputError):
        parse_rational("q1")


def test_system_file_with_symbolic_parameter():
    spec = load_system(system_path("ex5b"))
    assert spec.name == "ex5b"
    assert spec.dim == 2
    assert spec.parameter_values == {"alpha": 0, "beta": None}
    assert spec.free_parameters == [beta]
    assert sp.expand(spec.lagrangian - (v1 ** 2 / 2 + q2 * v1 + q1 * v2 + beta / 2 * (q1 - q2) ** 2)) == 0


def test_override_selects_branch():
    spec = load_system(system_path("ex5b"), {"beta": sp.Integer(0)})
    assert beta not in spec.lagrangian.free_symbols
    assert spec.parameter_values["beta"] == 0


def test_override_of_undeclared_parameter():
    with pytest.raises(InputError):
        load_system(system_path("ex2"), {"beta": sp.Integer(0)})


def test_missing_file_is_input_error():
    with pytest.raises(InputError):
        load_system(system_path("does-not-exist"))


def test_error_reports_line_number():
    text = 'system "bad"\ndim 1\n\nlagrangian = v1^2 +\n'
    with pytest.raises(ParseError) as info:
        parse_system(text, source="bad.lag")
    assert info.value.message.startswith("bad.lag:4:")


def test_unrecognized_line():
    with pytest.raises(ParseError):
        parse_system('system "x"\ndim 1\nlagrangian = v1\nvelocity v1\n')


@pytest.mark.parametrize(
    "text",
    [
        'dim 1\nlagrangian = v1^2\n',
        'system "x"\nlagrangian = v1^2\n',
        'system "x"\ndim 1\n',
    ],
)
def test_missing_required_lines(text):
    with pytest.raises(InputError):
        parse_system(text)


def test_lagrangian_must_not_mention_momenta():
    with pytest.raises(InputError):
        parse_system('system "x"\ndim 1\nlagrangian = p1*v1\n')


def test_reserved_parameter_name():
    with pytest.raises(InputError):
        parse_system('system "x"\ndim 1\nparam q1\nlagrangian = v1^2\n')


def test_comments_are_ignored():
    spec = parse_system('# header\nsystem "x"  # name\ndim 1\nlagrangian = v1^2/2 # kinetic\n')
    assert spec.lagrangian == v1 ** 2 / 2
