"""
Exact symbolic expression kernel.

Expressions are sympy trees over rational literals, coordinate symbols
(q1.., v1.., p1..), parameters, exp atoms of polynomials and unary opaque
functions with formal derivatives. ``normalize`` produces the canonical
rational-function form on which every zero test of the analyzer relies.
"""

import random
import re
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import sympy as sp
from sympy.core.function import AppliedUndef
from sympy.printing.precedence import precedence
from sympy.printing.str import StrPrinter

from .exceptions import CyclicBinding, NotAffine, ZeroCoefficient, ZeroDivisionInExpression

Expr = sp.Expr

COORDINATE_PATTERN = re.compile(r"^(q|v|p|vdot)([1-9][0-9]*)$")
IDENTIFIER_PATTERN = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


# Symbols

def q(i: int) -> sp.Symbol:
    return sp.Symbol(f"q{i}")


def v(i: int) -> sp.Symbol:
    return sp.Symbol(f"v{i}")


def p(i: int) -> sp.Symbol:
    return sp.Symbol(f"p{i}")


def multiplier(i: int) -> sp.Symbol:
    """Undetermined acceleration attached to the direction d/dv_i."""
    return sp.Symbol(f"vdot{i}")


def coordinate_kind(symbol: sp.Symbol) -> Optional[Tuple[str, int]]:
    """Return (kind, index) for coordinate and multiplier symbols, None otherwise."""
    match = COORDINATE_PATTERN.match(symbol.name) if isinstance(symbol, sp.Symbol) else None
    if not match:
        return None
    return match.group(1), int(match.group(2))


def is_reserved_name(name: str) -> bool:
    return name == "exp" or COORDINATE_PATTERN.match(name) is not None


# Opaque functions

# Bound variable of derivatives taken at a non-symbol point; not a valid identifier
DERIVATIVE_POINT = sp.Symbol("_x")


def opaque_derivative(function: sp.FunctionClass, order: int, argument: Expr) -> Expr:
    """k-th formal derivative of F evaluated at argument, in canonical form."""
    if order == 0:
        return function(argument)
    if isinstance(argument, sp.Symbol):
        return sp.Derivative(function(argument), (argument, order))
    return sp.Subs(
        sp.Derivative(function(DERIVATIVE_POINT), (DERIVATIVE_POINT, order)),
        DERIVATIVE_POINT,
        argument,
    )


def _derivative_at_point(subs: sp.Subs) -> Optional[Tuple[sp.FunctionClass, int, Expr]]:
    derivative = subs.expr
    if len(subs.variables) != 1 or not isinstance(derivative, sp.Derivative):
        return None
    function = derivative.expr
    if not isinstance(function, AppliedUndef) or function.args != (subs.variables[0],):
        return None
    order = sum(count for _, count in derivative.variable_count)
    return function.func, order, subs.point[0]


def _canonical_subs(e: Expr) -> Expr:
    """Rewrite F'(x) at x = c with one fixed bound variable so equal points compare equal."""
    def rebuild(subs):
        parts = _derivative_at_point(subs)
        return subs if parts is None else opaque_derivative(*parts)
    return e.replace(lambda a: isinstance(a, sp.Subs), rebuild)


# Printing

class ExpressionPrinter(StrPrinter):
    """Prints expressions in the input grammar so that parsing the output is a fixed point."""

    def _print_Pow(self, expr, rational=False):
        PREC = precedence(expr)
        base, exponent = expr.base, expr.exp
        if exponent.is_Integer and exponent.is_negative:
            if exponent == -1:
                return "1/%s" % self.parenthesize(base, PREC, strict=False)
            return "1/%s" % self._print(sp.Pow(base, -exponent, evaluate=False))
        return "%s^%s" % (self.parenthesize(base, PREC, strict=False), self._print(exponent))

    def _print_Derivative(self, expr):
        function = expr.expr
        order = sum(count for _, count in expr.variable_count)
        name = function.func.__name__
        return "%s%s(%s)" % (name, "'" * order, self._print(function.args[0]))

    def _print_Subs(self, expr):
        parts = _derivative_at_point(expr)
        if parts is None:
            return super()._print_Subs(expr)
        function, order, point = parts
        return "%s%s(%s)" % (function.__name__, "'" * order, self._print(point))

    def _print_Exp1(self, expr):
        return "exp(1)"


_printer = ExpressionPrinter()


def print_expression(e: Expr) -> str:
    return _printer.doprint(sp.sympify(e))


# Normal form

def _exp_atoms(e: Expr) -> List[Tuple[Expr, Expr]]:
    """Pairs (atom, exponent) for every exp atom, including the constant e."""
    atoms = [(atom, atom.args[0]) for atom in e.atoms(sp.exp)]
    if e.has(sp.E):
        atoms.append((sp.E, sp.S.One))
    return sorted(atoms, key=lambda pair: sp.default_sort_key(pair[0]))


def _encode_exp_atoms(e: Expr) -> Tuple[Expr, Dict[sp.Symbol, Expr]]:
    """
    Replace exp atoms by monomials in placeholder symbols.

    Each exponent is expanded into terms c*m. For a monomial m the placeholder
    stands for exp(m/D) where D is the lcm of the denominators of all
    coefficients c seen for m, so every atom becomes an integer power product.
    """
    atoms = _exp_atoms(e)
    if not atoms:
        return e, {}

    expansions = []
    denominators: Dict[Expr, int] = {}
    for atom, exponent in atoms:
        terms = sp.expand(exponent).as_coefficients_dict()
        expansions.append((atom, terms))
        for monomial, coeff in terms.items():
            coeff = sp.Rational(coeff)
            denominators[monomial] = sp.ilcm(denominators.get(monomial, 1), coeff.q)

    monomials = sorted(denominators, key=sp.default_sort_key)
    placeholders = {m: sp.Symbol(f"_exp{index}") for index, m in enumerate(monomials)}

    replacements = {}
    for atom, terms in expansions:
        product = sp.S.One
        for monomial, coeff in terms.items():
            power = sp.Rational(coeff) * denominators[monomial]
            product *= placeholders[monomial] ** int(power)
        replacements[atom] = product

    inverse = {
        placeholders[m]: sp.exp(m / denominators[m]) for m in monomials
    }
    return e.xreplace(replacements), inverse


def normalize(e: Expr) -> Expr:
    """Canonical form: cancelled rational function over the atom set."""
    e = sp.sympify(e)
    if e.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
        raise ZeroDivisionInExpression()
    if e.has(sp.Subs):
        e = _canonical_subs(e)
    encoded, inverse = _encode_exp_atoms(e)
    try:
        cancelled = sp.cancel(encoded)
    except ZeroDivisionError as exc:
        raise ZeroDivisionInExpression() from exc
    if cancelled.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
        raise ZeroDivisionInExpression()
    if inverse:
        cancelled = cancelled.xreplace(inverse)
    return cancelled


def is_zero(e: Expr) -> bool:
    return normalize(e) == 0


def differentiate(e: Expr, x: sp.Symbol) -> Expr:
    return normalize(sp.diff(e, x))


def substitute(e: Expr, bindings: Mapping[sp.Symbol, Expr]) -> Expr:
    """Simultaneous substitution followed by normalization."""
    if not bindings:
        return normalize(e)
    keys = set(bindings)
    for value in bindings.values():
        clash = keys & sp.sympify(value).free_symbols
        if clash:
            raise CyclicBinding(sorted(s.name for s in clash)[0])
    return normalize(sp.sympify(e).subs(list(bindings.items()), simultaneous=True))


def solve_linear(e: Expr, x: sp.Symbol) -> Tuple[Expr, Expr]:
    """Solve e = 0 for x. Returns (solution, coefficient of x)."""
    coeff = differentiate(e, x)
    if not is_zero(sp.diff(coeff, x)):
        raise NotAffine(x.name)
    if coeff == 0:
        raise ZeroCoefficient(x.name)
    rest = normalize(sp.sympify(e).subs(x, 0))
    return normalize(-rest / coeff), coeff


def depends_on(e: Expr, symbols: Iterable[sp.Symbol]) -> bool:
    free = sp.sympify(e).free_symbols
    return any(s in free for s in symbols)


# Constraint normal form

def primitive_constraint(e: Expr, coordinates: Sequence[sp.Symbol]) -> Tuple[Expr, List[Expr]]:
    """
    Strip a constraint function to its square-free coordinate-dependent part.

    Returns (stripped, side_conditions). Numeric factors and exp atoms are
    dropped silently, any other coordinate-free factor is returned as a side
    condition. A result without coordinates is returned as a constant.
    """
    e = normalize(e)
    if e == 0:
        return e, []
    numerator, _ = sp.fraction(sp.together(e))
    coeff, factors = sp.factor_list(numerator)
    kept = sp.S.One
    conditions: List[Expr] = []
    coordinate_set = set(coordinates)
    for factor, _multiplicity in factors:
        if isinstance(factor, sp.exp) or factor == sp.E:
            continue
        if not factor.free_symbols & coordinate_set:
            if not factor.is_number:
                conditions.append(normalize(factor))
            continue
        kept *= factor
    if kept == 1:
        return normalize(coeff) if coeff != 0 else sp.S.Zero, conditions
    kept = normalize(sp.expand(kept))
    return canonical_sign(kept), conditions


def canonical_sign(e: Expr) -> Expr:
    """Fix the overall sign so that the leading printed term is positive."""
    terms = sp.Add.make_args(sp.expand(sp.fraction(e)[0]))
    ordered = sorted(terms, key=sp.default_sort_key)
    leading_coeff, _ = ordered[0].as_coeff_Mul()
    if leading_coeff.is_number and leading_coeff < 0:
        return normalize(-e)
    return e


def nonzero_factors(e: Expr) -> List[Expr]:
    """Irreducible non-numeric factors of numerator and denominator, each asserted nonzero."""
    numerator, denominator = sp.fraction(sp.together(normalize(e)))
    factors: List[Expr] = []
    for part in (numerator, denominator):
        for factor, _multiplicity in sp.factor_list(part)[1]:
            if factor.is_number:
                continue
            factor = canonical_sign(normalize(factor))
            if factor not in factors:
                factors.append(factor)
    return factors


# Numeric evaluation

def random_rational(rng: random.Random, bound: int = 7, denominator: int = 5) -> sp.Rational:
    """Random nonzero rational with small numerator and denominator."""
    while True:
        value = sp.Rational(rng.randint(-bound * denominator, bound * denominator), rng.randint(1, denominator))
        if value != 0:
            return value


def opaque_atoms(e: Expr) -> List[Expr]:
    """Opaque function applications and their formal derivatives, in canonical order."""
    atoms = set()
    stack = [sp.sympify(e)]
    while stack:
        node = stack.pop()
        if isinstance(node, (sp.Subs, sp.Derivative)):
            atoms.add(node)
            continue
        if isinstance(node, AppliedUndef):
            atoms.add(node)
        stack.extend(node.args)
    return sorted(atoms, key=sp.default_sort_key)


def evaluate(e: Expr, point: Mapping[sp.Symbol, Expr], digits: int = 50) -> sp.Expr:
    """
    Evaluate at a point. Exact when the expression is exp-free, otherwise a
    high-precision float. Opaque atoms must be bound in ``point``.
    """
    e = sp.sympify(e)
    atom_bindings = {a: point[a] for a in opaque_atoms(e) if a in point}
    if atom_bindings:
        e = e.xreplace(atom_bindings)
    value = e.xreplace({s: val for s, val in point.items() if isinstance(s, sp.Symbol)})
    if value.has(sp.zoo, sp.nan):
        raise ZeroDivisionInExpression()
    if value.has(sp.exp) or value.has(sp.E):
        return sp.N(value, digits)
    return value


def numerically_zero(value: sp.Expr, scale: sp.Expr = 1, tolerance: float = 1e-30) -> bool:
    if value.is_Rational:
        return value == 0
    magnitude = max(abs(sp.N(scale, 50)), 1)
    return abs(sp.N(value, 50)) <= tolerance * magnitude


def sample_point(
    symbols: Iterable[sp.Symbol],
    rng: random.Random,
    atoms: Iterable[Expr] = (),
) -> Dict[sp.Basic, sp.Rational]:
    """Random rational point for symbols and independent random values for opaque atoms."""
    point: Dict[sp.Basic, sp.Rational] = {}
    for symbol in sorted(set(symbols), key=sp.default_sort_key):
        point[symbol] = random_rational(rng)
    for atom in atoms:
        point[atom] = random_rational(rng)
    return point

