"""
Constraint surfaces as idempotent substitutions.

A surface is an ordered map variable -> expression in which no value
mentions a bound variable. Binding a new variable rewrites the existing
values, so restricting an expression is one simultaneous substitution.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import sympy as sp

from ..core import kernel
from ..core.exceptions import CyclicBinding, NotAffine, ZeroCoefficient
from ..core.models import Constraint

# Order in which variables are tried when eliminating a constraint
KIND_PREFERENCE = ("v", "p", "q")


class Surface:
    """Idempotent substitution describing the current constraint surface."""

    def __init__(self, bindings: Optional[Iterable[Tuple[sp.Symbol, sp.Expr]]] = None):
        self._bindings: Dict[sp.Symbol, sp.Expr] = {}
        for variable, value in bindings or []:
            self.bind(variable, value)

    def __contains__(self, variable: sp.Symbol) -> bool:
        return variable in self._bindings

    def __len__(self) -> int:
        return len(self._bindings)

    @property
    def bindings(self) -> Dict[sp.Symbol, sp.Expr]:
        return dict(self._bindings)

    def items(self) -> List[Tuple[sp.Symbol, sp.Expr]]:
        return list(self._bindings.items())

    def copy(self) -> "Surface":
        surface = Surface()
        surface._bindings = dict(self._bindings)
        return surface

    def restrict(self, e: sp.Expr) -> sp.Expr:
        return kernel.substitute(e, self._bindings)

    def bind(self, variable: sp.Symbol, value: sp.Expr) -> sp.Expr:
        """Add variable -> value; returns the stored (restricted) value."""
        value = self.restrict(value)
        if variable in value.free_symbols:
            raise CyclicBinding(variable.name)
        for key, existing in list(self._bindings.items()):
            if variable in existing.free_symbols:
                self._bindings[key] = kernel.substitute(existing, {variable: value})
        self._bindings[variable] = value
        return value

    def free(self, symbols: Sequence[sp.Symbol]) -> List[sp.Symbol]:
        return [s for s in symbols if s not in self._bindings]


def candidate_variables(expr: sp.Expr, preferred: Optional[sp.Symbol] = None) -> List[sp.Symbol]:
    """Coordinates of expr in elimination order: preferred first, then v, p, q by index."""
    found = []
    for symbol in sp.sympify(expr).free_symbols:
        kind = kernel.coordinate_kind(symbol)
        if kind and kind[0] in KIND_PREFERENCE:
            found.append((KIND_PREFERENCE.index(kind[0]), kind[1], symbol))
    ordered = [symbol for _, _, symbol in sorted(found, key=lambda t: (t[0], t[1]))]
    if preferred is not None and preferred in ordered:
        ordered.remove(preferred)
        ordered.insert(0, preferred)
    return ordered


def solve_for_any(
    expr: sp.Expr,
    variables: Sequence[sp.Symbol],
) -> Optional[Tuple[sp.Symbol, sp.Expr, sp.Expr]]:
    """First variable in which expr is affine with a nonzero coefficient."""
    for variable in variables:
        try:
            solution, coeff = kernel.solve_linear(expr, variable)
        except (NotAffine, ZeroCoefficient):
            continue
        return variable, solution, coeff
    return None


def trial_surface(surface: Surface, constraints: Sequence[Constraint]) -> Tuple[Surface, List[Constraint]]:
    """
    Extend a copy of the surface by eliminating the given constraints.

    Returns the extended surface and the constraints that could not be
    eliminated by an affine solve.
    """
    trial = surface.copy()
    stuck = []
    for constraint in constraints:
        restricted = trial.restrict(constraint.expr)
        if restricted == 0:
            continue
        solved = solve_for_any(restricted, candidate_variables(restricted))
        if solved is None:
            stuck.append(constraint)
            continue
        variable, solution, _ = solved
        trial.bind(variable, solution)
    return trial, stuck
