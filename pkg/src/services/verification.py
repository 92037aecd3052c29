"""
Sampling checks of a finished reduction.

Residuals are built symbolically once (energy conservation, constraint
preservation, bracket antisymmetry and Jacobi) and then evaluated at seeded
random points of the final surface. Exact rational arithmetic is used
unless exp atoms force high-precision floats.
"""

import itertools
import random
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Union

import sympy as sp

from ..config import settings
from ..core import kernel
from ..core.exceptions import SideConditionViolated, ZeroDivisionInExpression
from ..core.models import (
    HamiltonianReduction,
    LagrangianReduction,
    Picture,
    VerificationSummary,
)
from ..utils.logger import get_logger
from .phasespace import lagrangian_bracket
from .surface import Surface, trial_surface

logger = get_logger(__name__)

Reduction = Union[LagrangianReduction, HamiltonianReduction]
Bracket = Callable[[sp.Expr, sp.Expr], sp.Expr]

CHECKS = ("energy", "constraints", "brackets")


def _picture(reduction: Reduction) -> Picture:
    return reduction.state.picture


def energy_residuals(reduction: Reduction, surface: Surface) -> List[sp.Expr]:
    """dE(X) for the Lagrangian energy, dh_T(X) in the Hamiltonian picture."""
    if _picture(reduction) == Picture.HAMILTONIAN:
        generator = reduction.routh.h_total
    else:
        generator = reduction.model.energy
    return [surface.restrict(reduction.field.apply(generator))]


def constraint_residuals(reduction: Reduction, surface: Surface) -> List[sp.Expr]:
    return [surface.restrict(reduction.field.apply(c.expr)) for c in reduction.state.constraints]


def _bracket_for(reduction: Reduction) -> Optional[Bracket]:
    if _picture(reduction) == Picture.HAMILTONIAN:
        return reduction.table.bracket
    model = reduction.model
    if model.is_degenerate:
        return None
    return lambda f, g: lagrangian_bracket(model, f, g)


def _bracket_coordinates(reduction: Reduction) -> List[sp.Symbol]:
    vars = reduction.model.vars
    if _picture(reduction) == Picture.HAMILTONIAN:
        return list(vars.q) + list(vars.p)
    return list(vars.q) + list(vars.v)


def bracket_residuals(reduction: Reduction, surface: Surface) -> List[sp.Expr]:
    """Antisymmetry and Jacobi on coordinate functions; {chi, x}* for consumed constraints."""
    bracket = _bracket_for(reduction)
    if bracket is None:
        return []
    coordinates = _bracket_coordinates(reduction)
    residuals = []
    for f, g in itertools.combinations(coordinates, 2):
        residuals.append(surface.restrict(bracket(f, g) + bracket(g, f)))
    for f, g, h in itertools.combinations(coordinates, 3):
        cyclic = bracket(f, bracket(g, h)) + bracket(g, bracket(h, f)) + bracket(h, bracket(f, g))
        residuals.append(surface.restrict(cyclic))
    if _picture(reduction) == Picture.HAMILTONIAN:
        for chi in reduction.table.chi:
            residuals.extend(surface.restrict(bracket(chi, x)) for x in coordinates)
    return residuals


def _symbols_and_atoms(expressions: Iterable[sp.Expr]):
    symbols, atoms = set(), set()
    for e in expressions:
        e = sp.sympify(e)
        symbols |= e.free_symbols
        atoms |= set(kernel.opaque_atoms(e))
    return symbols, sorted(atoms, key=sp.default_sort_key)


def _draw(
    symbols,
    atoms,
    side_conditions: Sequence[sp.Expr],
    rng: random.Random,
    budget: int,
) -> Dict[sp.Basic, sp.Expr]:
    """Sample point at which no side condition vanishes."""
    offending = None
    for _ in range(budget):
        point = kernel.sample_point(symbols, rng, atoms)
        offending = None
        for condition in side_conditions:
            try:
                value = kernel.evaluate(condition, point, settings.analyzer_numeric_digits)
            except ZeroDivisionInExpression:
                offending = condition
                break
            if kernel.numerically_zero(value, tolerance=settings.analyzer_numeric_tolerance):
                offending = condition
                break
        if offending is None:
            return point
    raise SideConditionViolated(kernel.print_expression(offending), budget)


def _max_abs(values: Iterable[sp.Expr]) -> sp.Expr:
    largest = sp.S.Zero
    for value in values:
        magnitude = abs(value)
        if sp.N(magnitude - largest, settings.analyzer_numeric_digits) > 0:
            largest = magnitude
    return largest


def numeric_verify(
    reduction: Reduction,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> VerificationSummary:
    """Evaluate the residuals of one reduction at random points of its final surface."""
    samples = settings.analyzer_verify_samples if samples is None else samples
    seed = settings.analyzer_seed if seed is None else seed
    if samples == 0:
        return VerificationSummary(samples=0)

    surface, _ = trial_surface(reduction.state.surface, reduction.state.unresolved)
    residuals = {
        "energy": energy_residuals(reduction, surface),
        "constraints": constraint_residuals(reduction, surface),
        "brackets": bracket_residuals(reduction, surface),
    }
    pending = {name: [e for e in exprs if e != 0] for name, exprs in residuals.items()}
    side_conditions = [sp.sympify(c) for c in reduction.state.side_conditions]
    symbols, atoms = _symbols_and_atoms(
        [e for exprs in pending.values() for e in exprs] + side_conditions
    )

    rng = random.Random(seed)
    worst = {name: sp.S.Zero for name in CHECKS}
    for _ in range(samples):
        point = _draw(symbols, atoms, side_conditions, rng, settings.analyzer_resample_budget)
        for name, exprs in pending.items():
            values = []
            for e in exprs:
                try:
                    values.append(kernel.evaluate(e, point, settings.analyzer_numeric_digits))
                except ZeroDivisionInExpression:
                    logger.debug(f"verification: {name} residual singular at sample point, skipped")
            worst[name] = _max_abs([worst[name]] + values)

    largest = _max_abs(worst.values())
    passed = bool(sp.N(largest, settings.analyzer_numeric_digits) <= settings.analyzer_numeric_tolerance)
    summary = VerificationSummary(
        samples=samples,
        max_residual=kernel.print_expression(largest),
        passed=passed,
        checks={name: kernel.print_expression(worst[name]) for name in CHECKS},
    )
    log = logger.info if passed else logger.warning
    log(f"{_picture(reduction).value} verification: {samples} samples, max residual {summary.max_residual}")
    return summary


def merge_summaries(summaries: Sequence[VerificationSummary]) -> VerificationSummary:
    """Worst case over several pictures."""
    active = [s for s in summaries if s.samples]
    if not active:
        return VerificationSummary(samples=0)
    checks = {}
    for name in CHECKS:
        values = [sp.sympify(s.checks.get(name, "0")) for s in active]
        checks[name] = kernel.print_expression(_max_abs(values))
    values = [sp.sympify(s.max_residual) for s in active]
    return VerificationSummary(
        samples=max(s.samples for s in active),
        max_residual=kernel.print_expression(_max_abs(values)),
        passed=all(s.passed for s in active),
        checks=checks,
    )
