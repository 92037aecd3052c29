"""
Lagrangian-picture constraint algorithm.

Each generation differentiates the pending constraints along the current
evolution field, determines as many multipliers (accelerations) as the
rank of their coefficient matrix gamma allows, resolves the second-class
constraints on the surface and turns the left null directions of gamma
into the next generation of constraints. The same consistency step drives
the Hamiltonian picture.
"""

import random
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import sympy as sp

from ..config import settings
from ..core import kernel
from ..core.exceptions import (
    GenerationBudgetExceeded,
    InconsistentConstraints,
    ZeroDivisionInExpression,
    UnresolvableSecondClass,
)
from ..core.linalg import generic_rank, invert_submatrix, left_null_space_basis
from ..core.models import (
    Constraint,
    ConstraintClass,
    GenerationStep,
    LagrangianReduction,
    PhaseSpaceModel,
    Picture,
    RankCertificate,
    ReductionState,
    Resolution,
    SymMatrix,
    Termination,
    VectorField,
)
from ..utils.logger import get_logger
from .phasespace import evolution_field
from .surface import Surface, candidate_variables, solve_for_any, trial_surface

logger = get_logger(__name__)

# Chooses the preferred solve variable for a generation-0 pivot constraint
PivotRule = Callable[[Constraint, sp.Symbol], sp.Symbol]

PROBABLY_REDUCIBLE = "probably reducible"


def initial_state(model: PhaseSpaceModel) -> ReductionState:
    """Generation 0: all primaries pending on W with the field Y + K."""
    constraints = [c.model_copy() for c in model.primary]
    return ReductionState(
        picture=Picture.LAGRANGIAN,
        surface=Surface(),
        constraints=constraints,
        pending=[c.label for c in constraints],
        evolution=evolution_field(model),
        side_conditions=list(model.hessian_cert.side_conditions),
    )


# Consistency step

def consistency_matrix(
    dots: Sequence[sp.Expr],
    multipliers: Sequence[sp.Symbol],
) -> Tuple[SymMatrix, List[sp.Expr]]:
    """gamma[i][j] = d(dot_i)/d(multiplier_j) and the multiplier-free parts of the dots."""
    gamma = SymMatrix.from_rows(
        [[kernel.differentiate(d, m) for m in multipliers] for d in dots],
        cols=len(multipliers),
    )
    zero = {m: sp.S.Zero for m in multipliers}
    base = [kernel.substitute(d, zero) for d in dots]
    return gamma, base


def determine_multipliers(
    gamma: SymMatrix,
    cert: RankCertificate,
    base: Sequence[sp.Expr],
    multipliers: Sequence[sp.Symbol],
) -> Dict[sp.Symbol, sp.Expr]:
    """Solve the pivot rows for the pivot multipliers; the rest stay symbolic."""
    if cert.rank == 0:
        return {}
    inverse = invert_submatrix(gamma, cert.pivot_rows, cert.pivot_cols)
    free = [j for j in range(gamma.cols) if j not in cert.pivot_cols]
    determined = {}
    for a, col in enumerate(cert.pivot_cols):
        total = sp.S.Zero
        for b, row in enumerate(cert.pivot_rows):
            rhs = base[row] + sum((gamma[row, nu] * multipliers[nu] for nu in free), sp.S.Zero)
            total += inverse[a, b] * rhs
        determined[multipliers[col]] = kernel.normalize(-total)
    return determined


def classify_generation(state: ReductionState) -> Tuple[List[str], List[str]]:
    """Pending labels split by the gamma certificate: (second class, first-class candidates)."""
    cert = state.certificate
    second = [state.pending[r] for r in cert.pivot_rows]
    rest = [label for i, label in enumerate(state.pending) if i not in cert.pivot_rows]
    return second, rest


def ancestors(state: ReductionState, constraint: Constraint) -> List[Constraint]:
    """Parents of a constraint from nearest to the primary it descends from."""
    chain = []
    current = constraint
    while current.parent is not None:
        current = state.constraint(current.parent)
        chain.append(current)
    return chain


def _resolve(
    state: ReductionState,
    constraint: Constraint,
    preferred: Optional[sp.Symbol],
) -> None:
    constraint.constraint_class = ConstraintClass.SECOND
    if constraint.is_resolved:
        return
    restricted = state.surface.restrict(constraint.expr)
    if restricted == 0:
        state.warnings.append(f"{constraint.label} already vanishes on the surface; no variable eliminated")
        return
    variables = candidate_variables(restricted, preferred)
    solved = solve_for_any(restricted, variables)
    if solved is None:
        raise UnresolvableSecondClass(constraint.label)
    variable, solution, coeff = solved
    solution = state.surface.bind(variable, solution)
    constraint.resolution = Resolution(variable=variable, solution=solution, side_condition=coeff)
    if not coeff.is_Rational:
        state.side_conditions.extend(kernel.nonzero_factors(coeff))
    logger.debug(f"{state.picture.value}: resolved {constraint.label} for {variable} = {kernel.print_expression(solution)}")


def resolve_second_class(
    state: ReductionState,
    constraint: Constraint,
    preferred: Optional[sp.Symbol],
    root_rule: Optional[PivotRule] = None,
) -> List[str]:
    """
    Resolve a pivot constraint, then its ancestors from nearest to root.

    With a root_rule the generation-0 ancestor is solved for the variable
    the rule picks; other ancestors use the default v, p, q order.
    """
    resolved = [constraint.label]
    _resolve(state, constraint, preferred)
    for ancestor in ancestors(state, constraint):
        if ancestor.constraint_class == ConstraintClass.FIRST:
            continue
        ancestor_preferred = None
        if root_rule is not None and ancestor.generation == 0:
            ancestor_preferred = root_rule(ancestor, kernel.multiplier(ancestor.root))
        _resolve(state, ancestor, ancestor_preferred)
        resolved.append(ancestor.label)
    return resolved


def _numeric_vanishing(
    candidate: sp.Expr,
    trial: Surface,
    stuck: Sequence[Constraint],
    samples: int,
) -> bool:
    """Candidate vanishes at random points of every solution branch of the stuck constraints."""
    rng = random.Random(0)
    branches: List[Dict[sp.Symbol, sp.Expr]] = [{}]
    for constraint in stuck:
        restricted = trial.restrict(constraint.expr)
        roots = []
        for variable in candidate_variables(restricted):
            try:
                roots = sp.solve(restricted, variable, dict=False)
            except (NotImplementedError, ValueError):
                roots = []
            if roots:
                branches = [{**b, variable: r} for b in branches for r in roots]
                break
        if not roots:
            return False
    reduced = trial.restrict(candidate)
    for branch in branches:
        expr = sp.sympify(reduced).subs(list(branch.items()))
        symbols = expr.free_symbols
        for _ in range(samples):
            point = kernel.sample_point(symbols, rng, kernel.opaque_atoms(expr))
            try:
                value = kernel.evaluate(expr, point, settings.analyzer_numeric_digits)
            except ZeroDivisionInExpression:
                continue
            if not kernel.numerically_zero(value, tolerance=settings.analyzer_numeric_tolerance):
                return False
    return True


def reducibility_check(
    candidate: sp.Expr,
    state: ReductionState,
    extra: Sequence[Constraint] = (),
) -> bool:
    """
    True when the candidate vanishes on the surface extended by all
    unresolved constraints, or, when some of those cannot be eliminated
    affinely, vanishes numerically on their solution set.
    """
    restricted = state.surface.restrict(candidate)
    if restricted == 0:
        return True
    unresolved = [c for c in state.unresolved] + list(extra)
    trial, stuck = trial_surface(state.surface, unresolved)
    if trial.restrict(restricted) == 0:
        return True
    if not stuck:
        return False
    if _numeric_vanishing(restricted, trial, stuck, settings.analyzer_reducibility_samples):
        message = f"{PROBABLY_REDUCIBLE}: {kernel.print_expression(restricted)} (numeric check only)"
        logger.warning(message)
        state.warnings.append(message)
        return True
    return False


def _mark_first_class(state: ReductionState, parent: Constraint) -> None:
    for c in [parent] + ancestors(state, parent):
        if c.constraint_class == ConstraintClass.UNDECIDED:
            c.constraint_class = ConstraintClass.FIRST


def _next_label(state: ReductionState, root: int, generation: int) -> str:
    label = f"phi_{root}^({generation})"
    existing = {c.label for c in state.constraints}
    suffix = 0
    while label in existing:
        suffix += 1
        label = f"phi_{root}^({generation}.{suffix})"
    return label


def consistency_step(
    state: ReductionState,
    model: PhaseSpaceModel,
    pivot_rule: PivotRule,
    root_rule: Optional[PivotRule] = None,
) -> ReductionState:
    """One generation of the consistency iteration, shared by both pictures."""
    k = state.generation
    surface = state.surface
    pending = [state.constraint(label) for label in state.pending]
    field = state.evolution
    multipliers = field.undetermined_symbols

    dots = [surface.restrict(field.apply(c.expr)) for c in pending]
    gamma, base = consistency_matrix(dots, multipliers)
    cert = generic_rank(gamma)
    state.gamma, state.certificate = gamma, cert
    logger.info(f"{state.picture.value} generation {k}: {len(pending)} pending, rank gamma = {cert.rank}")

    determined = {
        m: surface.restrict(value)
        for m, value in determine_multipliers(gamma, cert, base, multipliers).items()
    }
    for m, value in determined.items():
        state.determined_accelerations[m.name] = value
        logger.debug(f"{state.picture.value}: {m} = {kernel.print_expression(value)}")

    step = GenerationStep(
        index=k,
        pending=list(state.pending),
        gamma=gamma,
        certificate=cert,
        determined={m.name: value for m, value in determined.items()},
        side_conditions=list(cert.side_conditions),
    )

    # Left null vectors of gamma combine the dots into multiplier-free candidates
    null_vectors = left_null_space_basis(gamma, cert)
    free_rows = [i for i in range(len(pending)) if i not in cert.pivot_rows]
    raw_candidates = []
    for vector, row in zip(null_vectors, free_rows):
        combination = kernel.normalize(sum((b * d for b, d in zip(vector, base)), sp.S.Zero))
        raw_candidates.append((pending[row], combination))

    second, _ = classify_generation(state)
    for t, label in enumerate(second):
        constraint = state.constraint(label)
        multiplier = multipliers[cert.pivot_cols[t]]
        if k == 0:
            preferred = pivot_rule(constraint, multiplier)
        else:
            preferred = kernel.v(kernel.coordinate_kind(multiplier)[1])
        step.second_class.extend(resolve_second_class(state, constraint, preferred, root_rule))

    field = field.substitute(determined) if determined else field
    state.evolution = field

    produced: List[Constraint] = []
    for parent, combination in raw_candidates:
        candidate = surface.restrict(combination)
        if reducibility_check(candidate, state):
            _mark_first_class(state, parent)
            step.reducible.append(parent.label)
            logger.debug(f"{state.picture.value}: consistency of {parent.label} is implied")
            continue
        stripped, conditions = kernel.primitive_constraint(candidate, model.vars.coordinates)
        label = _next_label(state, parent.root, k + 1)
        if stripped.is_number:
            raise InconsistentConstraints(label)
        new = Constraint(expr=stripped, generation=k + 1, label=label, parent=parent.label, root=parent.root)
        state.constraints.append(new)
        produced.append(new)
        step.side_conditions.extend(conditions)
        state.side_conditions.extend(conditions)
        logger.info(f"{state.picture.value}: new constraint {label} = {kernel.print_expression(stripped)}")

    step.produced = [c.label for c in produced]
    state.steps.append(step)
    state.pending = step.produced
    state.generation = k + 1
    return state


def lagrangian_pivot_rule(constraint: Constraint, multiplier: sp.Symbol) -> sp.Symbol:
    """Generation-0 second-class primaries keep v^a as coordinates and fix p_a."""
    return kernel.p(constraint.root)


def lagrangian_step(state: ReductionState, model: PhaseSpaceModel) -> ReductionState:
    return consistency_step(state, model, lagrangian_pivot_rule, root_rule=lagrangian_pivot_rule)


def final_field(state: ReductionState) -> VectorField:
    """Evolution field with every coefficient restricted to the final surface."""
    return VectorField(
        coefficients={name: state.surface.restrict(c) for name, c in state.evolution.coefficients.items()},
        undetermined=list(state.evolution.undetermined),
    )


def settle_accelerations(state: ReductionState) -> Dict[str, sp.Expr]:
    """
    Express every determined acceleration through the undetermined
    multipliers only, restricted to the final surface.

    A value recorded at generation k may still mention multipliers that a
    later generation determined; those are substituted latest first.
    """
    settled: Dict[sp.Symbol, sp.Expr] = {}
    for name in reversed(list(state.determined_accelerations)):
        value = kernel.substitute(state.determined_accelerations[name], settled)
        settled[sp.Symbol(name)] = state.surface.restrict(value)
    state.determined_accelerations = {
        name: settled[sp.Symbol(name)] for name in state.determined_accelerations
    }
    return state.determined_accelerations


def termination_mode(field: VectorField) -> Termination:
    return Termination.GAUGE_FREEDOM if field.undetermined else Termination.FULLY_DETERMINED


def run_iteration(
    state: ReductionState,
    model: PhaseSpaceModel,
    step: Callable[[ReductionState, PhaseSpaceModel], ReductionState],
    max_generations: int,
) -> ReductionState:
    """Apply step until no constraints are pending or the budget is spent."""
    for _ in range(max_generations):
        if not state.pending:
            return state
        state = step(state, model)
    if not state.pending:
        return state
    logger.warning(
        f"{state.picture.value} reduction still has pending constraints {state.pending} "
        f"after {max_generations} generation(s)"
    )
    raise GenerationBudgetExceeded(max_generations, state.picture.value)


def run_lagrangian(model: PhaseSpaceModel, max_generations: Optional[int] = None) -> LagrangianReduction:
    """Full Lagrangian-picture reduction."""
    max_generations = max_generations or settings.analyzer_max_generations
    state = run_iteration(initial_state(model), model, lagrangian_step, max_generations)
    settle_accelerations(state)
    field = final_field(state)
    termination = termination_mode(field)
    energy = state.surface.restrict(model.energy)
    logger.info(
        f"lagrangian: {termination.value} after {state.generation} generation(s), "
        f"undetermined {field.undetermined}"
    )
    return LagrangianReduction(
        model=model,
        state=state,
        termination=termination,
        field=field,
        energy=energy,
    )
