"""
Hamiltonian-picture constraint algorithm.

Routh reduction eliminates the velocities v^a fixed by the second-class
primaries, leaving the total Hamiltonian h_T = h + v^mu phi_mu on M1. The
evolution of q and p is generated by h_T through the current bracket
table, which is upgraded to a Dirac bracket whenever velocity-free
second-class constraints are identified.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import sympy as sp

from ..config import settings
from ..core import kernel
from ..core.exceptions import (
    NonlinearRouth,
    NotAffine,
    SingularConstraintMatrix,
    SingularSubmatrix,
    UnresolvableSecondClass,
    ZeroCoefficient,
)
from ..core.linalg import generic_rank, invert_submatrix
from ..core.models import (
    BracketStage,
    Constraint,
    ConstraintClass,
    HamiltonianReduction,
    PhaseSpaceModel,
    Picture,
    ReductionState,
    Resolution,
    RouthData,
    SymMatrix,
    VectorField,
)
from ..utils.logger import get_logger
from .lagreduce import consistency_step, final_field, run_iteration, settle_accelerations, termination_mode
from .phasespace import poisson_bracket
from .surface import Surface

logger = get_logger(__name__)

STAGED_MISMATCH = "staged bracket variant differs"


class BracketTable:
    """
    Dirac bracket with respect to a set of second-class constraints chi:

        {f,g}* = {f,g} - {f,chi_A} (C^-1)^AB {chi_B,g},  C_AB = {chi_A, chi_B}

    The staged variant corrects the previous stage's bracket with only the
    constraints added at each stage.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.labels: List[str] = []
        self.chi: List[sp.Expr] = []
        self.matrix = SymMatrix(rows=0, cols=0)
        self.inverse = SymMatrix(rows=0, cols=0)
        self.stages: List[BracketStage] = []
        self._stage_chi: List[List[sp.Expr]] = []

    @property
    def stage_index(self) -> int:
        return len(self.stages)

    def poisson(self, f: sp.Expr, g: sp.Expr) -> sp.Expr:
        return poisson_bracket(f, g, self.dim)

    def bracket(self, f: sp.Expr, g: sp.Expr) -> sp.Expr:
        result = self.poisson(f, g)
        if not self.chi:
            return result
        left = [self.poisson(f, c) for c in self.chi]
        right = [self.poisson(c, g) for c in self.chi]
        correction = sp.S.Zero
        for a, la in enumerate(left):
            if la == 0:
                continue
            for b, rb in enumerate(right):
                correction += la * self.inverse[a, b] * rb
        return kernel.normalize(result - correction)

    def staged_bracket(self, f: sp.Expr, g: sp.Expr, level: Optional[int] = None) -> sp.Expr:
        level = self.stage_index if level is None else level
        if level == 0:
            return self.poisson(f, g)
        chi = self._stage_chi[level - 1]
        inverse = self.stages[level - 1].inverse
        previous = self.staged_bracket(f, g, level - 1)
        left = [self.staged_bracket(f, c, level - 1) for c in chi]
        right = [self.staged_bracket(c, g, level - 1) for c in chi]
        correction = sum(
            (left[a] * inverse[a, b] * right[b] for a in range(len(chi)) for b in range(len(chi))),
            sp.S.Zero,
        )
        return kernel.normalize(previous - correction)


def _checked_inverse(matrix: SymMatrix, labels: List[str], surface: Optional[Surface]) -> SymMatrix:
    size = matrix.rows
    if surface is not None:
        restricted = SymMatrix.from_rows(
            [[surface.restrict(e) for e in row] for row in matrix.to_rows()], cols=size
        )
        if generic_rank(restricted).rank < size:
            raise SingularConstraintMatrix(labels)
    try:
        return invert_submatrix(matrix, list(range(size)), list(range(size)))
    except SingularSubmatrix as exc:
        raise SingularConstraintMatrix(labels) from exc


def dirac_bracket(
    table: BracketTable,
    chi: Sequence[Constraint],
    surface: Optional[Surface] = None,
) -> BracketTable:
    """New table over the previous second-class set plus chi."""
    if not chi:
        return table
    new_labels = [c.label for c in chi]
    new_exprs = [c.expr for c in chi]

    upgraded = BracketTable(table.dim)
    upgraded.labels = table.labels + new_labels
    upgraded.chi = table.chi + new_exprs
    size = len(upgraded.chi)
    upgraded.matrix = SymMatrix.from_rows(
        [[upgraded.poisson(a, b) for b in upgraded.chi] for a in upgraded.chi], cols=size
    )
    upgraded.inverse = _checked_inverse(upgraded.matrix, upgraded.labels, surface)

    stage_matrix = SymMatrix.from_rows(
        [[table.staged_bracket(a, b) for b in new_exprs] for a in new_exprs], cols=len(new_exprs)
    )
    stage_inverse = _checked_inverse(stage_matrix, new_labels, surface)
    upgraded.stages = table.stages + [
        BracketStage(index=table.stage_index + 1, labels=new_labels, matrix=stage_matrix, inverse=stage_inverse)
    ]
    upgraded._stage_chi = table._stage_chi + [new_exprs]
    logger.info(f"Dirac bracket stage {table.stage_index + 1}: chi = {new_labels}")
    return upgraded


# Routh reduction

def routh_reduction(model: PhaseSpaceModel, surface: Surface) -> Tuple[RouthData, List[Constraint]]:
    """
    Solve the second-class primaries for v^a and build h, psi_mu, phi_mu, h_T.

    Binds v^a on the given surface and returns the Routh data together with
    the Hamiltonian constraint list (resolved primaries plus phi_mu).
    """
    vars = model.vars
    cert = model.hessian_cert
    constraints: List[Constraint] = []
    velocities: Dict[str, sp.Expr] = {}

    for row, col in zip(cert.pivot_rows, cert.pivot_cols):
        primary = model.primary[row].model_copy()
        velocity = vars.v[col]
        restricted = surface.restrict(primary.expr)
        try:
            solution, coeff = kernel.solve_linear(restricted, velocity)
        except (NotAffine, ZeroCoefficient) as exc:
            raise UnresolvableSecondClass(primary.label) from exc
        solution = surface.bind(velocity, solution)
        primary.constraint_class = ConstraintClass.SECOND
        primary.resolution = Resolution(variable=velocity, solution=solution, side_condition=coeff)
        constraints.append(primary)
        velocities[velocity.name] = solution

    for name in list(velocities):
        velocities[name] = surface.restrict(sp.Symbol(name))

    eliminated = [vars.v[c] for c in cert.pivot_cols]
    momenta = [vars.p[c] for c in cert.pivot_cols]
    routh_function = surface.restrict(
        model.spec.lagrangian - sum((p * v for p, v in zip(momenta, eliminated)), sp.S.Zero)
    )

    free_cols = [c for c in range(model.spec.dim) if c not in cert.pivot_cols]
    free_velocities = [vars.v[c] for c in free_cols]
    for a in free_velocities:
        for b in free_velocities:
            if not kernel.is_zero(sp.diff(routh_function, a, b)):
                raise NonlinearRouth()

    h = kernel.normalize(-kernel.substitute(routh_function, {v: sp.S.Zero for v in free_velocities}))
    psi: Dict[int, sp.Expr] = {}
    phi: Dict[int, Constraint] = {}
    h_total = h
    for c, velocity in zip(free_cols, free_velocities):
        index = c + 1
        psi[index] = kernel.differentiate(routh_function, velocity)
        phi[index] = Constraint(
            expr=kernel.normalize(vars.p[c] - psi[index]),
            generation=0,
            label=f"phi_{index}",
            root=index,
        )
        h_total += velocity * phi[index].expr
        constraints.append(phi[index])

    constraints.sort(key=lambda c: c.root)
    routh = RouthData(h=h, psi=psi, phi=phi, h_total=kernel.normalize(h_total), velocities=velocities)
    logger.info(f"Routh reduction: h = {kernel.print_expression(h)}, mu = {list(phi)}")
    return routh, constraints


# Evolution

def hamiltonian_field(model: PhaseSpaceModel, state: ReductionState) -> VectorField:
    """q, p coefficients from h_T through the current bracket; v^mu -> vdot^mu."""
    vars = model.vars
    table: BracketTable = state.table
    h_total = state.routh.h_total
    eliminated = set(state.routh.velocities)
    coefficients: Dict[str, sp.Expr] = {}
    for q in vars.q:
        coefficients[q.name] = state.surface.restrict(table.bracket(h_total, q))
    for v, m in zip(vars.v, vars.multipliers):
        if v.name in eliminated:
            continue
        coefficients[v.name] = state.determined_accelerations.get(m.name, m)
    for p in vars.p:
        coefficients[p.name] = state.surface.restrict(table.bracket(h_total, p))
    return VectorField(coefficients=coefficients, undetermined=list(state.evolution.undetermined))


def hamiltonian_pivot_rule(constraint: Constraint, multiplier: sp.Symbol) -> sp.Symbol:
    return kernel.v(kernel.coordinate_kind(multiplier)[1])


def hamiltonian_step(state: ReductionState, model: PhaseSpaceModel) -> ReductionState:
    """Consistency generation, then velocity bookkeeping and bracket upgrade."""
    velocity_symbols = set(model.vars.v)
    state = consistency_step(state, model, hamiltonian_pivot_rule)
    step = state.steps[-1]

    chi = []
    for label in step.second_class:
        constraint = state.constraint(label)
        resolution = constraint.resolution
        if resolution is not None and resolution.variable in velocity_symbols:
            state.determined_velocities[resolution.variable.name] = resolution.solution
        if not kernel.depends_on(constraint.expr, model.vars.v):
            chi.append(constraint)

    for name in list(state.determined_velocities):
        state.determined_velocities[name] = state.surface.restrict(sp.Symbol(name))

    state.table = dirac_bracket(state.table, chi, state.surface)
    state.evolution = hamiltonian_field(model, state)
    return state


def _initial_state(model: PhaseSpaceModel) -> ReductionState:
    surface = Surface()
    routh, constraints = routh_reduction(model, surface)
    free_multipliers = [
        m.name for v, m in zip(model.vars.v, model.vars.multipliers) if v.name not in routh.velocities
    ]
    side_conditions = list(model.hessian_cert.side_conditions)
    for c in constraints:
        if c.resolution is not None and not c.resolution.side_condition.is_Rational:
            side_conditions.extend(kernel.nonzero_factors(c.resolution.side_condition))
    state = ReductionState(
        picture=Picture.HAMILTONIAN,
        surface=surface,
        constraints=constraints,
        pending=[c.label for c in routh.phi.values()],
        evolution=VectorField(undetermined=free_multipliers),
        side_conditions=side_conditions,
        routh=routh,
        table=BracketTable(model.spec.dim),
    )
    state.evolution = hamiltonian_field(model, state)
    return state


def eliminated_accelerations(state: ReductionState, field: VectorField) -> Dict[str, sp.Expr]:
    """Accelerations of velocities fixed on the surface: the field applied to their solved value."""
    accelerations = {}
    for variable, value in state.surface.items():
        kind = kernel.coordinate_kind(variable)
        if kind is None or kind[0] != "v":
            continue
        name = kernel.multiplier(kind[1]).name
        if name in state.determined_accelerations:
            continue
        accelerations[name] = state.surface.restrict(field.apply(value))
    return accelerations


def staged_agreement(table: BracketTable, surface: Surface, dim: int) -> bool:
    """The general and staged Dirac brackets agree on all coordinate pairs of the surface."""
    if not table.stages:
        return True
    coordinates = [kernel.q(i) for i in range(1, dim + 1)] + [kernel.p(i) for i in range(1, dim + 1)]
    for i, f in enumerate(coordinates):
        for g in coordinates[i + 1:]:
            difference = surface.restrict(table.bracket(f, g) - table.staged_bracket(f, g))
            if difference != 0:
                return False
    return True


def run_hamiltonian(model: PhaseSpaceModel, max_generations: Optional[int] = None) -> HamiltonianReduction:
    """Full Hamiltonian-picture reduction."""
    max_generations = max_generations or settings.analyzer_max_generations
    state = run_iteration(_initial_state(model), model, hamiltonian_step, max_generations)
    field = final_field(state)
    for name, value in eliminated_accelerations(state, field).items():
        state.determined_accelerations[name] = value
        field.coefficients[kernel.v(int(name[len("vdot"):])).name] = value
    settle_accelerations(state)
    termination = termination_mode(field)

    agrees = staged_agreement(state.table, state.surface, model.spec.dim)
    if not agrees:
        logger.warning(STAGED_MISMATCH)
        state.warnings.append(STAGED_MISMATCH)

    logger.info(
        f"hamiltonian: {termination.value} after {state.generation} generation(s), "
        f"undetermined {field.undetermined}"
    )
    return HamiltonianReduction(
        model=model,
        state=state,
        termination=termination,
        field=field,
        routh=state.routh,
        table=state.table,
        staged_agrees=agrees,
    )
