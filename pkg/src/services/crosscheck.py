"""Correspondence between the Lagrangian and Hamiltonian reductions of one system."""

from typing import Dict, List

import sympy as sp

from ..core import kernel
from ..core.exceptions import EquivalenceFailure
from ..core.models import (
    Constraint,
    CorrespondenceRecord,
    EquivalenceRecord,
    HamiltonianReduction,
    LagrangianReduction,
    ReductionState,
)
from ..utils.logger import get_logger
from .surface import Surface, trial_surface

logger = get_logger(__name__)


def generation_zero_map(state: ReductionState) -> Dict[sp.Symbol, sp.Expr]:
    """Variables fixed by the resolved primaries: p_a in one picture, v^a in the other."""
    return {
        c.resolution.variable: state.surface.restrict(c.resolution.variable)
        for c in state.constraints
        if c.generation == 0 and c.is_resolved
    }


def _full_surface(state: ReductionState) -> Surface:
    trial, _ = trial_surface(state.surface, state.unresolved)
    return trial


def _vanishes_on(constraint: Constraint, surface: Surface) -> bool:
    return surface.restrict(constraint.expr) == 0


def cross_check(lag: LagrangianReduction, ham: HamiltonianReduction) -> EquivalenceRecord:
    """
    Match constraints by label and check that each vanishes on the other
    picture's final surface, which contains the other picture's variable map.
    """
    lag_state, ham_state = lag.state, ham.state
    lag_labels = [c.label for c in lag_state.constraints]
    ham_labels = [c.label for c in ham_state.constraints]

    variables: List[str] = []
    for picture, state in (("lagrangian", lag_state), ("hamiltonian", ham_state)):
        for variable, value in generation_zero_map(state).items():
            variables.append(f"{picture}: {variable} = {kernel.print_expression(value)}")

    for label in lag_labels:
        if label not in ham_labels:
            raise EquivalenceFailure(label, "no Hamiltonian counterpart")
    for label in ham_labels:
        if label not in lag_labels:
            raise EquivalenceFailure(label, "no Lagrangian counterpart")

    lag_surface = _full_surface(lag_state)
    ham_surface = _full_surface(ham_state)
    records = []
    for label in lag_labels:
        lag_constraint = lag_state.constraint(label)
        ham_constraint = ham_state.constraint(label)
        if not _vanishes_on(lag_constraint, ham_surface):
            raise EquivalenceFailure(label, "Lagrangian constraint does not vanish on the Hamiltonian surface")
        if not _vanishes_on(ham_constraint, lag_surface):
            raise EquivalenceFailure(label, "Hamiltonian constraint does not vanish on the Lagrangian surface")
        records.append(CorrespondenceRecord(
            label=label,
            lagrangian=kernel.print_expression(lag_constraint.expr),
            hamiltonian=kernel.print_expression(ham_constraint.expr),
            matched=True,
        ))
        logger.debug(f"cross-check: {label} matched")

    termination_agrees = lag.termination == ham.termination
    undetermined_agrees = len(lag.field.undetermined) == len(ham.field.undetermined)
    if not termination_agrees:
        raise EquivalenceFailure(
            "termination",
            f"lagrangian {lag.termination.value} vs hamiltonian {ham.termination.value}",
        )
    if not undetermined_agrees:
        raise EquivalenceFailure(
            "undetermined",
            f"{len(lag.field.undetermined)} vs {len(ham.field.undetermined)} free accelerations",
        )

    logger.info(f"cross-check: {len(records)} constraint(s) matched")
    return EquivalenceRecord(
        map=records,
        variables=variables,
        matched=True,
        termination_agrees=termination_agrees,
        undetermined_agrees=undetermined_agrees,
    )
