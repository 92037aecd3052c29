"""
The system on W = TQ + T*Q in local coordinates (q, v, p).

Builds the energy, the velocity Hessian and the primary constraints, and
provides the evolution field, the Poisson bracket and the regular-case
Lagrangian two-form and bracket.
"""

from typing import Dict, List, Tuple

import sympy as sp

from ..core import kernel
from ..core.exceptions import AnalysisError, DegenerateLagrangian
from ..core.linalg import generic_rank, invert_submatrix
from ..core.models import (
    Constraint,
    LagrangianSpec,
    PhaseSpaceModel,
    SymMatrix,
    VectorField,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)


def build_model(spec: LagrangianSpec) -> PhaseSpaceModel:
    """Energy, Hessian with rank certificate and primary constraints."""
    vars = spec.vars
    lagrangian = spec.lagrangian
    energy = kernel.normalize(sum((p * v for p, v in zip(vars.p, vars.v)), sp.S.Zero) - lagrangian)
    hessian = SymMatrix.from_rows([
        [kernel.differentiate(kernel.differentiate(lagrangian, vi), vj) for vj in vars.v]
        for vi in vars.v
    ])
    certificate = generic_rank(hessian)
    model = PhaseSpaceModel(
        spec=spec,
        energy=energy,
        hessian=hessian,
        hessian_cert=certificate,
        primary=[],
    )
    model.primary = primary_constraints(model)
    logger.info(
        f"Model '{spec.name}': N={spec.dim}, rank Gamma={certificate.rank}, "
        f"E={kernel.print_expression(energy)}"
    )
    return model


def primary_constraints(model: PhaseSpaceModel) -> List[Constraint]:
    """phi_i = p_i - dl/dv_i, cross-checked against the vertical differential of E."""
    vars = model.vars
    vertical = vertical_differential(model, model.energy)
    constraints = []
    for i, (p, v) in enumerate(zip(vars.p, vars.v), 1):
        phi = kernel.normalize(p - kernel.differentiate(model.spec.lagrangian, v))
        if not kernel.is_zero(phi - vertical[v.name]):
            raise AnalysisError(f"Primary constraint phi_{i} disagrees with dE(d/dv{i})")
        constraints.append(Constraint(expr=phi, generation=0, label=f"phi_{i}", root=i))
    return constraints


def vertical_differential(model: PhaseSpaceModel, f: sp.Expr) -> Dict[str, sp.Expr]:
    """Components of the leafwise differential along the v-directions."""
    return {v.name: kernel.differentiate(f, v) for v in model.vars.v}


def evolution_field(model: PhaseSpaceModel) -> VectorField:
    """Y + K: q_i -> v_i, p_i -> dl/dq_i, v_i -> vdot_i (undetermined)."""
    vars = model.vars
    coefficients: Dict[str, sp.Expr] = {}
    for q, v in zip(vars.q, vars.v):
        coefficients[q.name] = v
    for v, m in zip(vars.v, vars.multipliers):
        coefficients[v.name] = m
    for q, p in zip(vars.q, vars.p):
        coefficients[p.name] = kernel.differentiate(model.spec.lagrangian, q)
    return VectorField(coefficients=coefficients, undetermined=[m.name for m in vars.multipliers])


def poisson_bracket(f: sp.Expr, g: sp.Expr, dim: int) -> sp.Expr:
    """{f, g} = sum_i (df/dp_i dg/dq_i - df/dq_i dg/dp_i), so that f' = {E, f}."""
    total = sp.S.Zero
    for i in range(1, dim + 1):
        q, p = kernel.q(i), kernel.p(i)
        total += sp.diff(f, p) * sp.diff(g, q) - sp.diff(f, q) * sp.diff(g, p)
    return kernel.normalize(total)


def lagrangian_two_form(model: PhaseSpaceModel) -> Tuple[SymMatrix, SymMatrix]:
    """(Gamma, M) with M_ij = d2l/dq_i dv_j - d2l/dv_i dq_j."""
    vars = model.vars
    lagrangian = model.spec.lagrangian
    m = SymMatrix.from_rows([
        [
            kernel.normalize(
                sp.diff(lagrangian, qi, vj) - sp.diff(lagrangian, vi, qj)
            )
            for qj, vj in zip(vars.q, vars.v)
        ]
        for qi, vi in zip(vars.q, vars.v)
    ])
    return model.hessian, m


def lagrangian_bracket(model: PhaseSpaceModel, f: sp.Expr, g: sp.Expr) -> sp.Expr:
    """
    Bracket of the regular case:

        {f,g}_L = G^ij (df/dv_i dg/dq_j - df/dq_j dg/dv_i) - M^ij df/dv_i dg/dv_j

    with G^ij the inverse Hessian and M^ij = G^ik M_kl G^lj.
    """
    n = model.spec.dim
    if model.is_degenerate:
        raise DegenerateLagrangian(model.hessian_cert.rank, n)
    gamma, m = lagrangian_two_form(model)
    inverse = invert_submatrix(gamma, list(range(n)), list(range(n)))
    raised = [
        [
            kernel.normalize(sum(
                (inverse[i, k] * m[k, l] * inverse[l, j] for k in range(n) for l in range(n)),
                sp.S.Zero,
            ))
            for j in range(n)
        ]
        for i in range(n)
    ]
    vars = model.vars
    total = sp.S.Zero
    for i in range(n):
        dfv = sp.diff(f, vars.v[i])
        dgv = sp.diff(g, vars.v[i])
        for j in range(n):
            total += inverse[i, j] * (dfv * sp.diff(g, vars.q[j]) - sp.diff(f, vars.q[j]) * dgv)
            total -= raised[i][j] * dfv * sp.diff(g, vars.v[j])
    return kernel.normalize(total)


def field_matches_lagrangian_bracket(model: PhaseSpaceModel, accelerations: Dict[str, sp.Expr]) -> bool:
    """Regular case: the evolution of q and v equals {E_TQ, f}_L, E_TQ = v dl/dv - l."""
    vars = model.vars
    lagrangian = model.spec.lagrangian
    energy_tq = kernel.normalize(
        sum((v * sp.diff(lagrangian, v) for v in vars.v), sp.S.Zero) - lagrangian
    )
    for q, v in zip(vars.q, vars.v):
        if not kernel.is_zero(lagrangian_bracket(model, energy_tq, q) - v):
            return False
    for v, m in zip(vars.v, vars.multipliers):
        acceleration = accelerations.get(m.name)
        if acceleration is None:
            return False
        if not kernel.is_zero(lagrangian_bracket(model, energy_tq, v) - acceleration):
            return False
    return True


def hessian_identity_holds(model: PhaseSpaceModel) -> bool:
    """Y_i phi_j = -Gamma_ij for every pair of primary constraints."""
    vars = model.vars
    for i, v in enumerate(vars.v):
        for j, phi in enumerate(model.primary):
            if not kernel.is_zero(sp.diff(phi.expr, v) + model.hessian[i, j]):
                return False
    return True
