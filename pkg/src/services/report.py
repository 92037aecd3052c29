"""
Report assembly and rendering.

Reductions carry sympy values; the report is a plain pydantic tree of
strings so that the JSON output is deterministic and round-trips.
"""

import json
from typing import Dict, List, Optional

import sympy as sp

from ..core import kernel
from ..core.models import (
    BracketRecord,
    BracketStageRecord,
    ConstraintClass,
    ConstraintRecord,
    DeterminedRecord,
    EquivalenceRecord,
    GenerationRecord,
    HamiltonianReduction,
    LagrangianReduction,
    LagrangianSpec,
    OutputFormat,
    PictureRecord,
    ReductionState,
    Report,
    ResolutionRecord,
    RouthRecord,
    TwoFormRecord,
    VerificationSummary,
)
from ..utils.formatting import format_report
from .phasespace import field_matches_lagrangian_bracket, lagrangian_two_form

show = kernel.print_expression


def constraint_record(constraint) -> ConstraintRecord:
    resolution = None
    if constraint.resolution is not None:
        resolution = ResolutionRecord(
            variable=show(constraint.resolution.variable),
            solution=show(constraint.resolution.solution),
            side_condition=show(constraint.resolution.side_condition),
        )
    return ConstraintRecord(
        label=constraint.label,
        expr=show(constraint.expr),
        constraint_class=constraint.constraint_class.value,
        resolution=resolution,
        parent=constraint.parent,
    )


def generation_records(state: ReductionState) -> List[GenerationRecord]:
    records = []
    for step in state.steps:
        records.append(GenerationRecord(
            index=step.index,
            constraints=[constraint_record(c) for c in state.constraints if c.generation == step.index],
            gamma=step.gamma.printed(),
            rank=step.certificate.rank,
            pivots=[[r, c] for r, c in zip(step.certificate.pivot_rows, step.certificate.pivot_cols)],
            determined={name: show(value) for name, value in step.determined.items()},
            side_conditions=[show(c) for c in step.side_conditions],
        ))
    return records


def determined_record(state: ReductionState) -> DeterminedRecord:
    velocities = {}
    for variable, value in state.surface.items():
        kind = kernel.coordinate_kind(variable)
        if kind and kind[0] == "v":
            velocities[variable.name] = show(value)
    return DeterminedRecord(
        velocities=dict(sorted(velocities.items())),
        accelerations={name: show(value) for name, value in sorted(state.determined_accelerations.items())},
    )


def free_field(reduction) -> Dict[str, str]:
    """Final field on the free coordinates of the surface, zero coefficients omitted."""
    surface = reduction.state.surface
    field = {}
    for name, coeff in reduction.field.coefficients.items():
        if sp.Symbol(name) in surface or coeff == 0:
            continue
        field[name] = show(coeff)
    return field


def _picture_record(reduction, energy: str) -> PictureRecord:
    state = reduction.state
    return PictureRecord(
        generations=generation_records(state),
        determined=determined_record(state),
        termination=reduction.termination.value,
        evolution_field=free_field(reduction),
        first_class=state.labels(ConstraintClass.FIRST),
        second_class=state.labels(ConstraintClass.SECOND),
        undetermined=list(reduction.field.undetermined),
        energy=energy,
    )


def lagrangian_record(lag: LagrangianReduction) -> PictureRecord:
    record = _picture_record(lag, show(lag.energy))
    if not lag.model.is_degenerate:
        gamma, m = lagrangian_two_form(lag.model)
        record.two_form = TwoFormRecord(
            gamma=gamma.printed(),
            m=m.printed(),
            evolution_agrees=field_matches_lagrangian_bracket(lag.model, lag.state.determined_accelerations),
        )
    return record


def hamiltonian_record(ham: HamiltonianReduction) -> PictureRecord:
    record = _picture_record(ham, show(ham.routh.h))
    record.routh = RouthRecord(
        h=show(ham.routh.h),
        psi={str(index): show(value) for index, value in sorted(ham.routh.psi.items())},
        phi={c.label: show(c.expr) for _, c in sorted(ham.routh.phi.items())},
        h_total=show(ham.routh.h_total),
    )
    record.brackets = BracketRecord(
        stages=[
            BracketStageRecord(
                index=stage.index,
                labels=list(stage.labels),
                matrix=stage.matrix.printed(),
                inverse=stage.inverse.printed(),
            )
            for stage in ham.table.stages
        ],
        staged_agrees=ham.staged_agrees,
    )
    return record


def build_report(
    spec: LagrangianSpec,
    lag: Optional[LagrangianReduction] = None,
    ham: Optional[HamiltonianReduction] = None,
    equivalence: Optional[EquivalenceRecord] = None,
    verification: Optional[VerificationSummary] = None,
) -> Report:
    pictures: Dict[str, PictureRecord] = {}
    side_conditions: List[sp.Expr] = []
    warnings: List[str] = []
    if lag is not None:
        pictures["lagrangian"] = lagrangian_record(lag)
        side_conditions.extend(lag.state.side_conditions)
        warnings.extend(lag.state.warnings)
    if ham is not None:
        pictures["hamiltonian"] = hamiltonian_record(ham)
        side_conditions.extend(ham.state.side_conditions)
        warnings.extend(ham.state.warnings)

    printed_conditions = list(dict.fromkeys(show(kernel.canonical_sign(c)) for c in side_conditions))
    return Report(
        system=spec.name,
        dim=spec.dim,
        lagrangian=show(spec.lagrangian),
        parameters={
            name: None if spec.parameter_values.get(name) is None else show(spec.parameter_values[name])
            for name in spec.vars.parameters
        },
        functions=list(spec.vars.functions),
        side_conditions=printed_conditions,
        pictures=pictures,
        equivalence=equivalence,
        verification=verification or VerificationSummary(),
        warnings=warnings,
    )


def report_to_dict(report: Report) -> dict:
    return report.model_dump(mode="json", by_alias=True)


def render_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_report(report: Report, output_format: OutputFormat = OutputFormat.TEXT) -> bytes:
    """Report as UTF-8 text or JSON."""
    if OutputFormat(output_format) == OutputFormat.JSON:
        return render_json(report_to_dict(report)).encode("utf-8")
    return format_report(report).encode("utf-8")


def render_reports(reports: List[Report], output_format: OutputFormat = OutputFormat.TEXT) -> bytes:
    """One report renders as itself; several as a JSON list or consecutive text blocks."""
    if len(reports) == 1:
        return render_report(reports[0], output_format)
    if OutputFormat(output_format) == OutputFormat.JSON:
        return render_json([report_to_dict(r) for r in reports]).encode("utf-8")
    return "\n".join(format_report(r) for r in reports).encode("utf-8")
