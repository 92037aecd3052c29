"""
Report formatting utilities.
Pure functions rendering report records as a human-readable narrative.
"""

from typing import Dict, List, Optional

from ..core.models import (
    ConstraintRecord,
    EquivalenceRecord,
    GenerationRecord,
    PictureRecord,
    Report,
    VerificationSummary,
)


def format_matrix(rows: List[List[str]]) -> str:
    """Format a printed matrix as [[a, b], [c, d]]."""
    if not rows:
        return "[]"
    return "[" + ", ".join("[" + ", ".join(row) + "]" for row in rows) + "]"


def format_mapping(mapping: Dict[str, str], separator: str = " = ") -> str:
    if not mapping:
        return "none"
    return ", ".join(f"{key}{separator}{value}" for key, value in mapping.items())


def format_constraint(constraint: ConstraintRecord) -> str:
    """Format one constraint line with class and resolution."""
    result = f"    {constraint.label} = {constraint.expr}  [{constraint.constraint_class}]"
    if constraint.resolution:
        result += f"  solved {constraint.resolution.variable} = {constraint.resolution.solution}"
        if constraint.resolution.side_condition != "1":
            result += f" (pivot {constraint.resolution.side_condition})"
    if constraint.parent:
        result += f"  from {constraint.parent}"
    return result


def format_generation(generation: GenerationRecord) -> str:
    lines = [f"  Generation {generation.index}:"]
    lines.extend(format_constraint(c) for c in generation.constraints)
    lines.append(f"    gamma = {format_matrix(generation.gamma)}, rank {generation.rank}")
    if generation.determined:
        lines.append(f"    determined: {format_mapping(generation.determined)}")
    if generation.side_conditions:
        lines.append(f"    assuming nonzero: {', '.join(generation.side_conditions)}")
    return "\n".join(lines)


def format_field(field: Dict[str, str]) -> str:
    """Evolution field as sum of coefficient * d/dx terms."""
    if not field:
        return "0"
    return " + ".join(f"({coeff}) d/d{name}" for name, coeff in field.items())


def format_picture(name: str, picture: PictureRecord) -> str:
    """Format one picture's reduction narrative."""
    lines = [f"{name.capitalize()} picture"]
    if picture.routh:
        lines.append(f"  h = {picture.routh.h}")
        lines.append(f"  h_T = {picture.routh.h_total}")
        if picture.routh.phi:
            lines.append(f"  primary first-stage constraints: {format_mapping(picture.routh.phi)}")
    else:
        lines.append(f"  E on final surface = {picture.energy}")
    for generation in picture.generations:
        lines.append(format_generation(generation))
    lines.append(f"  termination: {picture.termination}")
    lines.append(f"  evolution: {format_field(picture.evolution_field)}")
    lines.append(f"  determined velocities: {format_mapping(picture.determined.velocities)}")
    lines.append(f"  determined accelerations: {format_mapping(picture.determined.accelerations)}")
    lines.append(f"  first class: {', '.join(picture.first_class) or 'none'}")
    lines.append(f"  second class: {', '.join(picture.second_class) or 'none'}")
    if picture.undetermined:
        lines.append(f"  undetermined: {', '.join(picture.undetermined)}")
    if picture.brackets and picture.brackets.stages:
        for stage in picture.brackets.stages:
            lines.append(
                f"  Dirac stage {stage.index}: chi = {', '.join(stage.labels)}, "
                f"C^-1 = {format_matrix(stage.inverse)}"
            )
        if not picture.brackets.staged_agrees:
            lines.append("  staged bracket differs from the general Dirac bracket")
    if picture.two_form:
        lines.append(f"  two-form: Gamma = {format_matrix(picture.two_form.gamma)}, M = {format_matrix(picture.two_form.m)}")
        lines.append(f"  evolution matches Lagrangian bracket: {'yes' if picture.two_form.evolution_agrees else 'no'}")
    return "\n".join(lines)


def format_equivalence(equivalence: Optional[EquivalenceRecord]) -> str:
    if equivalence is None:
        return ""
    lines = [f"Cross-check: {'matched' if equivalence.matched else 'FAILED'}"]
    lines.extend(f"  {v}" for v in equivalence.variables)
    for entry in equivalence.map:
        lines.append(f"  {entry.label}: {entry.lagrangian} <-> {entry.hamiltonian}")
    return "\n".join(lines)


def format_verification(summary: VerificationSummary) -> str:
    if not summary.samples:
        return "Verification: skipped"
    status = "passed" if summary.passed else "FAILED"
    result = f"Verification: {status}, {summary.samples} samples, max residual {summary.max_residual}"
    if summary.checks:
        result += f" ({format_mapping(summary.checks, ': ')})"
    return result


def format_report(report: Report) -> str:
    """Format a full report as text."""
    lines = [f"System {report.system} (N = {report.dim})", f"  l = {report.lagrangian}"]
    if report.parameters:
        lines.append("  parameters: " + format_mapping(
            {k: v if v is not None else "symbolic" for k, v in report.parameters.items()}
        ))
    if report.side_conditions:
        lines.append(f"  side conditions (nonzero): {', '.join(report.side_conditions)}")
    for name, picture in report.pictures.items():
        lines.append("")
        lines.append(format_picture(name, picture))
    equivalence = format_equivalence(report.equivalence)
    if equivalence:
        lines.extend(["", equivalence])
    lines.extend(["", format_verification(report.verification)])
    for warning in report.warnings:
        lines.append(f"warning: {warning}")
    return "\n".join(lines) + "\n"
