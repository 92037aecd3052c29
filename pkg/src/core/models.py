"""
Pydantic models for the constraint analyzer.
Domain values carry sympy expressions; report models carry only JSON-able fields.
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import sympy as sp
from pydantic import BaseModel, Field, field_validator, model_validator

from . import kernel
from .exceptions import InputError


# Enumerations
class Picture(str, Enum):
    LAGRANGIAN = "lagrangian"
    HAMILTONIAN = "hamiltonian"
    BOTH = "both"


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"


class ConstraintClass(str, Enum):
    SECOND = "second"
    FIRST = "first"
    UNDECIDED = "undecided"


class Termination(str, Enum):
    FULLY_DETERMINED = "FullyDetermined"
    GAUGE_FREEDOM = "GaugeFreedom"


class SymbolicModel(BaseModel):
    """Base model for entities holding sympy values."""

    class Config:
        arbitrary_types_allowed = True


# Variables and input
class VarTable(SymbolicModel):
    """Declared names of one system: dimension, parameters, opaque functions."""
    dim: int = Field(ge=1, description="Configuration space dimension N")
    parameters: List[str] = Field(default_factory=list, description="Parameter names")
    functions: List[str] = Field(default_factory=list, description="Opaque unary function names")

    @model_validator(mode="after")
    def check_names(self):
        seen = set()
        for name in self.parameters + self.functions:
            if not kernel.IDENTIFIER_PATTERN.match(name):
                raise InputError(f"Invalid identifier '{name}'", field=name)
            if kernel.is_reserved_name(name):
                raise InputError(f"Name '{name}' is reserved", field=name)
            if name in seen:
                raise InputError(f"Name '{name}' is declared twice", field=name)
            seen.add(name)
        return self

    @property
    def q(self) -> List[sp.Symbol]:
        return [kernel.q(i) for i in range(1, self.dim + 1)]

    @property
    def v(self) -> List[sp.Symbol]:
        return [kernel.v(i) for i in range(1, self.dim + 1)]

    @property
    def p(self) -> List[sp.Symbol]:
        return [kernel.p(i) for i in range(1, self.dim + 1)]

    @property
    def multipliers(self) -> List[sp.Symbol]:
        return [kernel.multiplier(i) for i in range(1, self.dim + 1)]

    @property
    def coordinates(self) -> List[sp.Symbol]:
        """Coordinates of W in the order q, v, p."""
        return self.q + self.v + self.p

    @property
    def parameter_symbols(self) -> List[sp.Symbol]:
        return [sp.Symbol(name) for name in self.parameters]

    def lookup(self, name: str) -> Optional[sp.Symbol]:
        """Symbol for a declared variable or parameter name."""
        kind = kernel.COORDINATE_PATTERN.match(name)
        if kind:
            index = int(kind.group(2))
            return sp.Symbol(name) if 1 <= index <= self.dim else None
        if name in self.parameters:
            return sp.Symbol(name)
        return None


class LagrangianSpec(SymbolicModel):
    """A Lagrangian on TQ with its declarations and parameter assignments."""
    name: str
    vars: VarTable
    lagrangian: Any = Field(description="Lagrangian with assigned parameters substituted")
    parameter_values: Dict[str, Optional[Any]] = Field(default_factory=dict)
    source: Optional[str] = None

    @model_validator(mode="after")
    def check_lagrangian(self):
        allowed = set(self.vars.q + self.vars.v + self.vars.parameter_symbols)
        stray = sorted(s.name for s in sp.sympify(self.lagrangian).free_symbols - allowed)
        if stray:
            raise InputError(f"Lagrangian may depend on q, v and parameters only; found {', '.join(stray)}",
                             field="lagrangian")
        return self

    @property
    def dim(self) -> int:
        return self.vars.dim

    @property
    def free_parameters(self) -> List[sp.Symbol]:
        return [sp.Symbol(n) for n in self.vars.parameters if self.parameter_values.get(n) is None]


class AnalysisRequest(SymbolicModel):
    spec: LagrangianSpec
    picture: Picture = Picture.BOTH
    max_generations: int = Field(8, ge=1)
    verify_samples: int = Field(32, ge=0)
    rng_seed: int = 0
    output_format: OutputFormat = OutputFormat.TEXT


# Linear algebra
class SymMatrix(SymbolicModel):
    """Row-major matrix of expressions."""
    rows: int = Field(ge=0)
    cols: int = Field(ge=0)
    entries: List[Any] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_size(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(f"expected {self.rows * self.cols} entries, got {len(self.entries)}")
        return self

    @classmethod
    def from_rows(cls, rows: List[List[Any]], cols: Optional[int] = None) -> "SymMatrix":
        width = len(rows[0]) if rows else (cols or 0)
        entries = [sp.sympify(e) for row in rows for e in row]
        return cls(rows=len(rows), cols=width, entries=entries)

    def __getitem__(self, index: Tuple[int, int]):
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> List[Any]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> List[List[Any]]:
        return [self.row(i) for i in range(self.rows)]

    def transpose(self) -> "SymMatrix":
        return SymMatrix.from_rows(
            [[self[i, j] for i in range(self.rows)] for j in range(self.cols)], cols=self.rows
        )

    def printed(self) -> List[List[str]]:
        return [[kernel.print_expression(e) for e in row] for row in self.to_rows()]


class RankCertificate(SymbolicModel):
    rank: int
    pivot_rows: List[int] = Field(default_factory=list)
    pivot_cols: List[int] = Field(default_factory=list)
    side_conditions: List[Any] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_pivots(self):
        if not (self.rank == len(self.pivot_rows) == len(self.pivot_cols)):
            raise ValueError("rank must equal the number of pivots")
        return self

    def transposed(self) -> "RankCertificate":
        return RankCertificate(
            rank=self.rank,
            pivot_rows=list(self.pivot_cols),
            pivot_cols=list(self.pivot_rows),
            side_conditions=list(self.side_conditions),
        )


# Constraints and fields
class Resolution(SymbolicModel):
    variable: Any
    solution: Any
    side_condition: Any = sp.S.One


class Constraint(SymbolicModel):
    """One constraint function with its generation, class and optional resolution."""
    expr: Any
    generation: int = Field(ge=0)
    label: str
    constraint_class: ConstraintClass = ConstraintClass.UNDECIDED
    resolution: Optional[Resolution] = None
    parent: Optional[str] = None
    root: int = Field(1, description="Index of the primary constraint this one descends from")

    @property
    def is_resolved(self) -> bool:
        return self.resolution is not None


class VectorField(SymbolicModel):
    """Coefficients over the coordinates of W plus undetermined multiplier names."""
    coefficients: Dict[str, Any] = Field(default_factory=dict)
    undetermined: List[str] = Field(default_factory=list)

    def apply(self, f) -> Any:
        """Derivative of f along the field, normalized."""
        f = sp.sympify(f)
        total = sp.S.Zero
        for name, coeff in self.coefficients.items():
            symbol = sp.Symbol(name)
            if symbol in f.free_symbols and coeff != 0:
                total += coeff * sp.diff(f, symbol)
        return kernel.normalize(total)

    def substitute(self, bindings: Dict[sp.Symbol, Any]) -> "VectorField":
        return VectorField(
            coefficients={name: kernel.substitute(c, bindings) for name, c in self.coefficients.items()},
            undetermined=[m for m in self.undetermined if sp.Symbol(m) not in bindings],
        )

    @property
    def undetermined_symbols(self) -> List[sp.Symbol]:
        return [sp.Symbol(m) for m in self.undetermined]


class PhaseSpaceModel(SymbolicModel):
    spec: LagrangianSpec
    energy: Any
    hessian: SymMatrix
    hessian_cert: RankCertificate
    primary: List[Constraint]

    @property
    def vars(self) -> VarTable:
        return self.spec.vars

    @property
    def is_degenerate(self) -> bool:
        return self.hessian_cert.rank < self.spec.dim


# Reduction records
class GenerationStep(SymbolicModel):
    """In-memory record of one consistency generation."""
    index: int
    pending: List[str] = Field(default_factory=list)
    gamma: SymMatrix
    certificate: RankCertificate
    determined: Dict[str, Any] = Field(default_factory=dict)
    second_class: List[str] = Field(default_factory=list)
    produced: List[str] = Field(default_factory=list)
    reducible: List[str] = Field(default_factory=list)
    side_conditions: List[Any] = Field(default_factory=list)


class ReductionState(SymbolicModel):
    """Snapshot of an ongoing reduction in either picture."""
    picture: Picture
    generation: int = 0
    surface: Any = Field(description="Surface of resolved constraints")
    constraints: List[Constraint] = Field(default_factory=list)
    pending: List[str] = Field(default_factory=list)
    determined_accelerations: Dict[str, Any] = Field(default_factory=dict)
    determined_velocities: Dict[str, Any] = Field(default_factory=dict)
    evolution: VectorField
    gamma: Optional[SymMatrix] = None
    certificate: Optional[RankCertificate] = None
    steps: List[GenerationStep] = Field(default_factory=list)
    side_conditions: List[Any] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    routh: Optional[Any] = Field(None, description="RouthData, Hamiltonian picture only")
    table: Optional[Any] = Field(None, description="BracketTable, Hamiltonian picture only")

    def constraint(self, label: str) -> Constraint:
        for c in self.constraints:
            if c.label == label:
                return c
        raise KeyError(label)

    def labels(self, constraint_class: ConstraintClass) -> List[str]:
        return [c.label for c in self.constraints if c.constraint_class == constraint_class]

    @property
    def unresolved(self) -> List[Constraint]:
        return [c for c in self.constraints if not c.is_resolved]


class LagrangianReduction(SymbolicModel):
    model: PhaseSpaceModel
    state: ReductionState
    termination: Termination
    field: VectorField
    energy: Any

    @property
    def steps(self) -> List[GenerationStep]:
        return self.state.steps


class RouthData(SymbolicModel):
    h: Any
    psi: Dict[int, Any] = Field(default_factory=dict)
    phi: Dict[int, Constraint] = Field(default_factory=dict)
    h_total: Any
    velocities: Dict[str, Any] = Field(default_factory=dict, description="Eliminated velocities v_a")


class BracketStage(SymbolicModel):
    index: int
    labels: List[str] = Field(default_factory=list)
    matrix: SymMatrix
    inverse: SymMatrix


class HamiltonianReduction(SymbolicModel):
    model: PhaseSpaceModel
    state: ReductionState
    termination: Termination
    field: VectorField
    routh: RouthData
    table: Any = Field(description="Final BracketTable")
    staged_agrees: bool = True

    @property
    def steps(self) -> List[GenerationStep]:
        return self.state.steps


# Report models (JSON-able only)
class ResolutionRecord(BaseModel):
    variable: str
    solution: str
    side_condition: str


class ConstraintRecord(BaseModel):
    label: str
    expr: str
    constraint_class: str = Field(alias="class")
    resolution: Optional[ResolutionRecord] = None
    parent: Optional[str] = None

    class Config:
        populate_by_name = True


class GenerationRecord(BaseModel):
    index: int
    constraints: List[ConstraintRecord] = Field(default_factory=list)
    gamma: List[List[str]] = Field(default_factory=list)
    rank: int = 0
    pivots: List[List[int]] = Field(default_factory=list)
    determined: Dict[str, str] = Field(default_factory=dict)
    side_conditions: List[str] = Field(default_factory=list)


class DeterminedRecord(BaseModel):
    velocities: Dict[str, str] = Field(default_factory=dict)
    accelerations: Dict[str, str] = Field(default_factory=dict)


class RouthRecord(BaseModel):
    h: str
    psi: Dict[str, str] = Field(default_factory=dict)
    phi: Dict[str, str] = Field(default_factory=dict)
    h_total: str


class BracketStageRecord(BaseModel):
    index: int
    labels: List[str] = Field(default_factory=list)
    matrix: List[List[str]] = Field(default_factory=list)
    inverse: List[List[str]] = Field(default_factory=list)


class BracketRecord(BaseModel):
    stages: List[BracketStageRecord] = Field(default_factory=list)
    staged_agrees: bool = True


class TwoFormRecord(BaseModel):
    gamma: List[List[str]]
    m: List[List[str]]
    evolution_agrees: bool


class PictureRecord(BaseModel):
    generations: List[GenerationRecord] = Field(default_factory=list)
    determined: DeterminedRecord = Field(default_factory=DeterminedRecord)
    termination: str
    evolution_field: Dict[str, str] = Field(default_factory=dict)
    first_class: List[str] = Field(default_factory=list)
    second_class: List[str] = Field(default_factory=list)
    undetermined: List[str] = Field(default_factory=list)
    energy: str
    routh: Optional[RouthRecord] = None
    brackets: Optional[BracketRecord] = None
    two_form: Optional[TwoFormRecord] = None


class CorrespondenceRecord(BaseModel):
    label: str
    lagrangian: str
    hamiltonian: str
    matched: bool


class EquivalenceRecord(BaseModel):
    map: List[CorrespondenceRecord] = Field(default_factory=list)
    variables: List[str] = Field(default_factory=list)
    matched: bool = True
    termination_agrees: bool = True
    undetermined_agrees: bool = True


class VerificationSummary(BaseModel):
    samples: int = 0
    max_residual: str = "0"
    passed: bool = True
    checks: Dict[str, str] = Field(default_factory=dict)


class Report(BaseModel):
    system: str
    dim: int
    lagrangian: str
    parameters: Dict[str, Optional[str]] = Field(default_factory=dict)
    functions: List[str] = Field(default_factory=list)
    side_conditions: List[str] = Field(default_factory=list)
    pictures: Dict[str, PictureRecord] = Field(default_factory=dict)
    equivalence: Optional[EquivalenceRecord] = None
    verification: VerificationSummary = Field(default_factory=VerificationSummary)
    warnings: List[str] = Field(default_factory=list)

    @field_validator("warnings")
    @classmethod
    def unique_warnings(cls, value: List[str]) -> List[str]:
        return list(dict.fromkeys(value))
