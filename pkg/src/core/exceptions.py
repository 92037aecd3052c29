"""
Custom exceptions for the constraint analyzer.
Provides specific error types for parsing, algebra and reduction failures.
"""


class AnalysisError(Exception):
    """Base exception for all analyzer errors."""

    def __init__(self, message: str, details: dict = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class InputError(AnalysisError):
    """Raised when an input file or command-line value is invalid."""

    def __init__(self, message: str, field: str = None):
        super().__init__(message, details={"field": field} if field else None)
        self.field = field


class ParseError(InputError):
    """Raised when expression or file text does not follow the grammar."""

    def __init__(self, message: str, position: int = None, text: str = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position
        self.text = text
        self.details.update({"position": position})


class UnknownIdentifier(ParseError):
    """Raised when an expression mentions an undeclared name."""

    def __init__(self, name: str, position: int = None):
        super().__init__(f"Unknown identifier '{name}'", position=position)
        self.name = name


class ZeroDivisionInExpression(AnalysisError):
    """Raised on division by an identically-zero expression."""

    def __init__(self, message: str = "Division by an identically zero expression"):
        super().__init__(message)


class NotAffine(AnalysisError):
    """Raised when an expression is not affine in the variable to solve for."""

    def __init__(self, variable: str, message: str = None):
        super().__init__(message or f"Expression is not affine in {variable}")
        self.variable = variable


class ZeroCoefficient(AnalysisError):
    """Raised when the variable to solve for has an identically-zero coefficient."""

    def __init__(self, variable: str, message: str = None):
        super().__init__(message or f"Coefficient of {variable} is identically zero")
        self.variable = variable


class CyclicBinding(AnalysisError):
    """Raised when a substitution value mentions another binding's key."""

    def __init__(self, variable: str):
        super().__init__(f"Substitution is not triangular: a binding value mentions {variable}")
        self.variable = variable


class SingularSubmatrix(AnalysisError):
    """Raised when a selected square submatrix has no inverse."""

    def __init__(self, message: str = "Selected submatrix is singular"):
        super().__init__(message)


class DegenerateLagrangian(AnalysisError):
    """Raised when an operation needs a nondegenerate velocity Hessian."""

    def __init__(self, rank: int, dim: int):
        super().__init__(f"Velocity Hessian has rank {rank} < {dim}; the Lagrangian is degenerate")
        self.rank = rank
        self.dim = dim


class UnresolvableSecondClass(AnalysisError):
    """Raised when a second-class constraint cannot be solved for any variable."""

    def __init__(self, label: str, message: str = None):
        super().__init__(message or f"Second-class constraint {label} is not affine in any admissible variable")
        self.label = label


class NonlinearRouth(AnalysisError):
    """Raised when the Routh function is not affine in the remaining velocities."""

    def __init__(self, message: str = "Routh function is not affine in the undetermined velocities"):
        super().__init__(message)


class SingularConstraintMatrix(AnalysisError):
    """Raised when the bracket matrix of supposed second-class constraints is singular."""

    def __init__(self, labels: list = None):
        labels = labels or []
        super().__init__(
            f"Bracket matrix of constraints {', '.join(labels)} is singular on the surface",
            details={"labels": labels},
        )
        self.labels = labels


class GenerationBudgetExceeded(AnalysisError):
    """Raised when the iteration has not terminated within the generation budget."""

    def __init__(self, max_generations: int, picture: str = "lagrangian"):
        super().__init__(
            f"{picture.capitalize()} reduction did not terminate within {max_generations} generation(s)",
            details={"picture": picture, "max_generations": max_generations},
        )
        self.max_generations = max_generations
        self.picture = picture


class InconsistentConstraints(AnalysisError):
    """Raised when consistency produces a nonzero constant constraint."""

    def __init__(self, label: str):
        super().__init__(f"Constraint {label} reduces to a nonzero constant; the system is inconsistent")
        self.label = label


class EquivalenceFailure(AnalysisError):
    """Raised when the Lagrangian and Hamiltonian reductions disagree."""

    def __init__(self, label: str, reason: str):
        super().__init__(f"Pictures disagree at {label}: {reason}", details={"label": label})
        self.label = label
        self.reason = reason


class SideConditionViolated(AnalysisError):
    """Raised when sampling keeps hitting the zero set of a recorded side condition."""

    def __init__(self, condition: str, attempts: int):
        super().__init__(
            f"Side condition {condition} vanished at every one of {attempts} sampled points",
            details={"condition": condition, "attempts": attempts},
        )
        self.condition = condition
        self.attempts = attempts
