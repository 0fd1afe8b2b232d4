"""
Error hierarchy shared by every app.

Each error knows the process exit code the experiment driver reports for it:
2 for bad input, 3 for a violated property, 4 for a solver that did not converge.
"""


class LabError(Exception):
    exit_code = 1
    default_detail = "Experiment failed."

    def __init__(self, detail: str = None, **context):
        self.detail = detail or self.default_detail
        self.context = context
        super().__init__(self.detail)

    def __str__(self):
        if not self.context:
            return self.detail
        extra = ", ".join(f"{key}={value}" for key, value in sorted(self.context.items()))
        return f"{self.detail} ({extra})"


# --- exit 2: input and configuration ---


class InputError(LabError):
    exit_code = 2
    default_detail = "Invalid input."


class ConfigError(InputError):
    default_detail = "Invalid configuration."

    def __init__(self, detail: str = None, field: str = None, line: int = None):
        super().__init__(detail, field=field, line=line)
        self.field = field
        self.line = line

    def __str__(self):
        where = self.field or "config"
        if self.line is not None:
            where = f"{where} (line {self.line})"
        return f"{where}: {self.detail}"


class InvalidParams(InputError):
    default_detail = "Problem parameters are inconsistent."


class InvalidField(InputError):
    default_detail = "Coefficient array does not match the problem parameters."


class InvalidExponent(InputError):
    default_detail = "Lebesgue exponent must be at least 1."


class OrderOutOfRange(InputError):
    default_detail = "Order s must lie strictly between 0 and 1."


class UnknownLabel(InputError):
    default_detail = "Unknown nonlinearity label."


class DivergentSum(InputError):
    default_detail = "Lattice sum diverges for this exponent."


# --- exit 3: property violations ---


class PropertyViolation(LabError):
    exit_code = 3
    default_detail = "An asserted property does not hold."


class NonHermitian(PropertyViolation):
    default_detail = "Field is not Hermitian symmetric, so it has no real values."


class MasslessExtension(PropertyViolation):
    default_detail = "The zero mode has no finite-energy extension when m = 0."


class ProbeTooCoarse(PropertyViolation):
    default_detail = "Extrapolation to the boundary did not reach the requested tolerance."


class SingularSystem(PropertyViolation):
    default_detail = "Tridiagonal system could not be solved."


class GeometryInfeasible(PropertyViolation):
    default_detail = "No sphere radius gives a positive lower bound."


class LevelOutOfBounds(PropertyViolation):
    default_detail = "Critical level left the uniform bracket."


class TrivialLimit(PropertyViolation):
    default_detail = "Limit solution is below the nontriviality floor."


# --- exit 4: solver non-convergence ---


class SolverError(LabError):
    exit_code = 4
    default_detail = "Solver did not converge."


class ConvergedToTrivial(SolverError):
    default_detail = "Iteration collapsed onto the trivial solution."


class MaxIterations(SolverError):
    default_detail = "Iteration limit reached before the Cerami tolerance."


class StagnationWithoutConvergence(SolverError):
    default_detail = "Max-over-path level plateaued while the Cerami measure stayed above tolerance."
