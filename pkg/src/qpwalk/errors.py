"""Exception hierarchy. Each family maps to one CLI exit code."""


class QPWalkError(Exception):
    """Base class. ``stage`` names the pipeline step that failed."""

    exit_code = 1
    stage = "pipeline"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def describe(self):
        extra = ", ".join(f"{k}={v}" for k, v in self.details.items())
        name = type(self).__name__
        base = f"[{self.stage}] {name}: {self}"
        return f"{base} ({extra})" if extra else base


# --- validation (exit 2) ---------------------------------------------------

class ValidationError(QPWalkError):
    exit_code = 2
    stage = "validate"


class NegativeProbability(ValidationError):
    pass


class SumNotOne(ValidationError):
    pass


class UnsupportedStep(ValidationError):
    pass


class MalformedModel(ValidationError):
    pass


class AlphaAtGammaPole(ValidationError):
    stage = "tauberian"


# --- out of scope (exit 3) -------------------------------------------------

class OutOfScope(QPWalkError):
    exit_code = 3
    stage = "scope"


class NotErgodic(OutOfScope):
    stage = "ergodicity"


class OutOfScopeZeroDrift(OutOfScope):
    stage = "ergodicity"


class SingularWalk(OutOfScope):
    stage = "kernel"


class Genus0Walk(OutOfScope):
    stage = "kernel"


class DegenerateKernel(OutOfScope):
    stage = "kernel"


class ComplexBranchPoint(OutOfScope):
    stage = "branch-points"


class BranchPointOnUnitCircle(OutOfScope):
    stage = "branch-points"


# --- numerical failure (exit 4) --------------------------------------------

class NumericalFailure(QPWalkError):
    exit_code = 4
    stage = "numerics"


class DegenerateQuadratic(NumericalFailure):
    stage = "kernel"


class NotABranchPoint(NumericalFailure):
    stage = "sqrt-decomposition"


class BracketFailure(NumericalFailure):
    stage = "singularity"


class AttributionAmbiguous(NumericalFailure):
    stage = "singularity"


class NoConvergence(NumericalFailure):
    stage = "oracle"


class OutsideRadius(NumericalFailure):
    stage = "oracle"


class OracleUnavailable(NumericalFailure):
    stage = "asymptotics"


class OracleTooShallow(NumericalFailure):
    stage = "oracle"


class NonconvergentEvaluator(NumericalFailure):
    stage = "asymptotics"


class WindowTooNoisy(NumericalFailure):
    stage = "oracle"
