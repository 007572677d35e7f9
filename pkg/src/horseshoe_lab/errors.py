"""Exception hierarchy.

Everything raised on purpose derives from :class:`LabError`; the CLI maps
these to exit code 1.  ``ConfigError`` is the odd one out and maps to 2.
"""


class LabError(Exception):
    """Base class for domain errors."""

    code = "LabError"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class ConfigError(Exception):
    code = "ConfigError"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class DegenerateGap(LabError):
    code = "DegenerateGap"


class InvalidSystem(LabError):
    code = "InvalidSystem"


class InvalidSigns(LabError):
    code = "InvalidSigns"


class PerturbationTooLarge(LabError):
    code = "PerturbationTooLarge"


class OutOfDomain(LabError):
    code = "OutOfDomain"


class NewtonDivergence(LabError):
    code = "NewtonDivergence"


class NoConvergence(LabError):
    code = "NoConvergence"


class RootNotFound(LabError):
    code = "RootNotFound"


class EmptyIntersection(LabError):
    code = "EmptyIntersection"


class DepthCap(LabError):
    code = "DepthCap"


class InsufficientGaps(LabError):
    code = "InsufficientGaps"


class PreconditionViolated(LabError):
    code = "PreconditionViolated"


class NonPositiveTau(LabError):
    code = "NonPositiveTau"


class EmptyInput(LabError):
    code = "EmptyInput"


class DegenerateScales(LabError):
    code = "DegenerateScales"
