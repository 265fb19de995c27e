"""Exception hierarchy shared by the library and the CLI.

Each class carries an ``exit_code`` so the command-line front end can map
failures onto its documented exit statuses without a lookup table.
"""

from __future__ import annotations


class DGLDPCError(Exception):
    exit_code = 1


class InputError(DGLDPCError):
    exit_code = 1


class ConfigParseError(InputError):
    pass


class FractionSumError(InputError):
    pass


class DegenerateTypeError(InputError):
    pass


class NonIntegralInstanceError(InputError):
    def __init__(self, message: str, quantity: str = "", suggested_n: int | None = None):
        super().__init__(message)
        self.quantity = quantity
        self.suggested_n = suggested_n


class InvalidCodeError(InputError):
    pass


class EmptySequenceError(InputError):
    pass


class SeedRequiredError(InputError):
    pass


class FeasibilityError(DGLDPCError):
    exit_code = 2


class TheoremHypothesisError(FeasibilityError):
    def __init__(self, message: str, failing: tuple[str, ...] = ()):
        super().__init__(message)
        self.failing = failing


class PNotDefinedError(FeasibilityError):
    pass


class InfeasibleRatioError(FeasibilityError):
    def __init__(self, message: str, feasible_range=None):
        super().__init__(message)
        self.feasible_range = feasible_range


class ConvergenceError(FeasibilityError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CapacityError(DGLDPCError):
    exit_code = 3
