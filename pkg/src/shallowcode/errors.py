"""Exception hierarchy shared by every module.

Each exception carries a stable ``code`` string used by the CLI error JSON.
"""

from __future__ import annotations


class ShallowCodeError(Exception):
    code = "Error"

    def __init__(self, message: str = "", witness=None, **extra):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.witness = witness
        self.extra = extra

    def to_json(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _make(name: str, *bases):
    return type(name, bases or (ShallowCodeError,), {"code": name})


# galois
NotPrimePower = _make("NotPrimePower", ShallowCodeError, ValueError)
DivisionByZero = _make("DivisionByZero", ShallowCodeError, ZeroDivisionError)

# circuit
InputLengthMismatch = _make("InputLengthMismatch", ShallowCodeError, ValueError)
LengthMismatch = _make("LengthMismatch", ShallowCodeError, ValueError)
TooManyInputs = _make("TooManyInputs", ShallowCodeError, ValueError)
ArityMismatch = _make("ArityMismatch", ShallowCodeError, ValueError)
FieldMismatch = _make("FieldMismatch", ShallowCodeError, ValueError)
DepthTooSmall = _make("DepthTooSmall", ShallowCodeError, ValueError)
InvalidCircuit = _make("InvalidCircuit", ShallowCodeError, ValueError)

# ackermann
BadDepth = _make("BadDepth", ShallowCodeError, ValueError)
BeyondCap = _make("BeyondCap")

# channel
NotStochastic = _make("NotStochastic", ShallowCodeError, ValueError)
NotSymmetric = _make("NotSymmetric", ShallowCodeError, ValueError)
DomainError = _make("DomainError", ShallowCodeError, ValueError)

# typical / disperser / gadgets / codec
TooLarge = _make("TooLarge", ShallowCodeError, ValueError)
BadDegree = _make("BadDegree", ShallowCodeError, ValueError)
TooSmall = _make("TooSmall", ShallowCodeError, ValueError)
Exhausted = _make("Exhausted")
PreconditionFailed = _make("PreconditionFailed", ShallowCodeError, ValueError)
RangesDontAbut = _make("RangesDontAbut", ShallowCodeError, ValueError)
BadShape = _make("BadShape", ShallowCodeError, ValueError)
DepthBudgetTooSmall = _make("DepthBudgetTooSmall", ShallowCodeError, ValueError)
RateAboveCapacity = _make("RateAboveCapacity", ShallowCodeError, ValueError)
