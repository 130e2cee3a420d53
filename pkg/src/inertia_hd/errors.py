"""Error types shared across the package.

Plain ``ValueError`` is used for bad inputs (shapes, parameter ranges); the two
classes here mark failures that need distinct handling at the CLI boundary.
"""


class NumericError(RuntimeError):
    """A computation produced non-finite values or a numerical routine failed."""


class CapabilityError(RuntimeError):
    """An operation needs an oracle (prox, Hessian product) the object lacks."""
