"""Exception types shared across the package.

The CLI maps these onto exit codes: parse/usage problems exit 2, every
error raised while computing (domain, range, degenerate input) exits 3.
"""


class CesaroLabError(Exception):
    """Base class for all package errors."""


class DomainError(CesaroLabError, ValueError):
    """Evaluation point outside the domain of a function."""


class ArgumentError(CesaroLabError, ValueError):
    """Structurally invalid argument (bad spec, empty grid, p < 1, ...)."""


class DegenerateError(CesaroLabError, ValueError):
    """Input that makes the requested construction collapse (e.g. bounded
    generator where an unbounded one is required)."""


class RangeError(CesaroLabError, ValueError):
    """Requested window/support not attainable on the given domain."""
