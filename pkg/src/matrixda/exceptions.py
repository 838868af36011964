"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`InputError` -> 2,
:class:`DegeneracyError` -> 3, :class:`MethodUnavailableError` -> 4.
"""


class InputError(ValueError):
    """Malformed or inconsistent input data / arguments."""


class MtsParseError(InputError):
    """A ``.mts`` file could not be parsed."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class FoldDegeneracyError(InputError):
    """A cross-validation training fold contains fewer than two classes."""


class DegeneracyError(ArithmeticError):
    """Numerical degeneracy that should be impossible on valid inputs."""


class NotPositiveDefiniteError(DegeneracyError):
    """A matrix required to be positive definite is (numerically) singular."""

    def __init__(self, min_eigenvalue, max_eigenvalue):
        self.min_eigenvalue = float(min_eigenvalue)
        self.max_eigenvalue = float(max_eigenvalue)
        super().__init__(
            "regularized metric is not positive definite: minimum eigenvalue "
            f"{self.min_eigenvalue:.3e} (maximum {self.max_eigenvalue:.3e})"
        )


class DegenerateDataError(DegeneracyError):
    """Data without any spread in a direction (zero total scatter)."""


class MethodUnavailableError(RuntimeError):
    """The requested method cannot run on this data."""


class SingularWithinClassError(MethodUnavailableError):
    """Strict BLDA needs a nonsingular within-class scatter matrix."""

    def __init__(self, direction, dim, rank):
        self.direction = direction
        self.dim = dim
        self.rank = rank
        name = "column (S_1w)" if direction == 1 else "row (S_2w)"
        super().__init__(
            f"within-class scatter in the {name} direction is singular: "
            f"rank {rank} < {dim} (deficit {dim - rank})"
        )
