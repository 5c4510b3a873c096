"""Exception types raised across the package."""


class SingularInput(ValueError):
    """Matrix is numerically singular."""


class BadDegree(ValueError):
    """Exterior degree out of range."""


class RankDeficient(ValueError):
    """Frame lost full column rank during re-orthonormalization."""


class DegenerateSubspace(ValueError):
    """Plücker vector has (numerically) no component off the invariant block W."""


class ValidationError(ValueError):
    """An input object violates a documented invariant."""


class ParseError(ValueError):
    """A scenario file could not be parsed."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class BlockStructureViolated(RuntimeError):
    """The W-invariance (zero lower-left block) failed numerically; indicates a bug."""


class RecipeFailure(RuntimeError):
    """The drift recipe found no exponent delta with a_hat < 1."""
