"""Exception types shared across the engine."""


class FibcheckError(Exception):
    """Base class for all engine errors."""


class MalformedModel(FibcheckError):
    """A table references an unknown id, or ids are not dense."""


class MissingStructure(FibcheckError):
    """A required piece of chosen structure (product, exponential, point,
    adjoint, ...) is absent."""


class SplitViolation(FibcheckError):
    """Reindexing functors fail the strict functoriality equations."""


class BoundExceeded(FibcheckError):
    """A sweep over a rank-bounded virtual category was truncated."""


class NotPullback(FibcheckError):
    """A square supplied for a Beck-Chevalley check is not a pullback."""


class NotEquivalence(FibcheckError):
    """A functor claimed to be an equivalence fails essential surjectivity
    or full faithfulness."""


class NotGoedel(FibcheckError):
    """An operation requiring a Goedel-classified fibration was called on
    one that is not."""


class NotEnoughQf(FibcheckError):
    """Reconstruction requires enough quantifier-free objects."""


class UnknownRecipe(FibcheckError):
    """No builtin model with that name."""


class SizeExceeded(FibcheckError):
    """Requested model or serialization exceeds configured size limits."""
