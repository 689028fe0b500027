"""Exception types shared across the package."""


class DefectBudgetError(ValueError):
    """A truncated measure lost too much mass for the requested check."""


class HypothesisError(ValueError):
    """The inputs do not satisfy the hypotheses of the statement being checked.

    Distinct from a failed inequality: when the hypotheses fail, the statement
    makes no claim at all.
    """
