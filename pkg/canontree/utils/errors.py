"""Exception hierarchy shared by every canontree module."""


class CanonTreeError(Exception):
    """Base class for all canontree failures."""


class ProfileError(CanonTreeError, ValueError):
    """A level profile, code word set or partition is malformed."""


class ResourceLimitError(CanonTreeError):
    """A request exceeds a configured size cap."""

    def __init__(self, what: str, value: int, cap: int):
        self.what = what
        self.value = value
        self.cap = cap
        super().__init__(f"{what}: n={value} exceeds the configured cap {cap}")


class IntervalDomainError(CanonTreeError, ArithmeticError):
    """An interval operation left its domain (division by 0, ln of x <= 0, ...)."""


class HypothesisError(CanonTreeError):
    """A precondition of a certified tail bound does not hold."""

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        message = f"precondition failed: {condition}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class TruncationError(HypothesisError):
    """A geometric tail ratio is not below 1; the truncation order is too small."""


class CertificationError(CanonTreeError):
    """A sign, root or witness could not be certified."""


class VerificationFailure(CanonTreeError):
    """A named invariant check failed."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant} failed" + (f": {detail}" if detail else ""))
