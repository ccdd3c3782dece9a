"""Package-wide exception types."""


class CapacityError(RuntimeError):
    """A request exceeds a configured exact-computation or memory budget."""


class IntegrityError(AssertionError):
    """An exact self-check failed: computed renormalization data
    contradicts an internal cross-derivation.  Always fatal."""
