"""Exception types shared across the package."""


class CapacityError(RuntimeError):
    """A requested computation exceeds the configured dense-storage budget."""


class IntegrationError(RuntimeError):
    """The master-equation integrator lost accuracy (e.g. trace drift)."""

    def __init__(self, message, last_good_time=None):
        super().__init__(message)
        self.last_good_time = last_good_time


class NumericalIntegrityError(RuntimeError):
    """A state or density matrix violates its numerical invariants."""
