"""Exception types shared across the library."""


class SingularNetworkError(ValueError):
    """Two-port construction would divide by a zero branch impedance."""


class ConversionError(ValueError):
    """Network conversion denominator vanished (representation not invertible)."""


class ModelDomainError(ValueError):
    """Closed-form operation requires the identical-loop form of the link."""


class WeakCouplingError(ValueError):
    """Frequency-split quantity requested where no real split exists."""


class BiasRangeError(ValueError):
    """Reverse bias outside the diode's operational range."""


class UntunableError(ValueError):
    """Requested capacitance falls outside the varactor stack's band."""

    def __init__(self, message, c_target=None, band=None):
        super().__init__(message)
        self.c_target = c_target
        self.band = band


class UnmatchableError(ValueError):
    """Impedance target not reachable by a two-capacitor L-section."""

    def __init__(self, message, z_target=None):
        super().__init__(message)
        self.z_target = z_target


class NoSolutionError(ValueError):
    """Inverse lookup has no solution in the attainable range."""


class GeometryError(ValueError):
    """Loop placement is degenerate (intersecting or touching loops)."""
