"""Exception types shared across the package."""


class ElapseError(Exception):
    """Base class for all package-specific errors."""


class DomainError(ElapseError):
    """Argument outside the physical domain (negative age, activity, or density)."""


class NonSmoothModel(ElapseError):
    """Derivative requested from a rate model with a jump discontinuity."""


class DiracNotDensity(ElapseError):
    """Pointwise density value requested from the Dirac delay kernel."""


class MassMismatch(ElapseError):
    """Operands of a transport distance do not carry equal mass."""


class QuadratureUnderflow(ElapseError):
    """Every quadrature node of a steady profile underflowed to zero."""


class NoRootFound(ElapseError):
    """The activity self-consistency equation has no root on the scanned range."""


class ContractionViolated(ElapseError):
    """Coupling too strong for the activity fixed-point iteration to contract."""


class NoConvergence(ElapseError):
    """Fixed-point iteration failed to reach tolerance within its budget."""


class CFLViolation(ElapseError):
    """Time step does not match the grid spacing required by the exact-shift scheme."""


class NegativeDensity(ElapseError):
    """A simulated density went negative (scheme bug guard)."""


class MassNotZero(ElapseError):
    """A perturbation that must carry zero mass does not."""


class KappaGeqOne(ElapseError):
    """Recurrent feedback gain at or above one: outside the weak-coupling regime."""


class KernelNotDensity(ElapseError):
    """A density-kernel operation received the Dirac kernel."""


class EigensolverFailure(ElapseError):
    """Dense eigendecomposition did not converge."""


class WindowBelowFloor(ElapseError):
    """Decay-fit window contains norms at or below the noise floor."""


class ConfigError(ElapseError):
    """Experiment configuration failed validation."""


class ScanTooCoarse(UserWarning):
    """Two roots were bracketed in adjacent scan cells; the scan may merge roots."""
