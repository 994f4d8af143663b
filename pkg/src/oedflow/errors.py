"""Exception types shared across the package."""


class OedflowError(Exception):
    """Base class for every error raised by this package."""


class SingularInformationMatrix(OedflowError):
    """The sampled information matrix is numerically rank deficient.

    Raised when the design does not excite all d parameter directions
    (condition estimate >= 1e12 or a non-positive pivot during the SPD
    factorization).
    """


class NonFiniteCoordinate(OedflowError):
    """A particle coordinate became NaN or infinite; usually a too-large step."""


class AsymmetricPerturbation(OedflowError):
    """A perturbation matrix failed its symmetry check."""


class NonPositiveMedia(OedflowError):
    """A conductivity evaluated to <= 0 somewhere on the discretization."""


class MeshError(OedflowError):
    """Mesh construction produced degenerate elements."""


class UnknownPreset(OedflowError):
    """Problem preset name not recognized."""


class RankDeficientCandidates(OedflowError):
    """Candidate rows do not span the parameter space."""


class InvalidL(OedflowError):
    """Gap bound outside [0, pi] for the diagonal-band sampler."""


class SizeMismatch(OedflowError):
    """Exact transport distance needs equal-size ensembles (and a sane size)."""


class InvalidInit(OedflowError):
    """Initialization strategy incompatible with the model's design domain."""


class ConfigError(OedflowError):
    """Bad key or value in a run configuration."""


class ExcessiveStep(OedflowError):
    """A single flow step moved a particle more than 10% of the domain extent.

    Signals a mis-scaled time step; reduce dt.
    """
