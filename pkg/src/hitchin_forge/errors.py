"""Exception and warning types shared across the package."""


class HitchinError(Exception):
    """Base class for library errors."""


class ConfigError(HitchinError):
    pass


class ResourceCapExceeded(HitchinError):
    """Projected enumeration size exceeds the configured cap."""


class NonHyperbolicGenerator(HitchinError):
    pass


class CuspedOrDegenerate(HitchinError):
    pass


class Reducible(HitchinError):
    pass


class BoundaryMismatch(HitchinError):
    pass


class DiscretenessSuspect(UserWarning):
    pass


class EigenFailure(HitchinError):
    def __init__(self, msg, word=None):
        super().__init__(msg if word is None else f"{msg} (word {word})")
        self.word = word


class NotLoxodromic(HitchinError):
    pass


class ComplexSpectrum(HitchinError):
    pass


class InsufficientData(HitchinError):
    pass


class GridMismatch(HitchinError):
    pass


class FormatVersionMismatch(HitchinError):
    pass


# numeric failures map to CLI exit code 3
NUMERIC_ERRORS = (
    NonHyperbolicGenerator, CuspedOrDegenerate, Reducible, BoundaryMismatch,
    EigenFailure, NotLoxodromic, ComplexSpectrum, InsufficientData, GridMismatch,
    ResourceCapExceeded,
)
