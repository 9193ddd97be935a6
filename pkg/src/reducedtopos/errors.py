"""Exception hierarchy.

Every error raised by the package derives from :class:`ToposError` so callers
(the CLI in particular) can separate library failures from programming bugs.
"""


class ToposError(Exception):
    pass


# operator core
class NotHermitian(ToposError, ValueError):
    pass


class NonCommuting(ToposError, ValueError):
    pass


class DimMismatch(ToposError, ValueError):
    pass


class NotAProjection(ToposError, ValueError):
    pass


class NotADensityMatrix(ToposError, ValueError):
    pass


# contexts
class NonCommutingGenerators(NonCommuting):
    pass


class InvalidSelector(ToposError, ValueError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class SelectorNotIdempotent(InvalidSelector):
    pass


class SelectorImageOutsidePoset(InvalidSelector):
    pass


class NotIncluded(ToposError, ValueError):
    pass


class NoDominatingAtom(ToposError, RuntimeError):
    pass


class UnknownContext(ToposError, KeyError):
    pass


# sheaves
class BaseMismatch(ToposError, ValueError):
    pass


class NotASieve(ToposError, ValueError):
    pass


class NotASubpresheaf(ToposError, ValueError):
    pass


class NotAPresheaf(ToposError, ValueError):
    pass


class EnumerationTooLarge(ToposError, RuntimeError):
    pass


class NotGlobalElement(ToposError, ValueError):
    pass


class NotInOmegaJ(ToposError, ValueError):
    pass


# semantics
class NotJSheaf(ToposError, ValueError):
    pass


class ResultNotInOmegaJ(ToposError, ValueError):
    pass


# measures
class NaturalityViolation(ToposError, ValueError):
    pass


# probability interval / product
class MalformedStep(ToposError, ValueError):
    pass


class ConfigError(ToposError, ValueError):
    """Bad system description. ``where`` names the offending field."""

    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where
