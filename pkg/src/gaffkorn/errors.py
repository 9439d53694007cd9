"""Exception hierarchy shared by all modules."""


class GaffKornError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(GaffKornError, ValueError):
    pass


class InvalidAspect(InvalidParams):
    pass


class InvalidDimension(GaffKornError, ValueError):
    pass


class OutOfChart(GaffKornError, ValueError):
    pass


class OutOfTube(GaffKornError, ValueError):
    pass


class NotUnique(GaffKornError, ValueError):
    pass


class NoConvergence(GaffKornError, RuntimeError):
    pass


class SingularPoint(GaffKornError, ValueError):
    pass


class AxisTooClose(SingularPoint):
    pass


class QuadratureUnderResolved(GaffKornError, RuntimeError):
    pass


class BCViolated(GaffKornError, ValueError):
    pass


class ZeroField(GaffKornError, ValueError):
    pass


class DomainNotConvex(GaffKornError, ValueError):
    pass


class SupportTouchesBoundary(GaffKornError, ValueError):
    pass


class UnsupportedDomainForSearch(GaffKornError, ValueError):
    pass


class RankDeficient(GaffKornError, ArithmeticError):
    pass


class NotPositiveDefinite(GaffKornError, ArithmeticError):
    pass


class EigenNoConvergence(GaffKornError, ArithmeticError):
    pass


class ConfigError(GaffKornError, ValueError):
    pass
