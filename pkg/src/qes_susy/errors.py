"""Exception hierarchy shared by every module of the package."""


class QesError(Exception):
    """Base class for all errors raised by qes_susy."""


class DomainError(QesError, ValueError):
    """Parameters outside the domain an operation is defined on."""


class UnsupportedError(QesError, NotImplementedError):
    """A case the implementation deliberately does not handle."""


class NodalSeedError(QesError, ValueError):
    """A seed prefactor has a real zero, so the SUSY partner would be singular."""


class SingularPartnerError(QesError, ValueError):
    """The confluent integration constant makes omega(x) vanish on the real line."""


class NumericError(QesError, RuntimeError):
    """A numerical procedure (eigensolver, root finder, quadrature) failed."""


class BracketError(NumericError):
    """A root bracket does not enclose a sign change."""


class ConsistencyError(QesError, AssertionError):
    """An internal identity that must hold by construction was violated."""


class InexactError(QesError, ArithmeticError):
    """A value cannot be represented in the exact surd field."""
