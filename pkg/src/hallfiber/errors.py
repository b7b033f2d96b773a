"""Exception types. Each carries a short machine-readable ``reason``."""


class SolverError(RuntimeError):
    reason = "numerical-failure"


class BracketError(SolverError):
    reason = "bracket-failure"


class PrecisionFloorError(SolverError):
    """The requested quantity is below what double precision can resolve."""

    reason = "precision-floor"


class DomainError(SolverError):
    """The truncated computational domain is too short for the requested state."""

    reason = "truncation-domain"


class SolverDisagreement(SolverError):
    """Shooting and finite-difference eigenvalues disagree: a solver bug sentinel."""

    reason = "solver-disagreement"


def reason_of(exc: BaseException) -> str:
    if isinstance(exc, SolverError):
        return exc.reason
    if isinstance(exc, ValueError):
        return "invalid-input"
    if isinstance(exc, ArithmeticError):
        return "numerical-failure"
    return "internal-error"
