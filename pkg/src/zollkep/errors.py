"""Exception types shared across the package."""


class ZollkepError(Exception):
    """Base class for package-specific failures."""


class DomainError(ZollkepError, ValueError):
    """Evaluation requested outside a declared domain or certified interval."""


class JetOrderError(ZollkepError, ValueError):
    """Requested jet order is negative or above the supported maximum."""


class InadmissibleProfileError(ZollkepError, ValueError):
    """A profile violates a positivity/admissibility requirement."""


class LadderError(ZollkepError, ValueError):
    """An energy ladder violates monotonicity, ratio, or rationality requirements."""


class SupportError(ZollkepError, ValueError):
    """A seed or extension has the wrong support for the requested construction."""


class IntegrationError(ZollkepError, RuntimeError):
    """Orbit integration failed (step collapse, missing events, ...)."""
