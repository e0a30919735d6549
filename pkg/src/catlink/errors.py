"""Exception types raised by catlink."""


class CatlinkError(Exception):
    """Base class for all catlink errors."""


class DegenerateNorm(CatlinkError, ValueError):
    """A cat-state normalization denominator vanishes (e.g. odd cat at alpha=0)."""


class InvalidEfficiency(CatlinkError, ValueError):
    """An efficiency / transmissivity outside (0, 1]."""


class EncodingMismatch(CatlinkError, ValueError):
    """A measurement outcome that does not belong to the state's encoding."""


class ZeroDensity(CatlinkError, ArithmeticError):
    """Homodyne outcome density underflowed; the conditional state is undefined."""


class TruncationError(CatlinkError, ValueError):
    """Fock truncation discards more probability mass than allowed."""


class GridTooCoarse(CatlinkError, ArithmeticError):
    """Refining the outcome grid moved an integrated quantity beyond tolerance."""
