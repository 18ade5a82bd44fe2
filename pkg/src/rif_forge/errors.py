"""Exception hierarchy shared across the package.

Every error raised on purpose by the library derives from :class:`RifError`,
so callers (notably the CLI) can map families of failures to exit codes.
"""

from __future__ import annotations


class RifError(Exception):
    """Base class for all library errors."""


# ---------------------------------------------------------------- polynomials

class PolySyntaxError(RifError, ValueError):
    """Raised by the expression parser; carries the offending position."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        pointer = ""
        if text:
            pointer = f"\n  {text}\n  {' ' * position}^"
        super().__init__(f"{message} at position {position}{pointer}")


class DimensionMismatch(RifError, ValueError):
    """A point, index or exponent does not match the polynomial's arity."""


class DegreeError(RifError, ValueError):
    """A declared degree is smaller than the actual degree."""


# -------------------------------------------------------------------- models

class InvalidModel(RifError):
    """Family of failures meaning the input is not a valid RIF."""


class StabilityViolation(InvalidModel):
    """The denominator vanishes (numerically) inside the open polydisk."""

    def __init__(self, point, modulus: float):
        self.point = tuple(complex(z) for z in point)
        self.modulus = float(modulus)
        coords = ", ".join(f"{z.real:.6g}{z.imag:+.6g}j" for z in self.point)
        super().__init__(
            f"denominator has |p| = {self.modulus:.3e} at interior point ({coords})"
        )


class DegenerateRealization(InvalidModel):
    """The realization formula produced a constant function."""


class RealizationMismatch(InvalidModel):
    """The realized numerator is not the reflection of the denominator."""


class UnknownExample(RifError, KeyError):
    """Requested catalog entry does not exist."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else "unknown example"


# -------------------------------------------------------- method applicability

class MethodInapplicable(RifError):
    """Family of failures meaning the requested analysis does not apply."""


class DegreeMismatch(MethodInapplicable):
    """An operation that needs degree (m, n, 1) received another degree."""


class VerticalLineAtCenter(MethodInapplicable):
    """The leading slice coefficient vanishes at the expansion center, so the
    density is not analytic (it may be discontinuous) there."""


class NotEdgeInterior(MethodInapplicable):
    """Edge analysis requested when the diagonal does not cross an edge."""


class AllZeroSeries(MethodInapplicable):
    """All Taylor coefficients up to the requested order vanish."""


class ExceptionalSlice(RifError):
    """The slice touches the torus (its Blaschke product degenerates)."""


class PsiSingular(RifError):
    """The level-set parametrizing function has a pole-like singularity."""


class QFormViolation(RifError):
    """A structural identity of the quadratic part of the density failed."""


# ----------------------------------------------------------------- numerics

class EmptyScan(RifError):
    """The singular-set scan found no torus zeros of the denominator."""


class InsufficientTailSamples(RifError):
    """Too few samples fell into the sublevel set for a usable estimate."""


class ExtrapolationUnstable(RifError):
    """Radial limit estimates oscillate instead of settling."""


class VerificationFailed(RifError):
    """A numerical verification exceeded its tolerance."""

    def __init__(self, message: str, offenders=()):
        self.offenders = list(offenders)
        super().__init__(message)
