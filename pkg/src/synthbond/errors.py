"""Exception hierarchy shared by every module of the package."""


class SynthBondError(Exception):
    """Base class for all package errors."""


class WellPosednessError(SynthBondError, ValueError):
    """A linear system defining a rate, risk price or bond is singular."""

    def __init__(self, matrix_name: str, detail: str = ""):
        self.matrix_name = matrix_name
        msg = f"matrix {matrix_name} is singular or ill-conditioned"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DegeneracyError(SynthBondError, ValueError):
    """A closed-form expression hits a zero denominator."""


class ConsistencyError(SynthBondError, ValueError):
    """Inputs that must agree with each other do not (e.g. a rate not generated by the market)."""


class StepSizeError(SynthBondError, ValueError):
    """A lattice probability left (0, 1); the time step is too coarse."""


class ProvenanceError(SynthBondError, ValueError):
    """A path set was simulated under a different model or measure than required."""


class NumericalError(SynthBondError, ArithmeticError):
    """A factorization or finite-difference evaluation failed numerically."""


class ConfigError(SynthBondError, ValueError):
    """A market file is malformed."""
