"""Exception hierarchy.

ValidationError covers bad inputs (CLI exit code 2), NumericalError covers
failures of an otherwise well-posed computation (CLI exit code 3).
"""


class NotchlabError(Exception):
    pass


class ValidationError(NotchlabError):
    """Invalid argument, geometry or file content."""


class NumericalError(NotchlabError):
    """A computation could not be completed (pole, bracket, singularity...)."""


class PoleError(NumericalError):
    """Evaluation requested inside the guard band of a transfer-impedance pole."""

    def __init__(self, mode: str, f_pole: float, f: float):
        self.mode = mode
        self.f_pole = f_pole
        self.f = f
        super().__init__(
            f"f = {f:.6g} Hz lies within the pole guard band of the {mode} "
            f"mode pole at {f_pole:.6g} Hz"
        )


class BracketError(NumericalError):
    """Root bracket does not contain a sign change."""


class DegenerateNotchError(NumericalError):
    """Notch frequency coincides with the mean resonator frequency."""


class UnboundedCouplerError(NumericalError):
    """Coupler branch impedance is unbounded (vanishing coupling)."""


class CompositionPoleError(NumericalError):
    """A reflection branch sits exactly at Gamma = -1; admittance sum diverges."""


class PassivityError(NumericalError):
    """System matrix has a growing eigenmode; network is not passive."""


class SingularSystemError(NumericalError):
    """Linear steady-state system is singular at the requested drive."""
