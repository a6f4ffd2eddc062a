"""Exception hierarchy shared across the toolkit.

ValidationError maps to CLI exit code 1, CapabilityError to exit code 2.
"""


class CurveProbeError(Exception):
    pass


class ValidationError(CurveProbeError):
    """Malformed or inconsistent input data (bad file, bad index, bad flag value)."""


class CapabilityError(CurveProbeError):
    """Request exceeds a documented limit of this implementation (e.g. dense eigensolver size)."""
