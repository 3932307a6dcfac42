"""Typed failures raised across the package."""


class QpedlError(Exception):
    exit_code = 3


class GateError(QpedlError):
    exit_code = 4


class NotInUnitInterval(QpedlError, ValueError):
    pass


class DegenerateAtPrecision(QpedlError):
    pass


class RationalResonance(QpedlError):
    pass


class OverflowGuard(QpedlError):
    pass


class NotHomotopicToIdentity(QpedlError):
    pass


class GridTooCoarse(QpedlError):
    pass


class NonHermitianPotential(QpedlError, ValueError):
    pass


class BoxTooLarge(QpedlError):
    pass


class NoConvergence(QpedlError):
    pass


class TooFewSamples(QpedlError):
    pass


class NoFiniteCertificate(QpedlError):
    pass


class IncompleteDecomposition(QpedlError):
    pass


class SmallnessGateFailed(GateError):
    pass


class MultipleResonances(QpedlError):
    pass


class GateFailed(GateError):
    pass


class StepCapReached(QpedlError):
    pass


class DcViolatedMidRun(GateError):
    pass


class NotBracketed(QpedlError):
    pass


class InconsistentInput(QpedlError, ValueError):
    pass


class RationalRotation(QpedlError):
    pass


class ResidualTooLarge(QpedlError):
    pass


class HyperbolicConstant(QpedlError):
    pass
