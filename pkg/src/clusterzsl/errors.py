"""Exception hierarchy shared by every module of the package."""


class ZslError(Exception):
    """Base class for all data and validation errors raised by clusterzsl."""


class MalformedHeader(ZslError):
    pass


class ArityMismatch(ZslError):
    pass


class NonNumericFeature(ZslError):
    pass


class UnknownLabelColumn(ZslError):
    pass


class UnknownLabel(ZslError):
    pass


class NotBinary(ZslError):
    pass


class EmptyInput(ZslError):
    pass


class DimMismatch(ZslError):
    pass


class KTooLarge(ZslError):
    pass


class EmptyCluster(ZslError):
    pass


class LengthMismatch(ZslError):
    pass


class NoTrainClassSamples(ZslError):
    pass


class NoTargetClassSamples(ZslError):
    pass


class EmptyCurve(ZslError):
    pass


class InvalidSpec(ZslError):
    pass


class ModelFormatError(ZslError):
    pass
