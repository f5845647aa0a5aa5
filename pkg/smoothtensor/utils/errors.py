class SmoothTensorError(Exception):
    pass


class DimensionMismatchError(SmoothTensorError, ValueError):
    pass


class InstanceTooLargeError(SmoothTensorError):
    pass


class LinearProgramError(SmoothTensorError):
    pass


class InsufficientInliersError(SmoothTensorError):
    def __init__(self, selected: int, required: int):
        super().__init__(f'insufficient inliers detected: selected {selected}, required {required}')
        self.selected = selected
        self.required = required


class DegenerateSpectrumError(SmoothTensorError):
    pass


class RankOverestimateError(SmoothTensorError):
    pass


class RankDeficiencyError(SmoothTensorError):
    pass


class ReducibleChainError(SmoothTensorError):
    pass


class ResamplingExhaustedError(SmoothTensorError):
    pass


class UnresolvableScaleError(SmoothTensorError):
    pass


class ScaleAmbiguityError(SmoothTensorError):
    pass


class ConfigError(SmoothTensorError):
    pass


class MalformedFileError(SmoothTensorError):
    pass
