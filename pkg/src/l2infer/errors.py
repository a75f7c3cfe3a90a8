"""Exception types shared across the package."""


class L2InferError(Exception):
    """Base class for all errors raised by l2infer."""


class DegenerateEstimateError(L2InferError, ValueError):
    """A scale or covariance estimate is zero or negative where it must be positive."""


class QuadratureError(L2InferError, RuntimeError):
    """Characteristic-function inversion failed to reach the requested accuracy."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved abs. error {achieved:.3g})")
        self.achieved = achieved


class CalibrationLimitError(L2InferError, ValueError):
    """The requested calibration is not available at this problem size."""
