"""
Exception hierarchy shared by every sketchnet module.

The CLI maps validation-time errors (UsageError, ArgumentError,
ManifestError) to exit code 2 and everything else to exit code 1.
"""

from __future__ import annotations


class SketchNetError(Exception):
    """Root of all sketchnet errors."""


class DimensionError(SketchNetError, ValueError):
    """A tensor or parameter shape does not satisfy an operation's contract."""


class ArgumentError(SketchNetError, ValueError):
    """A scalar argument or name is out of range."""


class UsageError(SketchNetError):
    """An API or CLI was driven incorrectly (bad config, stale cache, ...)."""


class ManifestError(SketchNetError, ValueError):
    """A dataset manifest line could not be parsed."""


class ImageLoadError(SketchNetError, OSError):
    """Base class for image decoding failures."""


class ImageNotFoundError(ImageLoadError):
    pass


class UnsupportedFormatError(ImageLoadError):
    pass


class CorruptImageError(ImageLoadError):
    pass


class ModelLoadError(SketchNetError):
    """A model file is truncated, corrupt or inconsistent."""


class ModelVersionError(ModelLoadError):
    """A model file was written by an unknown format version."""


class TrainingDivergedError(SketchNetError):
    """The objective became non-finite during training."""

    def __init__(self, iteration: int, value: float):
        self.iteration = iteration
        self.value = value
        super().__init__(
            f"non-finite loss {value!r} at iteration {iteration}; "
            "lower the learning rate or check the input scale"
        )
