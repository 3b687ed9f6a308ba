"""Exception types shared across the package."""


class VesselmatError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(VesselmatError):
    """Image file is not one of the supported formats or cannot be decoded."""


class ManifestError(VesselmatError):
    """Dataset layout problem: a required file is missing or unreadable."""


class FovEstimationError(VesselmatError):
    """Automatic field-of-view estimation produced an implausible mask."""


class ConfigError(VesselmatError):
    """Invalid parameter value or combination, or malformed config file."""


class StratificationError(VesselmatError):
    """Trimap has no vessel pixels, so unknown pixels cannot be stratified."""


class PipelineError(VesselmatError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
