"""Exception hierarchy shared across the toolkit."""


class KwsError(Exception):
    """Base class for all kwsforge errors."""


class MalformedWavError(KwsError):
    """WAV container is structurally broken (bad magic, chunk sizes, truncation)."""


class UnsupportedFormatError(KwsError):
    """WAV is well-formed but not PCM 16-bit mono 16 kHz; message names the field."""


class BadLengthError(KwsError):
    """Clip length violates an operation's precondition."""


class BadRangeError(KwsError):
    """Frequency range outside [0, sample_rate/2] or inverted."""


class ShapeMismatchError(KwsError):
    """Tensor shapes do not chain for the requested operation."""


class BadLabelError(KwsError):
    """Class index outside [0, n_labels)."""


class CorruptCheckpointError(KwsError):
    """Checkpoint file fails magic/version/shape validation."""


class MissingNoiseDirError(KwsError):
    """Corpus root lacks the _background_noise_ directory."""


class EmptyCorpusError(KwsError):
    """Corpus scan found no keyword-labeled WAV files."""


class ShiftOutOfRangeError(KwsError):
    """Requested time shift exceeds the configured bound."""


class NoiseTooShortError(KwsError):
    """Background noise clip is shorter than one second."""


class DivergenceError(KwsError):
    """Training loss became non-finite; carries the epoch where it happened."""

    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")


class BindFailureError(KwsError):
    """Service could not bind its address/port."""
