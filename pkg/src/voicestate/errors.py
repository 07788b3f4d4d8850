"""Exception hierarchy shared by all pipeline stages."""


class VoiceStateError(Exception):
    """Base class for every error raised by this package."""


# audio
class MalformedFile(VoiceStateError):
    pass


class UnsupportedEncoding(VoiceStateError):
    pass


class EmptyClip(VoiceStateError):
    pass


class NoVoicedContent(VoiceStateError):
    pass


# lld
class ClipTooShort(VoiceStateError):
    pass


class GridMismatch(VoiceStateError):
    pass


# functionals
class TooFewFrames(VoiceStateError):
    pass


class UnknownDescriptor(VoiceStateError):
    pass


# classifier
class SingleClass(VoiceStateError):
    pass


class DimensionMismatch(VoiceStateError):
    pass


class EmptyMatrix(VoiceStateError):
    pass


# evaluation
class NonPositiveDays(VoiceStateError):
    pass


class TooFewSpeakers(VoiceStateError):
    pass


class MisalignedManifest(VoiceStateError):
    pass


# corpus
class ManifestError(VoiceStateError):
    """Any validation failure while reading a manifest."""


class DuplicateId(ManifestError):
    pass


class MissingColumn(ManifestError):
    pass


class BadLevel(ManifestError):
    pass


class BadSentenceId(ManifestError):
    pass


class IoFailure(VoiceStateError):
    pass


class MissingLabel(VoiceStateError):
    """A manifest row lacks the label required by the requested task."""
