"""Exception hierarchy shared by every layer."""


class MoseError(Exception):
    pass


# codecs

class CodecError(MoseError, ValueError):
    pass


class InvalidGapError(CodecError):
    pass


class TruncatedStreamError(CodecError):
    pass


class UndefinedParameterError(CodecError):
    pass


class LexiconOrderError(MoseError, ValueError):
    pass


# index construction and storage

class MalformedRecordError(MoseError, ValueError):
    pass


class CorruptRunError(MoseError):
    def __init__(self, run_index: int, message: str = "run out of order"):
        super().__init__(f"corrupt run {run_index}: {message}")
        self.run_index = run_index


class CorruptIndexError(MoseError):
    pass


class BadMagicError(CorruptIndexError):
    pass


class BadVersionError(CorruptIndexError):
    pass


class TruncatedIndexError(CorruptIndexError):
    pass


# queries

class QueryParseError(MoseError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class InvariantViolation(MoseError, AssertionError):
    pass


# wire protocol

class ProtocolError(MoseError):
    pass


class ShortFrameError(ProtocolError):
    pass


class FrameTooLargeError(ProtocolError):
    pass


class BadTypeError(ProtocolError):
    pass


class CountMismatchError(ProtocolError):
    pass


class TrailingBytesError(ProtocolError):
    pass


class BadPayloadError(ProtocolError):
    pass


# brokers and runtime

class QueryFailed(MoseError):
    pass


class QueueClosed(MoseError):
    pass


class GatherTimeout(MoseError, TimeoutError):
    pass


class PartialClusterError(MoseError):
    pass


class ConfigError(MoseError, ValueError):
    pass


class LaunchError(MoseError):
    pass
