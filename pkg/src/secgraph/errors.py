"""Exception types shared across the package."""


class SecGraphError(Exception):
    """Base class for all scheme-level errors."""


# crypto
class PlaintextTooLong(SecGraphError):
    pass


# filters
class PrefixMismatch(SecGraphError):
    pass


class MaxDepthReached(SecGraphError):
    """A sub-filter at the deepest allowed trie level is still full.

    Unreachable at the default parameters; raise the fingerprint width if hit.
    """


class MalformedRecord(SecGraphError):
    pass


# edb
class DuplicateStag(SecGraphError):
    pass


class NotFound(SecGraphError):
    pass


class UnknownSubFilter(SecGraphError):
    pass


# enclave
class AlreadyInitialized(SecGraphError):
    pass


class NotSetUp(SecGraphError):
    pass


class CounterOverflow(SecGraphError):
    pass


class KeywordUnknown(SecGraphError):
    pass


class VictimNotFound(SecGraphError):
    pass


class PadCorruption(SecGraphError):
    pass


class ProtocolCorruption(SecGraphError):
    pass


class CacheOverflowUnsatisfiable(SecGraphError):
    pass


# boundary
class NotEstablished(SecGraphError):
    pass


class MalformedMessage(SecGraphError):
    pass


# ingest
class MalformedLine(SecGraphError):
    pass


class NameTooShort(SecGraphError):
    pass


class PatternTooShort(SecGraphError):
    pass


# oxt baseline
class NotBuilt(SecGraphError):
    pass
