"""Exception types shared across the pipeline."""


class NarrativeError(Exception):
    """Base class for all pipeline errors."""


class EmptyKeywordList(NarrativeError):
    pass


class InvalidPattern(NarrativeError):
    pass


class MalformedEvent(NarrativeError):
    pass


class SourceUnavailable(NarrativeError):
    pass


class EmptyInput(NarrativeError):
    pass


class NonFiniteInput(NarrativeError):
    pass


class DimensionMismatch(NarrativeError):
    pass


class BatchTooLarge(NarrativeError):
    pass


class AdapterTimeout(NarrativeError):
    pass


class AdapterProtocolError(NarrativeError):
    pass


class EmptyCorpus(NarrativeError):
    pass


class EmptyVocabulary(NarrativeError):
    pass


class RankTooLarge(NarrativeError):
    pass


class EmptyMatrix(NarrativeError):
    pass


class VocabularyMismatch(NarrativeError):
    pass


class StoreUnavailable(NarrativeError):
    pass


class SnapshotLocked(NarrativeError):
    pass


class ConfigError(NarrativeError):
    pass
