"""Exception types shared across the toolkit."""


class AuditError(Exception):
    """Base class for all toolkit errors."""


class ManifestError(AuditError):
    """Malformed, inconsistent, or incomplete dataset manifest."""


class EmbeddingIOError(AuditError):
    """Unreadable or corrupt embedding file."""


class MaskError(AuditError):
    """Unusable mask raster or incompatible mask pair."""


class LexiconError(AuditError):
    """Structurally invalid gender lexicon."""


class MetricError(AuditError):
    """Metric preconditions violated (shapes, sample counts, parameters)."""
