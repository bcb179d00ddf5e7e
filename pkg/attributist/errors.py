"""Exceptions raised by attributist."""

from __future__ import annotations

from typing import Optional


class AttributistError(Exception):
    """Base class for every error attributist raises on purpose."""

    exit_code = 1


class ConfigError(AttributistError):
    pass


class ManifestError(AttributistError):
    pass


class PreprocessError(AttributistError):
    pass


class IngestError(AttributistError):
    """A manifest entry could not be turned into a Document."""

    def __init__(self, title: str, message: str):
        super().__init__(f"{title}: {message}")
        self.title = title


class FeatureError(AttributistError):
    pass


class MeasureError(AttributistError):
    """A distance could not be computed for the given inputs."""

    def __init__(self, message: str, measure: Optional[str] = None):
        super().__init__(message)
        self.measure = measure


class ClusteringError(AttributistError):
    pass


class TreeParseError(AttributistError):
    pass


class AttributionError(AttributistError):
    pass


class InvariantError(AttributistError):
    """An internal invariant does not hold; this is a bug, not bad input."""

    exit_code = 2
