"""Streaming detection of small spatio-temporal event clusters in event-camera data."""

from .clusterer import (
    DetectionEvent,
    Freshness,
    OutOfBounds,
    OutOfOrderTimestamp,
    Outcome,
    StepOutcome,
    StreamClusterer,
    cluster_events,
)
from .model import ClusterParams, ClusterRecord, Event, SensorGeometry, chebyshev_neighbors
from .oracle import build_polyforest, equivalence_report, reference_clusters

__all__ = [
    "ClusterParams",
    "ClusterRecord",
    "DetectionEvent",
    "Event",
    "Freshness",
    "OutOfBounds",
    "OutOfOrderTimestamp",
    "Outcome",
    "SensorGeometry",
    "StepOutcome",
    "StreamClusterer",
    "build_polyforest",
    "chebyshev_neighbors",
    "cluster_events",
    "equivalence_report",
    "reference_clusters",
]
