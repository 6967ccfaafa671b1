"""Detect likely unwanted feature interactions in a software product line by
link prediction on its feature-interaction graph."""
from importlib import resources

from .graph import FeatureGraph, InteractionLabel, parse_graph

__version__ = "0.1.0"


def email_benchmark() -> FeatureGraph:
    """The bundled Email product line: 7 optional features, 10 unwanted interactions."""
    data = resources.files(__name__) / "data"
    return parse_graph(
        (data / "email_features.txt").read_text(encoding="utf-8"),
        (data / "email_interactions.txt").read_text(encoding="utf-8"),
        "email_features.txt",
        "email_interactions.txt",
    )


__all__ = ["FeatureGraph", "InteractionLabel", "parse_graph", "email_benchmark", "__version__"]
