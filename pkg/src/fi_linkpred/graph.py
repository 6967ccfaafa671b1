"""Feature-interaction graph: ingestion, neighbor queries and adjacency matrices."""
from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

_NAME_RE = re.compile(r"^[A-Za-z0-9_]+$")


class InteractionLabel(str, enum.Enum):
    UNWANTED = "unwanted"
    WANTED = "wanted"

    def __str__(self) -> str:
        return self.value


class GraphError(ValueError):
    """Raised for malformed or inconsistent graph input."""

    def __init__(self, message: str, line: Optional[int] = None, source: str = ""):
        self.line = line
        self.source = source
        where = ""
        if source:
            where = source
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class AdjacencyMatrix:
    entries: np.ndarray
    node_index: dict

    @property
    def nodes(self) -> list[str]:
        return sorted(self.node_index, key=self.node_index.__getitem__)


@dataclass(frozen=True)
class FeatureGraph:
    """Undirected labeled graph of product-line features.

    ``features`` holds the interaction-graph nodes in lexicographic order.
    Features flagged mandatory are carried in ``mandatory_features`` but are
    not nodes, since commonalities are present in every product.
    """

    features: tuple[str, ...]
    edges: dict = field(default_factory=dict)  # (a, b) with a < b -> InteractionLabel
    mandatory_features: tuple[str, ...] = ()

    def __post_init__(self):
        feats = tuple(sorted(self.features))
        if len(set(feats)) != len(feats):
            raise GraphError("duplicate feature name")
        object.__setattr__(self, "features", feats)
        known = set(feats)
        edges = {}
        for (a, b), label in self.edges.items():
            if a == b:
                raise GraphError(f"self-loop on {a!r}")
            for name in (a, b):
                if name not in known:
                    raise GraphError(f"edge references unknown feature {name!r}")
            key = _pair(a, b)
            if key in edges:
                raise GraphError(f"duplicate edge {key[0]}-{key[1]}")
            edges[key] = InteractionLabel(label)
        object.__setattr__(self, "edges", dict(sorted(edges.items())))
        object.__setattr__(self, "mandatory_features", tuple(sorted(self.mandatory_features)))

    @classmethod
    def from_edges(cls, features: Iterable[str], edges: Iterable, label=InteractionLabel.UNWANTED):
        """Build a graph from ``(a, b)`` or ``(a, b, label)`` tuples."""
        emap = {}
        for e in edges:
            if len(e) == 3:
                a, b, lab = e
            else:
                (a, b), lab = e, label
            key = _pair(a, b)
            if key in emap:
                raise GraphError(f"duplicate edge {key[0]}-{key[1]}")
            emap[key] = InteractionLabel(lab)
        return cls(tuple(features), emap)

    @property
    def n(self) -> int:
        return len(self.features)

    def index(self) -> dict:
        return {f: i for i, f in enumerate(self.features)}

    def edge_list(self, filter: Optional[InteractionLabel] = None) -> list[tuple[str, str]]:
        return [e for e, lab in self.edges.items() if filter is None or lab == filter]

    def unwanted_subgraph(self) -> "FeatureGraph":
        """Same nodes, only the unwanted edges. This is the graph the metrics see."""
        return FeatureGraph(
            self.features,
            {e: lab for e, lab in self.edges.items() if lab == InteractionLabel.UNWANTED},
            self.mandatory_features,
        )

    def without_edge(self, a: str, b: str) -> "FeatureGraph":
        key = _pair(a, b)
        if key not in self.edges:
            raise GraphError(f"no edge {key[0]}-{key[1]}")
        edges = dict(self.edges)
        del edges[key]
        return FeatureGraph(self.features, edges, self.mandatory_features)

    def with_edges(self, edges: Iterable, label=InteractionLabel.UNWANTED) -> "FeatureGraph":
        new = dict(self.edges)
        for a, b in edges:
            new[_pair(a, b)] = InteractionLabel(label)
        return FeatureGraph(self.features, new, self.mandatory_features)

    def digest(self) -> str:
        feats_doc, inter_doc = serialize_graph(self)
        return hashlib.sha256(f"{feats_doc}\0{inter_doc}".encode()).hexdigest()

    def _check(self, f: str) -> None:
        if f not in self.features:
            raise GraphError(f"unknown feature {f!r}")


def parse_features(text: str, source: str = "features") -> tuple[list[str], list[str]]:
    """Parse ``name[,mandatory]`` records. Returns (optional, mandatory)."""
    seen = {}
    optional, mandatory = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        name = parts[0]
        if not _NAME_RE.match(name):
            raise GraphError(f"malformed feature name {name!r}", lineno, source)
        if len(parts) > 2 or (len(parts) == 2 and parts[1].lower() != "mandatory"):
            raise GraphError(f"malformed feature record {raw.strip()!r}", lineno, source)
        if name in seen:
            raise GraphError(f"duplicate feature {name!r} (first on line {seen[name]})", lineno, source)
        seen[name] = lineno
        (mandatory if len(parts) == 2 else optional).append(name)
    return optional, mandatory


def parse_interactions(text: str, source: str = "interactions") -> list[tuple[str, str, InteractionLabel, int]]:
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise GraphError(f"expected 'featureA,featureB,label', got {raw.strip()!r}", lineno, source)
        a, b, lab = parts
        for name in (a, b):
            if not _NAME_RE.match(name):
                raise GraphError(f"malformed feature name {name!r}", lineno, source)
        try:
            label = InteractionLabel(lab.lower())
        except ValueError:
            raise GraphError(f"unknown label {lab!r}", lineno, source) from None
        records.append((a, b, label, lineno))
    return records


def parse_graph(features_doc: str, interactions_doc: str,
                features_source: str = "features", interactions_source: str = "interactions") -> FeatureGraph:
    optional, mandatory = parse_features(features_doc, features_source)
    known = set(optional)
    mand = set(mandatory)
    edges = {}
    for a, b, label, lineno in parse_interactions(interactions_doc, interactions_source):
        for name in (a, b):
            if name in mand:
                raise GraphError(f"interaction references mandatory feature {name!r}", lineno, interactions_source)
            if name not in known:
                raise GraphError(f"unknown feature {name!r}", lineno, interactions_source)
        if a == b:
            raise GraphError(f"self-loop on {a!r}", lineno, interactions_source)
        key = _pair(a, b)
        if key in edges:
            raise GraphError(f"duplicate edge {key[0]}-{key[1]}", lineno, interactions_source)
        edges[key] = label
    return FeatureGraph(tuple(optional), edges, tuple(mandatory))


def serialize_graph(g: FeatureGraph) -> tuple[str, str]:
    """Canonical (features_doc, interactions_doc)."""
    feats = [f for f in g.features] + [f"{m},mandatory" for m in g.mandatory_features]
    feats_doc = "".join(f + "\n" for f in sorted(feats))
    inter_doc = "".join(f"{a},{b},{lab.value}\n" for (a, b), lab in g.edges.items())
    return feats_doc, inter_doc


def _matches(label: InteractionLabel, filter) -> bool:
    return filter is None or filter == "all" or InteractionLabel(filter) == label


def neighbors(g: FeatureGraph, f: str, filter=None) -> set[str]:
    """Neighbors of ``f`` over edges whose label matches ``filter`` (None / "all" = any)."""
    g._check(f)
    out = set()
    for (a, b), lab in g.edges.items():
        if not _matches(lab, filter):
            continue
        if a == f:
            out.add(b)
        elif b == f:
            out.add(a)
    return out


def degree(g: FeatureGraph, f: str, filter=None) -> int:
    return len(neighbors(g, f, filter))


def adjacency(g: FeatureGraph, filter=None) -> AdjacencyMatrix:
    if g.n == 0:
        raise GraphError("adjacency of an empty graph")
    idx = g.index()
    A = np.zeros((g.n, g.n), dtype=np.float64)
    for (a, b), lab in g.edges.items():
        if _matches(lab, filter):
            A[idx[a], idx[b]] = A[idx[b], idx[a]] = 1.0
    A.setflags(write=False)
    return AdjacencyMatrix(A, idx)


def all_pairs(g: FeatureGraph) -> list[tuple[str, str, InteractionLabel]]:
    """Every unordered node pair; pairs without a documented edge count as wanted."""
    out = []
    feats = g.features
    for i in range(len(feats)):
        for j in range(i + 1, len(feats)):
            key = (feats[i], feats[j])
            out.append((feats[i], feats[j], g.edges.get(key, InteractionLabel.WANTED)))
    return out
