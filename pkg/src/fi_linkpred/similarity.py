"""Link-prediction similarity metrics over the unwanted-interaction graph.

Five local metrics (common neighbors, Jaccard, cosine, Adamic/Adar,
resource allocation), two global ones (Katz, random walk with restart) and
the quasi-local local-path index. All scores are computed on the subgraph of
``unwanted`` edges; wanted edges never contribute.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, asdict

import numpy as np

from .graph import FeatureGraph, InteractionLabel, adjacency, all_pairs, neighbors

log = logging.getLogger(__name__)


class MetricId(str, enum.Enum):
    COMMON_NEIGHBORS = "common_neighbors"
    JACCARD = "jaccard"
    COSINE = "cosine"
    ADAMIC_ADAR = "adamic_adar"
    RESOURCE_ALLOCATION = "resource_allocation"
    KATZ = "katz"
    RWR = "rwr"
    LOCAL_PATH = "local_path"

    def __str__(self) -> str:
        return self.value

    @property
    def column(self) -> str:
        return _COLUMNS[self]

    @property
    def category(self) -> str:
        if self in LOCAL_METRICS:
            return "local"
        if self is MetricId.LOCAL_PATH:
            return "quasi_local"
        return "global"


METRICS = tuple(MetricId)
LOCAL_METRICS = METRICS[:5]
# local_path is quasi-local but is grouped with the global metrics for comparisons
GLOBAL_METRICS = (MetricId.KATZ, MetricId.RWR, MetricId.LOCAL_PATH)

_COLUMNS = {
    MetricId.COMMON_NEIGHBORS: "cn",
    MetricId.JACCARD: "jaccard",
    MetricId.COSINE: "cosine",
    MetricId.ADAMIC_ADAR: "aa",
    MetricId.RESOURCE_ALLOCATION: "ra",
    MetricId.KATZ: "katz",
    MetricId.RWR: "rwr",
    MetricId.LOCAL_PATH: "lp",
}
_BY_COLUMN = {v: k for k, v in _COLUMNS.items()}


def metric_from_name(name: str) -> MetricId:
    if name in _BY_COLUMN:
        return _BY_COLUMN[name]
    return MetricId(name)


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class MetricParams:
    katz_beta: float = 0.05
    rwr_restart: float = 0.15
    lp_epsilon: float = 0.001
    rwr_tolerance: float = 1e-10
    katz_series_len: int = 50
    rwr_max_iter: int = 100_000

    def __post_init__(self):
        if not 0 < self.katz_beta < 1:
            raise MetricError(f"katz_beta must be in (0, 1), got {self.katz_beta}")
        if not 0 < self.rwr_restart < 1:
            raise MetricError(f"rwr_restart must be in (0, 1), got {self.rwr_restart}")
        if not self.lp_epsilon >= 0:
            raise MetricError(f"lp_epsilon must be >= 0, got {self.lp_epsilon}")
        if not self.rwr_tolerance > 0:
            raise MetricError(f"rwr_tolerance must be > 0, got {self.rwr_tolerance}")
        if int(self.katz_series_len) < 1:
            raise MetricError("katz_series_len must be >= 1")
        if int(self.rwr_max_iter) < 1:
            raise MetricError("rwr_max_iter must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


# -- pairwise local metrics ------------------------------------------------

def _pair_sets(g: FeatureGraph, x: str, y: str):
    if x == y:
        raise MetricError(f"similarity of {x!r} with itself is undefined")
    return neighbors(g, x, InteractionLabel.UNWANTED), neighbors(g, y, InteractionLabel.UNWANTED)


def common_neighbors(g: FeatureGraph, x: str, y: str) -> float:
    nx_, ny = _pair_sets(g, x, y)
    return float(len(nx_ & ny))


def jaccard(g: FeatureGraph, x: str, y: str) -> float:
    nx_, ny = _pair_sets(g, x, y)
    union = nx_ | ny
    return len(nx_ & ny) / len(union) if union else 0.0


def cosine(g: FeatureGraph, x: str, y: str) -> float:
    nx_, ny = _pair_sets(g, x, y)
    if not nx_ or not ny:
        return 0.0
    return len(nx_ & ny) / math.sqrt(len(nx_) * len(ny))


def adamic_adar(g: FeatureGraph, x: str, y: str) -> float:
    nx_, ny = _pair_sets(g, x, y)
    terms = []
    for z in sorted(nx_ & ny):
        k = len(neighbors(g, z, InteractionLabel.UNWANTED))
        assert k >= 2, "a shared neighbor of two distinct nodes has degree >= 2"
        terms.append(1.0 / math.log(k))
    return math.fsum(terms)


def resource_allocation(g: FeatureGraph, x: str, y: str) -> float:
    nx_, ny = _pair_sets(g, x, y)
    return math.fsum(1.0 / len(neighbors(g, z, InteractionLabel.UNWANTED)) for z in sorted(nx_ & ny))


# -- matrix forms ---------------------------------------------------------

def _adj(g: FeatureGraph) -> np.ndarray:
    return np.array(adjacency(g, InteractionLabel.UNWANTED).entries)


def local_matrices(A: np.ndarray) -> dict:
    k = A.sum(axis=1)
    cn = A @ A
    union = k[:, None] + k[None, :] - cn
    with np.errstate(divide="ignore", invalid="ignore"):
        jac = np.where(union > 0, cn / np.where(union > 0, union, 1), 0.0)
        kk = np.sqrt(np.outer(k, k))
        cos = np.where(kk > 0, cn / np.where(kk > 0, kk, 1), 0.0)
    # fsum gives exactly rounded sums, independent of summation order
    n = A.shape[0]
    nbrs = [np.flatnonzero(A[i]) for i in range(n)]
    aa = np.zeros_like(A)
    ra = np.zeros_like(A)
    for i in range(n):
        for j in range(i + 1, n):
            shared = np.intersect1d(nbrs[i], nbrs[j], assume_unique=True)
            if shared.size:
                aa[i, j] = aa[j, i] = math.fsum(1.0 / math.log(k[z]) for z in shared)
                ra[i, j] = ra[j, i] = math.fsum(1.0 / k[z] for z in shared)
    return {
        MetricId.COMMON_NEIGHBORS: cn,
        MetricId.JACCARD: jac,
        MetricId.COSINE: cos,
        MetricId.ADAMIC_ADAR: aa,
        MetricId.RESOURCE_ALLOCATION: ra,
    }


def spectral_radius(A: np.ndarray, tol: float = 1e-12, max_iter: int = 10_000) -> float:
    """Largest eigenvalue of a nonnegative symmetric matrix by power iteration.

    Iterates on A + I so bipartite graphs (eigenvalues +-rho) still converge.
    """
    n = A.shape[0]
    if n == 0 or not A.any():
        return 0.0
    M = A + np.eye(n)
    v = np.ones(n) / math.sqrt(n)
    lam = 0.0
    for _ in range(max_iter):
        w = M @ v
        new_lam = float(v @ w)
        norm = np.linalg.norm(w)
        v = w / norm
        if abs(new_lam - lam) <= tol * max(1.0, new_lam):
            lam = new_lam
            break
        lam = new_lam
    return lam - 1.0


def _katz_from_adj(A: np.ndarray, params: MetricParams) -> np.ndarray:
    n = A.shape[0]
    rho = spectral_radius(A)
    beta = params.katz_beta
    if rho > 0 and beta * rho >= 1.0:
        raise MetricError(f"katz_beta={beta} outside convergence range: must be < 1/rho(A) = {1 / rho:.6g} "
                          f"(estimated rho(A) = {rho:.6g})")
    M = np.eye(n) - beta * A
    S = np.linalg.solve(M, np.eye(n)) - np.eye(n)
    assert np.all(np.isfinite(S))
    return (S + S.T) / 2


def katz(g: FeatureGraph, params: MetricParams = MetricParams()) -> np.ndarray:
    """Katz index (I - beta*A)^-1 - I: all walks weighted by beta**length."""
    return _katz_from_adj(_adj(g), params)


def katz_series_oracle(g: FeatureGraph, params: MetricParams = MetricParams()) -> np.ndarray:
    """Truncated walk series sum_{l=1..L} beta^l A^l by repeated multiplication."""
    A = _adj(g)
    beta = params.katz_beta
    term = np.eye(A.shape[0])
    total = np.zeros_like(A)
    for _ in range(int(params.katz_series_len)):
        term = beta * (term @ A)
        total += term
    return total


def transition_matrix(A: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Row-stochastic transition matrix; isolated rows become uniform."""
    n = A.shape[0]
    k = A.sum(axis=1)
    isolated = [i for i in range(n) if k[i] == 0]
    P = np.empty_like(A)
    for i in range(n):
        P[i] = A[i] / k[i] if k[i] > 0 else 1.0 / n
    return P, isolated


def _rwr_vectors_from_adj(A: np.ndarray, params: MetricParams, names=None) -> np.ndarray:
    n = A.shape[0]
    P, isolated = transition_matrix(A)
    if isolated:
        labels = [names[i] for i in isolated] if names is not None else isolated
        log.info("rwr: isolated nodes %s use a uniform transition row", labels)
    c = params.rwr_restart
    PT = P.T
    restart = c * np.eye(n)
    Q = np.eye(n)  # column x is the visiting distribution of a walk seeded at x
    for _ in range(int(params.rwr_max_iter)):
        Q = restart + (1 - c) * (PT @ Q)
        resid = np.max(np.abs(restart + (1 - c) * (PT @ Q) - Q)) if n else 0.0
        # half the tolerance leaves headroom for rounding when callers re-check
        if resid < 0.5 * params.rwr_tolerance:
            return Q
    raise MetricError(f"rwr did not converge within {params.rwr_max_iter} iterations (residual {resid:.3g})")


def rwr_vectors(g: FeatureGraph, params: MetricParams = MetricParams()) -> np.ndarray:
    """Stationary vectors; column x solves q = c*e_x + (1-c) P^T q."""
    return _rwr_vectors_from_adj(_adj(g), params, g.features)


def rwr(g: FeatureGraph, params: MetricParams = MetricParams()) -> np.ndarray:
    Q = rwr_vectors(g, params)
    # S_xy = q_x[y] + q_y[x]
    return Q + Q.T


def _lp_from_adj(A: np.ndarray, params: MetricParams) -> np.ndarray:
    A2 = A @ A
    return A2 + params.lp_epsilon * (A2 @ A)


def local_path(g: FeatureGraph, params: MetricParams = MetricParams()) -> np.ndarray:
    return _lp_from_adj(_adj(g), params)


def metric_matrices(g: FeatureGraph, params: MetricParams = MetricParams()) -> dict:
    """All eight n x n score matrices on the unwanted subgraph, keyed by MetricId."""
    A = _adj(g)
    out = local_matrices(A)
    out[MetricId.KATZ] = _katz_from_adj(A, params)
    Q = _rwr_vectors_from_adj(A, params, g.features)
    out[MetricId.RWR] = Q + Q.T
    out[MetricId.LOCAL_PATH] = _lp_from_adj(A, params)
    return {m: out[m] for m in METRICS}


# -- tables ---------------------------------------------------------------

@dataclass(frozen=True)
class SimilarityTable:
    pairs: list  # [(a, b)] in canonical all_pairs order
    scores: np.ndarray  # shape (len(pairs), 8), columns in METRICS order
    labels: list  # InteractionLabel per pair
    columns: tuple = METRICS

    def __len__(self) -> int:
        return len(self.pairs)

    def column(self, metric: MetricId) -> np.ndarray:
        return self.scores[:, self.columns.index(MetricId(metric))]

    def row(self, a: str, b: str) -> dict:
        key = (a, b) if a < b else (b, a)
        i = self.pairs.index(key)
        return {m: float(self.scores[i, j]) for j, m in enumerate(self.columns)}

    def to_csv(self, header_comments=()) -> str:
        return table_to_csv(self.pairs, self.scores, self.labels, self.columns, header_comments)


def format_real(x: float) -> str:
    return format(float(x), ".12g")


def table_to_csv(pairs, scores, labels, columns=METRICS, header_comments=()) -> str:
    lines = [f"# {c}" for c in header_comments]
    lines.append(",".join(["feature_a", "feature_b"] + [m.column for m in columns] + ["label"]))
    for (a, b), row, lab in zip(pairs, scores, labels):
        lines.append(",".join([a, b] + [format_real(v) for v in row] + [InteractionLabel(lab).value]))
    return "\n".join(lines) + "\n"


def read_table_csv(text: str) -> SimilarityTable:
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise ValueError("empty table")
    header = rows[0].split(",")
    if header[:2] != ["feature_a", "feature_b"] or header[-1] != "label":
        raise ValueError(f"unexpected header {rows[0]!r}")
    cols = tuple(metric_from_name(h) for h in header[2:-1])
    pairs, scores, labels = [], [], []
    for r in rows[1:]:
        parts = r.split(",")
        pairs.append((parts[0], parts[1]))
        scores.append([float(v) for v in parts[2:-1]])
        labels.append(InteractionLabel(parts[-1]))
    return SimilarityTable(pairs, np.array(scores, dtype=float).reshape(len(pairs), len(cols)), labels, cols)


def pair_scores(mats: dict, idx: dict, pairs) -> np.ndarray:
    out = np.empty((len(pairs), len(METRICS)))
    for r, (a, b) in enumerate(pairs):
        i, j = idx[a], idx[b]
        for c, m in enumerate(METRICS):
            out[r, c] = mats[m][i, j]
    return out


def score_table(g: FeatureGraph, params: MetricParams = MetricParams()) -> SimilarityTable:
    """Eight scores for every unordered feature pair, on the unwanted subgraph."""
    if g.n == 0:
        raise MetricError("cannot score an empty graph")
    labelled = all_pairs(g)
    pairs = [(a, b) for a, b, _ in labelled]
    labels = [lab for _, _, lab in labelled]
    if not pairs:
        return SimilarityTable([], np.zeros((0, len(METRICS))), [])
    mats = metric_matrices(g, params)
    scores = pair_scores(mats, g.index(), pairs)
    if not np.all(np.isfinite(scores)):
        raise MetricError("non-finite similarity score")
    return SimilarityTable(pairs, scores, labels)
