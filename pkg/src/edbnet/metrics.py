"""Topological and weighted statistics of quarterly interbank networks.

All path-based quantities use binary hop counts on the directed graph.
"""
from __future__ import annotations

from collections import deque
from dataclasses import asdict, dataclass

import numpy as np

from .netcore import QuarterlyNetwork

SKEWNESS_ESTIMATOR = "population g1 = m3 / m2**1.5"
BETWEENNESS_NORMALIZATION = "(N-1)(N-2)"
RECIPROCITY_CONVENTION = "2 * mutual pairs / links"

BANK_METRIC_NAMES = (
    "in_degree", "out_degree", "reciprocal_degree", "degree",
    "in_strength", "out_strength", "strength",
    "binary_clustering", "weighted_clustering", "betweenness",
)


class DegenerateNetworkError(ValueError):
    pass


def _matrices(net) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(net, QuarterlyNetwork):
        W = net.dense()
    else:
        W = np.asarray(net, dtype=float)
    return W, W > 0


@dataclass(frozen=True)
class BankMetrics:
    """Per-bank statistics, one array entry per bank in network order."""

    bank_ids: tuple[str, ...]
    in_degree: np.ndarray
    out_degree: np.ndarray
    reciprocal_degree: np.ndarray
    degree: np.ndarray
    in_strength: np.ndarray
    out_strength: np.ndarray
    strength: np.ndarray
    binary_clustering: np.ndarray
    weighted_clustering: np.ndarray
    betweenness: np.ndarray

    def rows(self):
        """Long-format ``(bank, metric, value)`` triples."""
        for k, bank in enumerate(self.bank_ids):
            for name in BANK_METRIC_NAMES:
                yield bank, name, float(getattr(self, name)[k])


@dataclass(frozen=True)
class NetworkMetrics:
    quarter: str
    n_banks: int
    n_links: int
    density: float
    total_volume: float
    volume_per_bank: float
    degree_skewness: float
    reciprocity: float
    clustering: float
    weighted_clustering: float
    efficiency: float

    def as_dict(self) -> dict:
        return asdict(self)


def degrees(net):
    """In-, out-, reciprocal and total degree arrays."""
    _, A = _matrices(net)
    A = A.astype(np.int64)
    k_in = A.sum(axis=0)
    k_out = A.sum(axis=1)
    k_rec = (A * A.T).sum(axis=1)
    return k_in, k_out, k_rec, k_out + k_in - k_rec


def strengths(net):
    """In-, out- and total strength arrays."""
    W, _ = _matrices(net)
    s_in = W.sum(axis=0)
    s_out = W.sum(axis=1)
    return s_in, s_out, s_in + s_out


def bank_metrics(net: QuarterlyNetwork) -> BankMetrics:
    k_in, k_out, k_rec, k = degrees(net)
    s_in, s_out, s = strengths(net)
    return BankMetrics(
        bank_ids=net.bank_ids,
        in_degree=k_in, out_degree=k_out, reciprocal_degree=k_rec, degree=k,
        in_strength=s_in, out_strength=s_out, strength=s,
        binary_clustering=clustering_per_bank(net, "binary"),
        weighted_clustering=clustering_per_bank(net, "weighted"),
        betweenness=betweenness(net),
    )


def density(net) -> float:
    """Realised links over ``N(N-1)``."""
    _, A = _matrices(net)
    n = A.shape[0]
    if n < 2:
        raise DegenerateNetworkError("degenerate network: density needs at least 2 banks")
    return float(A.sum()) / (n * (n - 1))


def total_volume(net) -> float:
    W, _ = _matrices(net)
    return float(W.sum())


def skewness(values) -> float:
    """Population skewness ``m3 / m2**1.5``."""
    x = np.asarray(values, dtype=float)
    d = x - x.mean()
    m2 = np.mean(d**2)
    if x.size < 2 or m2 <= 1e-14 * max(1.0, np.mean(x**2)):
        raise ValueError("undefined skewness: zero variance")
    return float(np.mean(d**3) / m2**1.5)


def degree_skewness(net) -> float:
    """Skewness of the total-degree sequence."""
    return skewness(degrees(net)[3])


def reciprocity(net) -> float:
    """Share of links that are reciprocated: ``2 * sum_{i<j} a_ij a_ji / L``."""
    _, A = _matrices(net)
    L = int(A.sum())
    if L == 0:
        raise DegenerateNetworkError("reciprocity undefined without links")
    mutual_pairs = int(np.triu(A & A.T, k=1).sum())
    return 2.0 * mutual_pairs / L


def clustering_per_bank(net, mode: str = "binary") -> np.ndarray:
    """Undirected clustering of every bank.

    ``u_ij`` is the symmetrised binary adjacency (``mode='binary'``) or
    ``w_ij + w_ji`` (``mode='weighted'``); the denominator is always
    ``k_i**2 - k_i`` with ``k_i`` the total degree. Banks with ``k_i < 2``
    get 0.
    """
    W, A = _matrices(net)
    if mode == "binary":
        U = (A | A.T).astype(float)
    elif mode == "weighted":
        U = W + W.T
    else:
        raise ValueError(f"unknown clustering mode {mode!r}")
    k = (A | A.T).sum(axis=1).astype(float)
    triangles = np.einsum("ij,ih,jh->i", U, U, U)
    denom = k**2 - k
    out = np.zeros_like(k)
    ok = k >= 2
    out[ok] = triangles[ok] / denom[ok]
    return out


def clustering(net, mode: str = "binary") -> float:
    return float(clustering_per_bank(net, mode).mean())


def _successors(A: np.ndarray) -> list[np.ndarray]:
    return [np.flatnonzero(row) for row in A]


def _bfs(succ, source: int, n: int):
    """Hop distances, shortest-path counts and BFS order from ``source``."""
    dist = np.full(n, -1, dtype=np.int64)
    sigma = np.zeros(n)
    preds: list[list[int]] = [[] for _ in range(n)]
    order = []
    dist[source] = 0
    sigma[source] = 1.0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in succ[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return dist, sigma, preds, order


def shortest_path_lengths(net) -> np.ndarray:
    """All-pairs directed hop distances; ``inf`` where unreachable."""
    _, A = _matrices(net)
    n = A.shape[0]
    succ = _successors(A)
    D = np.full((n, n), np.inf)
    for s in range(n):
        dist = _bfs(succ, s, n)[0]
        reach = dist >= 0
        D[s, reach] = dist[reach]
    return D


def efficiency(net) -> float:
    """Mean inverse shortest-path length over ordered pairs ``i != j``."""
    _, A = _matrices(net)
    n = A.shape[0]
    if n < 2:
        raise DegenerateNetworkError("degenerate network: efficiency needs at least 2 banks")
    D = shortest_path_lengths(A)
    off = ~np.eye(n, dtype=bool)
    return float(np.sum(1.0 / D[off])) / (n * (n - 1))


def betweenness(net) -> np.ndarray:
    """Directed shortest-path betweenness normalised by ``(N-1)(N-2)``.

    Path counting and dependency accumulation follow Brandes' algorithm;
    sources are processed in index order so the floating-point reduction is
    deterministic.
    """
    _, A = _matrices(net)
    n = A.shape[0]
    bc = np.zeros(n)
    if n < 3:
        return bc
    succ = _successors(A)
    for s in range(n):
        _, sigma, preds, order = _bfs(succ, s, n)
        delta = np.zeros(n)
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    return bc / ((n - 1) * (n - 2))


def moving_average(series, window: int = 5) -> list[float]:
    """Centred simple moving average.

    Near the ends the window shrinks symmetrically to the widest centred
    window that fits, so the first and last points are left unchanged.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    x = np.asarray(series, dtype=float)
    n = x.size
    half = window // 2
    out = []
    for i in range(n):
        h = min(half, i, n - 1 - i)
        out.append(float(x[i - h:i + h + 1].mean()))
    return out


def network_metrics(net: QuarterlyNetwork) -> NetworkMetrics:
    """Whole-network summary. Skewness is NaN when the degree sequence is constant."""
    try:
        skew = degree_skewness(net)
    except ValueError:
        skew = float("nan")
    V = total_volume(net)
    return NetworkMetrics(
        quarter=net.quarter,
        n_banks=net.n_banks,
        n_links=net.n_links,
        density=density(net),
        total_volume=V,
        volume_per_bank=V / net.n_banks,
        degree_skewness=skew,
        reciprocity=reciprocity(net),
        clustering=clustering(net, "binary"),
        weighted_clustering=clustering(net, "weighted"),
        efficiency=efficiency(net),
    )


def metrics_metadata() -> dict:
    return {
        "skewness_estimator": SKEWNESS_ESTIMATOR,
        "betweenness_normalization": BETWEENNESS_NORMALIZATION,
        "reciprocity_convention": RECIPROCITY_CONVENTION,
        "path_lengths": "directed binary hop counts",
    }
