"""
Network ingestion, validation and degree statistics.

A `Network` is an immutable simple undirected graph stored as a symmetric, hollow,
0/1 CSR adjacency matrix. Everything downstream reads `net.adjacency`; fitters also accept a
dense probability matrix in its place (see `as_matrix`).
"""
import math
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np
import polars as pl
import scipy.sparse as sp
from loguru import logger
from scipy.sparse.csgraph import connected_components

from netgof.core.exceptions import EdgeListParseError, IsolatedNodeError, NetworkValidationError
from netgof.schemas.reports import DegreeStats, KnnSpTuning
from netgof.services.utils.io import write_frame_with_header


Matrix = sp.csr_matrix | np.ndarray


@dataclass(frozen=True)
class Network:
    adjacency: sp.csr_matrix
    dropped_self_loops: int = 0
    collapsed_duplicates: int = 0

    def __post_init__(self) -> None:
        adj = self.adjacency
        if adj.shape[0] != adj.shape[1]:
            raise NetworkValidationError(f"adjacency must be square, got {adj.shape}")
        if adj.shape[0] < 3:
            raise NetworkValidationError(f"need at least 3 nodes, got {adj.shape[0]}")
        if adj.diagonal().any():
            raise NetworkValidationError("adjacency has self-loops")
        if (adj != adj.T).nnz:
            raise NetworkValidationError("adjacency is not symmetric")
        if adj.nnz and not np.all(adj.data == 1):
            raise NetworkValidationError("adjacency entries must be 0/1")

    @classmethod
    def from_edges(cls, n: int, edges) -> "Network":
        """Build from (i, j) pairs: self-loops dropped, duplicates and reversed pairs collapsed."""
        pairs = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
            raise NetworkValidationError(f"edge endpoints must lie in [0, {n})")

        loops = pairs[:, 0] == pairs[:, 1]
        pairs = np.sort(pairs[~loops], axis=1)
        unique = np.unique(pairs, axis=0)
        duplicates = len(pairs) - len(unique)

        rows = np.concatenate([unique[:, 0], unique[:, 1]])
        cols = np.concatenate([unique[:, 1], unique[:, 0]])
        adjacency = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        return cls(adjacency, dropped_self_loops=int(loops.sum()), collapsed_duplicates=duplicates)

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "Network":
        nodes = list(graph.nodes())
        index = {node: i for i, node in enumerate(nodes)}
        edges = [(index[u], index[v]) for u, v in graph.edges()]
        return cls.from_edges(len(nodes), edges)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return self.adjacency.nnz // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel().astype(np.int64)

    @property
    def edges(self) -> np.ndarray:
        """Unordered edges as an (m, 2) array with i < j."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        return np.column_stack([upper.row, upper.col]).astype(np.int64)


def as_matrix(data: "Network | Matrix") -> Matrix:
    """Adjacency of a Network, or a dense/sparse matrix passed through as float64."""
    if isinstance(data, Network):
        return data.adjacency
    if sp.issparse(data):
        return sp.csr_matrix(data, dtype=np.float64)
    return np.asarray(data, dtype=np.float64)


def row_sums(matrix: Matrix) -> np.ndarray:
    return np.asarray(matrix.sum(axis=1), dtype=np.float64).ravel()


# --------------------------------------------------------------------------------------
# Edge-list files
# --------------------------------------------------------------------------------------
def _parse_header(line: str, header: dict[str, int]) -> None:
    for token in line.lstrip("#").split():
        key, sep, value = token.partition("=")
        if sep and key in {"base", "n"} and value.isdigit():
            header[key] = int(value)


def load_edge_list(path: str | Path, one_based: bool | None = None) -> Network:
    """
    Read a whitespace-separated "i j" edge list.

    Comment lines start with '#'. A header comment "# base=1" declares 1-based node ids
    (0-based otherwise) and "# n=<N>" fixes the node count. `one_based` overrides the header.
    """
    path = Path(path)
    header: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []

    with path.open() as fh:
        for line_number, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                _parse_header(line, header)
                continue
            parts = line.split()
            if len(parts) < 2:
                raise EdgeListParseError(str(path), line_number, line)
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise EdgeListParseError(str(path), line_number, line) from None

    base = int(one_based) if one_based is not None else header.get("base", 0)
    edges = np.asarray(pairs, dtype=np.int64).reshape(-1, 2) - base
    if edges.size and edges.min() < 0:
        raise NetworkValidationError(f"{path}: node ids below the declared base {base}")

    n = header.get("n", int(edges.max()) + 1 if edges.size else 0)
    if n < 3:
        raise NetworkValidationError(f"{path}: network has {n} nodes; need at least 3")

    net = Network.from_edges(n, edges)
    if net.n_edges == 0:
        raise NetworkValidationError(f"{path}: network has no edges")
    if net.dropped_self_loops:
        logger.warning("Dropped {} self-loop(s) from {}", net.dropped_self_loops, path)
    if net.collapsed_duplicates:
        logger.info("Collapsed {} duplicate edge(s) from {}", net.collapsed_duplicates, path)

    logger.info("Loaded {}: n={} edges={}", path, net.n, net.n_edges)
    return net


def save_edge_list(net: Network, path: str | Path, one_based: bool = False) -> None:
    """Write one "i j" line per unordered edge (i < j), with header flags."""
    base = int(one_based)
    edges = net.edges + base
    frame = pl.DataFrame({"i": edges[:, 0], "j": edges[:, 1]})
    write_frame_with_header(frame, path, header=[f"# base={base}", f"# n={net.n}"], separator=" ")


def karate_network() -> Network:
    """Zachary's karate club network (34 nodes, 78 edges)."""
    return Network.from_networkx(nx.karate_club_graph())


def giant_component(net: Network) -> tuple[Network, np.ndarray]:
    """Restrict to the largest connected component; returns the kept original node indices."""
    _, labels = connected_components(net.adjacency, directed=False)
    sizes = np.bincount(labels)
    kept = np.flatnonzero(labels == np.argmax(sizes))
    sub = net.adjacency[kept][:, kept]
    logger.info("Giant component keeps {}/{} nodes", len(kept), net.n)
    return Network(sp.csr_matrix(sub)), kept


# --------------------------------------------------------------------------------------
# Degree statistics and KNN-SP tuning
# --------------------------------------------------------------------------------------
def degree_stats(net: Network) -> DegreeStats:
    degrees = net.degrees
    return DegreeStats(
        d_min=float(degrees.min()),
        d_max=float(degrees.max()),
        d_bar=2.0 * net.n_edges / net.n,
    )


def degree_stats_frame(stats: DegreeStats) -> pl.DataFrame:
    return pl.DataFrame([stats.model_dump()])


def round_half_away(x: float) -> int:
    """Nearest integer, halves rounded away from zero."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def knnsp_tuning_from_degrees(degrees: np.ndarray, k: int) -> KnnSpTuning:
    n = len(degrees)
    d_min = float(np.min(degrees))
    if d_min <= 0:
        isolated = np.flatnonzero(np.asarray(degrees) <= 0).tolist()
        raise IsolatedNodeError(isolated)
    d_bar = float(np.mean(degrees))

    alpha = 20.0 if n // k > 20 else 5.0
    m0 = round_half_away((k * (d_bar / d_min) / 250.0) ** 2)
    n_neighbors = max(1, round_half_away((m0 + 1) * min(10.0, n / 10.0)))
    return KnnSpTuning(n_neighbors=n_neighbors, alpha=alpha, m0=m0)


def knnsp_tuning(net: Network, k: int) -> KnnSpTuning:
    """KNN-SP (N, α) rule: α = 20 if [n/K] > 20 else 5; N = round((m0+1)·min(10, n/10))."""
    if k < 1:
        raise ValueError("k must be positive")
    return knnsp_tuning_from_degrees(net.degrees, k)
