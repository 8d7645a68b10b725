"""Per-document word co-occurrence networks and their structural features.

Each document becomes a directed weighted network: nodes are its distinct
stems, and every adjacent stem pair within a sentence adds one unit of
weight to the directed edge between them. Network-level (macro) measures,
per-node (micro) measures and triangle-based (mezzo) measures are
computed on that graph and aggregated into a fixed-length feature vector
by one of three schemes: average, quartiles, or a ten-bin histogram.

Conventions used throughout (documented once here):
  * path-based measures (average shortest path, efficiencies, closeness,
    betweenness) use unweighted hop distances on the directed graph;
  * unreachable pairs contribute nothing to distance sums and 1/inf = 0
    to efficiency sums;
  * self-loops (a stem repeated adjacently) count toward degrees and
    strengths but are ignored by path, triangle and clustering measures;
  * triangle measures (transitivity, clustering) use the undirected
    projection of the graph;
  * the inverse participation ratio uses the squared form
    sum_j (w_ij / s_i)^2;
  * closeness of a node reaching r-1 of the other N-1 nodes with total
    hop distance D is (r-1) / ((N-1) * D), zero when it reaches nothing;
  * the PageRank recurrence C(v) = (1-d) + d * sum C(u)/outdeg(u) is
    iterated as printed (scores average 1, not sum 1), with dangling
    mass redistributed uniformly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .matrix import FeatureMatrix
from .preprocess import ProcessedDocument

MACRO_NAMES = [
    "n_nodes",
    "n_edges",
    "avg_degree",
    "avg_shortest_path",
    "global_efficiency",
    "local_efficiency",
    "transitivity",
]

NODE_MEASURE_NAMES = [
    "k_in",
    "k_out",
    "s_in",
    "s_out",
    "e_in",
    "e_out",
    "y_in",
    "y_out",
    "betweenness",
    "closeness",
    "pagerank",
    "clustering",
]

QUARTILE_STATS = ["min", "q1", "median", "q3", "max"]
HISTOGRAM_BINS = 10

SCHEME_LENGTHS = {
    "average": len(MACRO_NAMES) + len(NODE_MEASURE_NAMES),
    "quartiles": len(MACRO_NAMES) + len(NODE_MEASURE_NAMES) * len(QUARTILE_STATS),
    "histogram": len(MACRO_NAMES) + len(NODE_MEASURE_NAMES) * HISTOGRAM_BINS,
}


@dataclass
class LanguageNetwork:
    """Directed weighted co-occurrence network of one document."""

    nodes: list[str]
    edges: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def out_adjacency(self, include_self_loops: bool = False) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for (src, dst) in self.edges:
            if src == dst and not include_self_loops:
                continue
            adj[src].append(dst)
        for lst in adj:
            lst.sort()
        return adj

    def undirected_adjacency(self) -> list[set[int]]:
        """Collapse edge directions; self-loops dropped."""
        adj: list[set[int]] = [set() for _ in range(self.n_nodes)]
        for (src, dst) in self.edges:
            if src != dst:
                adj[src].add(dst)
                adj[dst].add(src)
        return adj


def build_network(doc: ProcessedDocument) -> LanguageNetwork:
    """Link each adjacent stem pair within a sentence, accumulating weights."""
    index: dict[str, int] = {}
    nodes: list[str] = []
    edges: dict[tuple[int, int], int] = {}
    for sentence in doc.sentences:
        for stem in sentence:
            if stem not in index:
                index[stem] = len(nodes)
                nodes.append(stem)
        for left, right in zip(sentence, sentence[1:]):
            key = (index[left], index[right])
            edges[key] = edges.get(key, 0) + 1
    return LanguageNetwork(nodes=nodes, edges=edges)


def write_edge_list(net: LanguageNetwork, path: str | Path) -> None:
    """Dump the network as 'src dst weight' lines."""
    lines = [
        f"{net.nodes[src]} {net.nodes[dst]} {weight}"
        for (src, dst), weight in sorted(net.edges.items())
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def _bfs_hops(adj: list[list[int]], source: int) -> list[int]:
    """Hop distances from source; -1 marks unreachable nodes."""
    dist = [-1] * len(adj)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _pair_distance_sums(adj: list[list[int]]) -> tuple[float, float]:
    """(sum of finite pair distances, sum of inverse distances)."""
    total = 0.0
    inverse = 0.0
    for source in range(len(adj)):
        for target, d in enumerate(_bfs_hops(adj, source)):
            if target != source and d > 0:
                total += d
                inverse += 1.0 / d
    return total, inverse


def avg_shortest_path(net: LanguageNetwork) -> float:
    """Mean hop distance over ordered reachable pairs, by 1/(N(N-1))."""
    n = net.n_nodes
    if n < 2:
        return 0.0
    total, _ = _pair_distance_sums(net.out_adjacency())
    return total / (n * (n - 1))


def global_efficiency(net: LanguageNetwork) -> float:
    n = net.n_nodes
    if n < 2:
        return 0.0
    _, inverse = _pair_distance_sums(net.out_adjacency())
    return inverse / (n * (n - 1))


def _subgraph_efficiency(adj: list[list[int]], members: list[int]) -> float:
    """Global efficiency of the directed subgraph induced by members."""
    m = len(members)
    if m < 2:
        return 0.0
    position = {node: i for i, node in enumerate(members)}
    sub_adj: list[list[int]] = [[] for _ in range(m)]
    for node in members:
        for neighbor in adj[node]:
            if neighbor in position:
                sub_adj[position[node]].append(position[neighbor])
    _, inverse = _pair_distance_sums(sub_adj)
    return inverse / (m * (m - 1))


def local_efficiency(net: LanguageNetwork) -> float:
    """Mean over nodes of the efficiency of their neighborhood subgraph."""
    n = net.n_nodes
    if n == 0:
        return 0.0
    adj = net.out_adjacency()
    undirected = net.undirected_adjacency()
    total = 0.0
    for node in range(n):
        members = sorted(undirected[node])
        total += _subgraph_efficiency(adj, members)
    return total / n


def degrees_strengths(
    net: LanguageNetwork,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Distinct in/out neighbor counts and incident weight sums."""
    n = net.n_nodes
    k_in = np.zeros(n)
    k_out = np.zeros(n)
    s_in = np.zeros(n)
    s_out = np.zeros(n)
    for (src, dst), weight in net.edges.items():
        k_out[src] += 1
        k_in[dst] += 1
        s_out[src] += weight
        s_in[dst] += weight
    return k_in, k_out, s_in, s_out


def selectivity(net: LanguageNetwork) -> tuple[np.ndarray, np.ndarray]:
    """Strength over degree per direction (average incident weight)."""
    k_in, k_out, s_in, s_out = degrees_strengths(net)
    with np.errstate(invalid="ignore", divide="ignore"):
        e_in = np.where(k_in > 0, s_in / np.maximum(k_in, 1), 0.0)
        e_out = np.where(k_out > 0, s_out / np.maximum(k_out, 1), 0.0)
    return e_in, e_out


def inverse_participation_ratio(
    net: LanguageNetwork,
) -> tuple[np.ndarray, np.ndarray]:
    """Concentration of each node's weight over its edges, per direction:
    sum over incident edges of (weight / strength)^2."""
    n = net.n_nodes
    _, _, s_in, s_out = degrees_strengths(net)
    y_in = np.zeros(n)
    y_out = np.zeros(n)
    for (src, dst), weight in net.edges.items():
        y_out[src] += (weight / s_out[src]) ** 2
        y_in[dst] += (weight / s_in[dst]) ** 2
    return y_in, y_out


def _edges_among_neighbors(undirected: list[set[int]]) -> list[int]:
    counts = []
    for neighbors in undirected:
        members = sorted(neighbors)
        links = 0
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                if b in undirected[a]:
                    links += 1
        counts.append(links)
    return counts


def transitivity(net: LanguageNetwork) -> float:
    """3 x triangles over connected triples of the undirected projection."""
    undirected = net.undirected_adjacency()
    closed = sum(_edges_among_neighbors(undirected))  # 3 x triangles
    triples = sum(len(nb) * (len(nb) - 1) // 2 for nb in undirected)
    return closed / triples if triples else 0.0


def clustering(net: LanguageNetwork) -> np.ndarray:
    """Per-node share of realized links among neighbors (undirected)."""
    undirected = net.undirected_adjacency()
    links = _edges_among_neighbors(undirected)
    values = np.zeros(net.n_nodes)
    for node, neighbors in enumerate(undirected):
        k = len(neighbors)
        if k >= 2:
            values[node] = 2.0 * links[node] / (k * (k - 1))
    return values


def betweenness(net: LanguageNetwork) -> np.ndarray:
    """Unnormalized directed betweenness over unweighted shortest paths,
    endpoints excluded (Brandes accumulation)."""
    n = net.n_nodes
    adj = net.out_adjacency()
    centrality = np.zeros(n)
    for source in range(n):
        stack: list[int] = []
        predecessors: list[list[int]] = [[] for _ in range(n)]
        sigma = [0.0] * n
        dist = [-1] * n
        sigma[source] = 1.0
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            stack.append(u)
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
                if dist[v] == dist[u] + 1:
                    sigma[v] += sigma[u]
                    predecessors[v].append(u)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            for v in predecessors[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != source:
                centrality[w] += delta[w]
    return centrality


def closeness(net: LanguageNetwork) -> np.ndarray:
    """Outward closeness scaled by the reachable share of the graph."""
    n = net.n_nodes
    values = np.zeros(n)
    if n < 2:
        return values
    adj = net.out_adjacency()
    for node in range(n):
        hops = _bfs_hops(adj, node)
        reached = [d for i, d in enumerate(hops) if i != node and d > 0]
        total = sum(reached)
        if total > 0:
            values[node] = len(reached) / ((n - 1) * total)
    return values


def pagerank(
    net: LanguageNetwork,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> np.ndarray:
    """Iterate C(v) = (1-d) + d * sum_{u->v} C(u)/outdeg(u) from C = 1.

    Dangling nodes spread their score uniformly over all nodes, which
    keeps the converged scores averaging exactly 1.
    """
    n = net.n_nodes
    if n == 0:
        return np.zeros(0)
    out_deg = np.zeros(n)
    for (src, _dst) in net.edges:
        out_deg[src] += 1
    scores = np.ones(n)
    for _ in range(max_iter):
        dangling = scores[out_deg == 0].sum()
        incoming = np.full(n, dangling / n)
        for (src, dst), _w in net.edges.items():
            incoming[dst] += scores[src] / out_deg[src]
        updated = (1.0 - damping) + damping * incoming
        residual = float(np.max(np.abs(updated - scores)))
        scores = updated
        if residual < tol:
            return scores
    raise RuntimeError(
        f"PageRank did not converge in {max_iter} iterations "
        f"(residual {residual:.3e})"
    )


@dataclass
class NodeMeasureTable:
    """Per-node measures, one array per measure, aligned with net.nodes."""

    k_in: np.ndarray
    k_out: np.ndarray
    s_in: np.ndarray
    s_out: np.ndarray
    e_in: np.ndarray
    e_out: np.ndarray
    y_in: np.ndarray
    y_out: np.ndarray
    betweenness: np.ndarray
    closeness: np.ndarray
    pagerank: np.ndarray
    clustering: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in NODE_MEASURE_NAMES}


@dataclass
class MacroFeatures:
    n_nodes: float
    n_edges: float
    avg_degree: float
    avg_shortest_path: float
    global_efficiency: float
    local_efficiency: float
    transitivity: float

    def as_list(self) -> list[float]:
        return [getattr(self, name) for name in MACRO_NAMES]


@dataclass
class GowFeatureVector:
    values: list[float]
    scheme: str
    column_names: list[str]


def node_measures(net: LanguageNetwork) -> NodeMeasureTable:
    k_in, k_out, s_in, s_out = degrees_strengths(net)
    e_in, e_out = selectivity(net)
    y_in, y_out = inverse_participation_ratio(net)
    return NodeMeasureTable(
        k_in=k_in,
        k_out=k_out,
        s_in=s_in,
        s_out=s_out,
        e_in=e_in,
        e_out=e_out,
        y_in=y_in,
        y_out=y_out,
        betweenness=betweenness(net),
        closeness=closeness(net),
        pagerank=pagerank(net),
        clustering=clustering(net),
    )


def macro_features(net: LanguageNetwork) -> MacroFeatures:
    n = net.n_nodes
    return MacroFeatures(
        n_nodes=float(n),
        n_edges=float(net.n_edges),
        avg_degree=2.0 * net.n_edges / n if n else 0.0,  # mean total degree
        avg_shortest_path=avg_shortest_path(net),
        global_efficiency=global_efficiency(net),
        local_efficiency=local_efficiency(net),
        transitivity=transitivity(net),
    )


def scheme_column_names(scheme: str) -> list[str]:
    if scheme == "average":
        return MACRO_NAMES + [f"{m}_avg" for m in NODE_MEASURE_NAMES]
    if scheme == "quartiles":
        return MACRO_NAMES + [
            f"{m}_{stat}" for m in NODE_MEASURE_NAMES for stat in QUARTILE_STATS
        ]
    if scheme == "histogram":
        return MACRO_NAMES + [
            f"{m}_bin{i + 1:02d}"
            for m in NODE_MEASURE_NAMES
            for i in range(HISTOGRAM_BINS)
        ]
    raise ValueError(f"unknown aggregation scheme: {scheme!r}")


def _histogram(values: np.ndarray) -> list[float]:
    """Relative frequencies over ten equidistant bins spanning the value
    range; a constant measure puts all mass in the final bin."""
    counts = np.zeros(HISTOGRAM_BINS)
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        counts[-1] = len(values)
    else:
        idx = ((values - lo) / (hi - lo) * HISTOGRAM_BINS).astype(int)
        for i in np.minimum(idx, HISTOGRAM_BINS - 1):
            counts[i] += 1
    return list(counts / len(values))


def aggregate(
    table: NodeMeasureTable, macro: MacroFeatures, scheme: str
) -> GowFeatureVector:
    """Collapse per-node measures into a fixed-length document vector.

    The layout is the seven macro scalars followed by each node measure
    in its fixed order, expanded per scheme: one mean (average), five
    order statistics with linear-interpolation quantiles (quartiles), or
    ten relative bin frequencies (histogram). An empty network yields an
    all-zero vector of the scheme's length.
    """
    names = scheme_column_names(scheme)
    if len(table.k_in) == 0:
        return GowFeatureVector(values=[0.0] * len(names), scheme=scheme, column_names=names)
    values = [float(v) for v in macro.as_list()]
    for measure in NODE_MEASURE_NAMES:
        data = table.as_dict()[measure]
        if scheme == "average":
            values.append(float(data.mean()))
        elif scheme == "quartiles":
            values.extend(float(q) for q in np.quantile(data, [0.0, 0.25, 0.5, 0.75, 1.0]))
        else:
            values.extend(_histogram(data))
    return GowFeatureVector(values=values, scheme=scheme, column_names=names)


def network_features(doc: ProcessedDocument, scheme: str) -> GowFeatureVector:
    """Document straight to aggregated network feature vector."""
    net = build_network(doc)
    if net.n_nodes == 0:
        names = scheme_column_names(scheme)
        return GowFeatureVector(values=[0.0] * len(names), scheme=scheme, column_names=names)
    return aggregate(node_measures(net), macro_features(net), scheme)


def gow_feature_matrix(docs: list[ProcessedDocument], scheme: str) -> FeatureMatrix:
    """Stack per-document network features; no parameters are fitted, so
    train and test documents are featurized identically."""
    names = scheme_column_names(scheme)
    rows = np.array([network_features(d, scheme).values for d in docs]).reshape(
        len(docs), len(names)
    )
    return FeatureMatrix(rows=rows, column_names=names, doc_ids=[d.id for d in docs])
