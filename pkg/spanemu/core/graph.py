#!/usr/bin/env python3

"""Graph representation, ingestion, synthetic generators and exact distance oracles."""

import heapq
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx

from ..errors import GraphFormatError, InvalidConfigError, InvariantError

Edge = Tuple[int, int]

EMULATOR = "emulator"
SPANNER = "spanner"
EDGE_SET_MODES = (EMULATOR, SPANNER)

EDGE_LIST = "edge-list"
DIMACS = "dimacs"
GRAPH_FORMATS = (EDGE_LIST, DIMACS)

FAMILIES = ("path", "cycle", "star", "grid", "erdos_renyi", "hypercube")


def normalize_edge(u: int, v: int) -> Edge:
    """Return the unordered pair (u, v) with the smaller endpoint first"""
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable unweighted undirected graph on vertices 0..n-1"""

    __slots__ = ("_n", "_edges", "_adjacency")

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        if n < 0:
            raise GraphFormatError(f"vertex count must be non-negative, got {n}")
        pairs = set()
        neighbors: List[List[int]] = [[] for _ in range(n)]
        for u, v in edges:
            _check_pair(u, v, n, pairs)
            pairs.add(normalize_edge(u, v))
            neighbors[u].append(v)
            neighbors[v].append(u)
        self._n = n
        self._edges = frozenset(pairs)
        self._adjacency = tuple(tuple(sorted(adj)) for adj in neighbors)

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> frozenset:
        return self._edges

    @property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        return self._adjacency

    def vertices(self) -> range:
        return range(self._n)

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self._adjacency[v]

    def degree(self, v: int) -> int:
        return len(self._adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return normalize_edge(u, v) in self._edges

    def sorted_edges(self) -> List[Edge]:
        return sorted(self._edges)

    def to_networkx(self) -> nx.Graph:
        """Export as a networkx graph (used by tests as an independent oracle)"""
        graph = nx.Graph()
        graph.add_nodes_from(range(self._n))
        graph.add_edges_from(self._edges)
        return graph

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "Graph":
        """Relabel a networkx graph to 0..n-1 in sorted node order"""
        relabeled = nx.convert_node_labels_to_integers(graph, ordering="sorted")
        return cls(relabeled.number_of_nodes(), relabeled.edges())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._n, self._edges))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, m={self.m})"


def _check_pair(u: int, v: int, n: int, seen, line: Optional[int] = None) -> None:
    if not (0 <= u < n and 0 <= v < n):
        raise GraphFormatError(f"vertex id out of range in edge ({u}, {v}) for n={n}", line)
    if u == v:
        raise GraphFormatError(f"self-loop at vertex {u}", line)
    if normalize_edge(u, v) in seen:
        raise GraphFormatError(f"duplicate edge ({u}, {v})", line)


class WeightedEdgeSet:
    """The emulator or spanner H under construction

    At most one entry per unordered pair; inserting a pair again keeps the
    smaller weight. In spanner mode every weight is 1 and, when a source
    graph is attached, every entry must be one of its edges.
    """

    def __init__(self, mode: str = EMULATOR, graph: Optional[Graph] = None):
        if mode not in EDGE_SET_MODES:
            raise InvalidConfigError(f"unknown edge set mode: {mode}")
        self.mode = mode
        self.graph = graph
        self._entries: Dict[Edge, int] = {}

    def add(self, u: int, v: int, weight: int = 1) -> bool:
        """Insert (u, v) with the given weight; returns True if H changed"""
        if u == v:
            raise InvariantError(f"self-loop ({u}, {v}) inserted into H")
        if weight < 1:
            raise InvariantError(f"non-positive weight {weight} for ({u}, {v})")
        if self.mode == SPANNER:
            if weight != 1:
                raise InvariantError(f"spanner edge ({u}, {v}) with weight {weight}")
            if self.graph is not None and not self.graph.has_edge(u, v):
                raise InvariantError(f"spanner edge ({u}, {v}) is not an edge of G")
        key = normalize_edge(u, v)
        current = self._entries.get(key)
        if current is not None and current <= weight:
            return False
        self._entries[key] = weight
        return True

    def weight(self, u: int, v: int) -> Optional[int]:
        return self._entries.get(normalize_edge(u, v))

    def items(self) -> List[Tuple[Edge, int]]:
        return sorted(self._entries.items())

    def adjacency(self, n: int) -> List[List[Tuple[int, int]]]:
        """Per-vertex (neighbor, weight) lists, neighbors ascending"""
        adj: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
        for (u, v), w in self.items():
            if u >= n or v >= n:
                raise InvariantError(f"edge ({u}, {v}) outside vertex range {n}")
            adj[u].append((v, w))
            adj[v].append((u, w))
        for row in adj:
            row.sort()
        return adj

    def copy(self) -> "WeightedEdgeSet":
        clone = WeightedEdgeSet(self.mode, self.graph)
        clone._entries = dict(self._entries)
        return clone

    def to_text(self, n: int) -> str:
        """Serialize as "n k mode" followed by k lines "u v w" """
        lines = [f"{n} {len(self)} {self.mode}"]
        lines.extend(f"{u} {v} {w}" for (u, v), w in self.items())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Tuple[int, "WeightedEdgeSet"]:
        """Parse the text written by to_text; returns (n, edge set)"""
        header = None
        edges = None
        count = 0
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if header is None:
                if len(fields) != 3 or fields[2] not in EDGE_SET_MODES:
                    raise GraphFormatError("expected header 'n k mode'", lineno)
                n, k = _parse_ints(fields[:2], lineno)
                header = (n, k)
                edges = cls(fields[2])
                continue
            if len(fields) != 3:
                raise GraphFormatError("expected 'u v w'", lineno)
            u, v, w = _parse_ints(fields, lineno)
            if not (0 <= u < header[0] and 0 <= v < header[0]) or u == v:
                raise GraphFormatError(f"invalid pair ({u}, {v})", lineno)
            if w < 1 or (edges.mode == SPANNER and w != 1):
                raise GraphFormatError(f"invalid weight {w}", lineno)
            if edges.weight(u, v) is not None:
                raise GraphFormatError(f"duplicate pair ({u}, {v})", lineno)
            edges.add(u, v, w)
            count += 1
        if header is None:
            raise GraphFormatError("missing header 'n k mode'")
        if count != header[1]:
            raise GraphFormatError(f"header declares {header[1]} edges, found {count}")
        return header[0], edges

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, pair: Edge) -> bool:
        return normalize_edge(*pair) in self._entries

    def __iter__(self) -> Iterator[Tuple[Edge, int]]:
        return iter(self.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedEdgeSet):
            return NotImplemented
        return self.mode == other.mode and self._entries == other._entries

    def __repr__(self) -> str:
        return f"WeightedEdgeSet(mode={self.mode}, size={len(self)})"


@dataclass
class DistanceMap:
    """Distances and predecessors from one source; None marks unreachable"""

    source: int
    dist: List[Optional[int]]
    pred: List[Optional[int]]
    depth_cap: Optional[int] = None

    def __getitem__(self, v: int) -> Optional[int]:
        return self.dist[v]

    def reachable(self, v: int) -> bool:
        return self.dist[v] is not None

    def path_to(self, v: int) -> List[int]:
        """Replay the predecessor chain from the source to v"""
        if self.dist[v] is None:
            return []
        path = [v]
        while path[-1] != self.source:
            path.append(self.pred[path[-1]])
        path.reverse()
        return path


def _parse_ints(fields: Sequence[str], line: int) -> List[int]:
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise GraphFormatError(f"expected integers, got {' '.join(fields)!r}", line)


def _read_lines(stream) -> List[str]:
    data = stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.splitlines()


def load_graph(stream, fmt: str = EDGE_LIST) -> Graph:
    """
    Read a graph from a text or byte stream

    Args:
        stream: file-like object opened in text or binary mode
        fmt: "edge-list" ("n m" header, then "u v" lines, 0-based) or
            "dimacs" (".gr" with "p sp n m" and 1-based "a u v 1" arcs)

    Returns:
        The canonical Graph
    """
    if fmt == EDGE_LIST:
        return _load_edge_list(_read_lines(stream))
    if fmt == DIMACS:
        return _load_dimacs(_read_lines(stream))
    raise InvalidConfigError(f"unknown graph format: {fmt}")


def _load_edge_list(lines: List[str]) -> Graph:
    header = None
    edges: List[Edge] = []
    seen = set()
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if header is None:
            if len(fields) != 2:
                raise GraphFormatError("expected header 'n m'", lineno)
            header = _parse_ints(fields, lineno)
            if header[0] < 0 or header[1] < 0:
                raise GraphFormatError("negative count in header", lineno)
            continue
        if len(fields) != 2:
            raise GraphFormatError("expected 'u v'", lineno)
        u, v = _parse_ints(fields, lineno)
        _check_pair(u, v, header[0], seen, lineno)
        seen.add(normalize_edge(u, v))
        edges.append((u, v))
    if header is None:
        raise GraphFormatError("missing header 'n m'")
    if len(edges) != header[1]:
        raise GraphFormatError(f"header declares {header[1]} edges, found {len(edges)}")
    return Graph(header[0], edges)


def _load_dimacs(lines: List[str]) -> Graph:
    n = None
    declared = 0
    arcs = set()
    edges = set()
    for lineno, raw in enumerate(lines, 1):
        fields = raw.split()
        if not fields or fields[0] == "c":
            continue
        if fields[0] == "p":
            if n is not None or len(fields) != 4 or fields[1] != "sp":
                raise GraphFormatError("expected a single 'p sp n m' line", lineno)
            n, declared = _parse_ints(fields[2:], lineno)
            continue
        if fields[0] != "a" or len(fields) != 4:
            raise GraphFormatError(f"unexpected line {raw.strip()!r}", lineno)
        if n is None:
            raise GraphFormatError("arc before the 'p sp' line", lineno)
        u, v, w = _parse_ints(fields[1:], lineno)
        if w != 1:
            raise GraphFormatError(f"weighted arc ({u}, {v}, {w}); only unit weights are supported", lineno)
        u, v = u - 1, v - 1
        if (u, v) in arcs:
            raise GraphFormatError(f"duplicate arc ({u + 1}, {v + 1})", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex id out of range in arc ({u + 1}, {v + 1})", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u + 1}", lineno)
        arcs.add((u, v))
        edges.add(normalize_edge(u, v))
    if n is None:
        raise GraphFormatError("missing 'p sp n m' line")
    if len(arcs) != declared:
        raise GraphFormatError(f"header declares {declared} arcs, found {len(arcs)}")
    return Graph(n, sorted(edges))


def write_graph(g: Graph) -> str:
    """Serialize in edge-list format"""
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.sorted_edges())
    return "\n".join(lines) + "\n"


def generate_graph(family: str, params: Dict[str, Union[int, float]], seed: int = 0) -> Graph:
    """
    Build a synthetic graph with networkx and relabel it to 0..n-1

    Args:
        family: one of path, cycle, star, grid, erdos_renyi, hypercube
        params: n for path/cycle/erdos_renyi, leaves for star, rows/cols for
            grid, dim for hypercube, p for erdos_renyi
        seed: only used by erdos_renyi
    """
    try:
        if family == "path":
            n = int(params["n"])
            _require(n >= 1, "path needs n >= 1")
            return Graph.from_networkx(nx.path_graph(n))
        if family == "cycle":
            n = int(params["n"])
            _require(n >= 3, "cycle needs n >= 3")
            return Graph.from_networkx(nx.cycle_graph(n))
        if family == "star":
            leaves = int(params["leaves"])
            _require(leaves >= 1, "star needs at least one leaf")
            return Graph.from_networkx(nx.star_graph(leaves))
        if family == "grid":
            rows = int(params["rows"])
            cols = int(params.get("cols", rows))
            _require(rows >= 1 and cols >= 1, "grid sides must be positive")
            return Graph.from_networkx(nx.grid_2d_graph(rows, cols))
        if family == "erdos_renyi":
            n = int(params["n"])
            p = float(params["p"])
            _require(n >= 1, "erdos_renyi needs n >= 1")
            _require(0.0 <= p <= 1.0, "erdos_renyi needs 0 <= p <= 1")
            return Graph.from_networkx(nx.gnp_random_graph(n, p, seed=seed))
        if family == "hypercube":
            dim = int(params["dim"])
            _require(0 <= dim <= 20, "hypercube needs 0 <= dim <= 20")
            return Graph.from_networkx(nx.hypercube_graph(dim))
    except KeyError as e:
        raise InvalidConfigError(f"missing parameter {e} for family {family}")
    raise InvalidConfigError(f"unknown graph family: {family}")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidConfigError(message)


def parse_gen_spec(spec: str) -> Tuple[str, Dict[str, Union[int, float]]]:
    """Parse generator strings such as "cycle:5", "grid:4x6" or "erdos_renyi:64:0.1" """
    family, _, rest = spec.partition(":")
    parts = rest.split(":") if rest else []
    try:
        if family in ("path", "cycle") and len(parts) == 1:
            return family, {"n": int(parts[0])}
        if family == "star" and len(parts) == 1:
            return family, {"leaves": int(parts[0])}
        if family == "grid" and len(parts) == 1:
            sides = parts[0].lower().split("x")
            rows = int(sides[0])
            cols = int(sides[1]) if len(sides) > 1 else rows
            return family, {"rows": rows, "cols": cols}
        if family == "erdos_renyi" and len(parts) == 2:
            return family, {"n": int(parts[0]), "p": float(parts[1])}
        if family == "hypercube" and len(parts) == 1:
            return family, {"dim": int(parts[0])}
    except ValueError:
        pass
    raise InvalidConfigError(f"invalid generator spec: {spec!r}")


def bfs_distances(g: Graph, source: int, depth_cap: Optional[int] = None) -> DistanceMap:
    """Exact hop distances from source, layer by layer

    Each vertex's predecessor is its lowest-ID neighbor in the previous
    layer. Vertices farther than depth_cap stay unreachable.
    """
    if not 0 <= source < g.n:
        raise InvalidConfigError(f"source {source} out of range for n={g.n}")
    dist: List[Optional[int]] = [None] * g.n
    pred: List[Optional[int]] = [None] * g.n
    dist[source] = 0
    frontier = [source]
    depth = 0
    adjacency = g.adjacency
    while frontier and (depth_cap is None or depth < depth_cap):
        depth += 1
        layer = []
        for u in frontier:
            for w in adjacency[u]:
                if dist[w] is None:
                    dist[w] = depth
                    pred[w] = u
                    layer.append(w)
        layer.sort()
        frontier = layer
    return DistanceMap(source, dist, pred, depth_cap)


def dijkstra_distances(
    h: WeightedEdgeSet,
    n: int,
    source: int,
    adjacency: Optional[List[List[Tuple[int, int]]]] = None,
) -> DistanceMap:
    """Exact weighted distances in (V, h) from source

    Pass a precomputed adjacency when running from many sources.
    """
    if not 0 <= source < n:
        raise InvalidConfigError(f"source {source} out of range for n={n}")
    adj = adjacency if adjacency is not None else h.adjacency(n)
    dist: List[Optional[int]] = [None] * n
    pred: List[Optional[int]] = [None] * n
    dist[source] = 0
    heap = [(0, source)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for w, weight in adj[u]:
            nd = d + weight
            if dist[w] is None or nd < dist[w]:
                dist[w] = nd
                pred[w] = u
                heapq.heappush(heap, (nd, w))
            elif nd == dist[w] and not done[w] and u < pred[w]:
                pred[w] = u
    return DistanceMap(source, dist, pred)
