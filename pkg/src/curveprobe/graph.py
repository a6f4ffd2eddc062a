"""Undirected graph container with JSON Lines I/O and basic queries.

Graphs are immutable after construction and safe to share across workers.
Edges are always stored canonically: each pair as (i, j) with i < j, the
list sorted lexicographically. Per-edge outputs throughout the toolkit
follow this order so results are diff-stable.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ValidationError

# Keys written in this fixed order on save; anything else is preserved
# verbatim after them (sorted) so round trips are byte-stable.
_SCHEMA_KEYS = ("graph_id", "num_nodes", "edges", "node_features", "edge_features", "roles", "y")


@dataclass(frozen=True, eq=False)
class Graph:
    graph_id: str
    num_nodes: int
    edges: tuple[tuple[int, int], ...]
    node_features: np.ndarray | None = None
    edge_features: tuple[int, ...] | None = None
    roles: dict | None = None
    y: tuple[float, ...] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def neighbors(self) -> tuple[frozenset[int], ...]:
        """Adjacency sets, index = node id."""
        adj: list[set[int]] = [set() for _ in range(self.num_nodes)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return tuple(frozenset(s) for s in adj)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) with sorted neighbor lists, for the numeric kernels."""
        counts = np.zeros(self.num_nodes, dtype=np.int64)
        for i, j in self.edges:
            counts[i] += 1
            counts[j] += 1
        indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = np.empty(max(2 * len(self.edges), 1), dtype=np.int64)
        cursor = indptr[:-1].copy()
        for i, j in self.edges:
            indices[cursor[i]] = j
            cursor[i] += 1
            indices[cursor[j]] = i
            cursor[j] += 1
        for v in range(self.num_nodes):
            indices[indptr[v]:indptr[v + 1]].sort()
        return indptr, indices[: 2 * len(self.edges)]

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        """Canonical pair -> position in self.edges."""
        return {e: k for k, e in enumerate(self.edges)}

    def has_edge(self, i: int, j: int) -> bool:
        return canonical_pair(i, j) in self.edge_index

    def degree(self, i: int) -> int:
        self._check_node(i)
        return len(self.neighbors[i])

    def hop_distance(self, i: int, j: int) -> int | None:
        """BFS shortest-path length; None when i and j are disconnected."""
        self._check_node(i)
        self._check_node(j)
        if i == j:
            return 0
        seen = {i}
        queue = deque([(i, 0)])
        while queue:
            node, dist = queue.popleft()
            for nb in self.neighbors[node]:
                if nb == j:
                    return dist + 1
                if nb not in seen:
                    seen.add(nb)
                    queue.append((nb, dist + 1))
        return None

    def _check_node(self, i: int) -> None:
        if not (0 <= i < self.num_nodes):
            raise ValidationError(f"node index {i} out of range for graph {self.graph_id!r} with {self.num_nodes} nodes")

    def replace_edges(self, edges, edge_features=None, graph_id=None) -> "Graph":
        """New graph sharing everything but the edge set (used by pruning)."""
        return make_graph(
            graph_id=self.graph_id if graph_id is None else graph_id,
            num_nodes=self.num_nodes,
            edges=edges,
            node_features=self.node_features,
            edge_features=edge_features,
            roles=self.roles,
            y=self.y,
            extra=self.extra,
        )


def canonical_pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i <= j else (j, i)


def make_graph(graph_id, num_nodes, edges, node_features=None, edge_features=None,
               roles=None, y=None, extra=None) -> Graph:
    """Validate and canonicalize raw fields into a Graph.

    Edge pairs are flipped to i < j and sorted; edge_features are permuted
    along with them so the alignment is kept.
    """
    if num_nodes < 0:
        raise ValidationError(f"graph {graph_id!r}: num_nodes must be nonnegative, got {num_nodes}")
    pairs = []
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise ValidationError(f"graph {graph_id!r}: self-loop [{i}, {j}] is not allowed")
        if not (0 <= i < num_nodes) or not (0 <= j < num_nodes):
            raise ValidationError(f"graph {graph_id!r}: edge [{i}, {j}] out of range for {num_nodes} nodes")
        pairs.append(canonical_pair(i, j))

    order = sorted(range(len(pairs)), key=lambda k: pairs[k])
    sorted_pairs = tuple(pairs[k] for k in order)
    for a, b in zip(sorted_pairs, sorted_pairs[1:]):
        if a == b:
            raise ValidationError(f"graph {graph_id!r}: duplicate edge {list(a)}")

    if edge_features is not None:
        if len(edge_features) != len(pairs):
            raise ValidationError(
                f"graph {graph_id!r}: edge_features length {len(edge_features)} != number of edges {len(pairs)}"
            )
        edge_features = tuple(int(edge_features[k]) for k in order)

    if node_features is not None:
        node_features = np.asarray(node_features, dtype=np.float64)
        if node_features.ndim != 2 or node_features.shape[0] != num_nodes:
            raise ValidationError(
                f"graph {graph_id!r}: node_features must be num_nodes x dim, got shape {node_features.shape}"
            )
        node_features = node_features.copy()
        node_features.setflags(write=False)

    if roles is not None:
        for key in ("source", "target"):
            if key in roles and not (0 <= int(roles[key]) < num_nodes):
                raise ValidationError(f"graph {graph_id!r}: role {key}={roles[key]} out of range")

    return Graph(
        graph_id=str(graph_id),
        num_nodes=int(num_nodes),
        edges=sorted_pairs,
        node_features=node_features,
        edge_features=edge_features,
        roles=dict(roles) if roles is not None else None,
        y=tuple(float(v) for v in y) if y is not None else None,
        extra=dict(extra) if extra else {},
    )


def graph_from_record(obj: dict) -> Graph:
    try:
        graph_id = obj["graph_id"]
        num_nodes = obj["num_nodes"]
        edges = obj["edges"]
    except KeyError as exc:
        raise ValidationError(f"graph record missing required key {exc}") from None
    extra = {k: v for k, v in obj.items() if k not in _SCHEMA_KEYS}
    return make_graph(
        graph_id=graph_id,
        num_nodes=num_nodes,
        edges=edges,
        node_features=obj.get("node_features"),
        edge_features=obj.get("edge_features"),
        roles=obj.get("roles"),
        y=obj.get("y"),
        extra=extra,
    )


def graph_to_record(g: Graph) -> dict:
    rec: dict = {
        "graph_id": g.graph_id,
        "num_nodes": g.num_nodes,
        "edges": [list(e) for e in g.edges],
    }
    if g.node_features is not None:
        rec["node_features"] = g.node_features.tolist()
    if g.edge_features is not None:
        rec["edge_features"] = list(g.edge_features)
    if g.roles is not None:
        rec["roles"] = g.roles
    if g.y is not None:
        rec["y"] = list(g.y)
    for k in sorted(g.extra):
        rec[k] = g.extra[k]
    return rec


def load_graphs(path) -> list[Graph]:
    """Read a JSON Lines graph file, validating every record."""
    graphs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            try:
                graphs.append(graph_from_record(obj))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return graphs


def dump_graphs(graphs) -> str:
    return "".join(json.dumps(graph_to_record(g), separators=(",", ":")) + "\n" for g in graphs)


def save_graphs(graphs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_graphs(graphs))
