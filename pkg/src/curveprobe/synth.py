"""Barbell benchmark families for the signal-reconstruction task.

A barbell is a source clique and a target clique joined by one bridge
edge; modified variants hang extra "dummy" cliques off the target side,
each with its own bridge and its own constant-signal node, acting as
distractors. The source node carries a fresh random feature vector per
graph and the regression target is that vector read out at the target
node, three hops away across the bridge.

Edge type codes:
    0  intra-clique edge
    1  source node to the source-side bridge node
    2  target-side bridge node to target node
    3  the bridge
    4  a dummy-clique bridge

Topological feature mode stores these codes as edge features; permuted
mode shuffles the same multiset over the edges with a fresh permutation
per graph, keeping the feature distribution while destroying its meaning.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .graph import Graph, canonical_pair, make_graph

VARIANT_DUMMIES = {"standard": 0, "modified": 1, "extended": 3}

EDGE_TYPE_CLIQUE = 0
EDGE_TYPE_SOURCE_TO_BRIDGE = 1
EDGE_TYPE_BRIDGE_TO_TARGET = 2
EDGE_TYPE_BRIDGE = 3
EDGE_TYPE_DUMMY_BRIDGE = 4


@dataclass(frozen=True)
class BarbellSpec:
    clique_size: int = 4
    num_dummy_cliques: int = 0
    feature_dim: int = 16
    num_train: int = 256
    num_test: int = 26
    feature_mode: str = "topological"
    seed: int = 0
    dummy_attach: str = "target"    # or "clique": cycle over non-target clique nodes

    def validate(self) -> "BarbellSpec":
        if self.clique_size < 3:
            raise ValidationError(f"clique_size must be >= 3, got {self.clique_size}")
        if self.feature_dim < 1:
            raise ValidationError(f"feature_dim must be >= 1, got {self.feature_dim}")
        if self.num_dummy_cliques < 0:
            raise ValidationError("num_dummy_cliques must be nonnegative")
        if self.feature_mode not in ("topological", "permuted"):
            raise ValidationError(f"unknown feature_mode {self.feature_mode!r}")
        if self.dummy_attach not in ("target", "clique"):
            raise ValidationError(f"unknown dummy_attach {self.dummy_attach!r}")
        return self


@dataclass(frozen=True)
class _Layout:
    clique_size: int
    num_dummy_cliques: int
    dummy_attach: str

    @property
    def source(self) -> int:
        return 0

    @property
    def source_bridge(self) -> int:
        return self.clique_size - 1

    @property
    def target_bridge(self) -> int:
        return self.clique_size

    @property
    def target(self) -> int:
        return 2 * self.clique_size - 1

    @property
    def num_nodes(self) -> int:
        return (2 + self.num_dummy_cliques) * self.clique_size

    def dummy_nodes(self, m: int) -> range:
        start = (2 + m) * self.clique_size
        return range(start, start + self.clique_size)

    def dummy_source(self, m: int) -> int:
        return self.dummy_nodes(m)[0]

    def dummy_bridge(self, m: int) -> int:
        return self.dummy_nodes(m)[-1]

    def dummy_attach_node(self, m: int) -> int:
        if self.dummy_attach == "target":
            return self.target
        # spread over the non-target nodes of the target clique
        return self.clique_size + (m % (self.clique_size - 1))

    def clique_ranges(self):
        k = self.clique_size
        yield range(0, k)
        yield range(k, 2 * k)
        for m in range(self.num_dummy_cliques):
            yield self.dummy_nodes(m)

    def typed_edges(self) -> list[tuple[tuple[int, int], int]]:
        out = []
        for block in self.clique_ranges():
            for a in block:
                for b in block:
                    if a < b:
                        out.append(((a, b), EDGE_TYPE_CLIQUE))
        typed = dict(out)
        typed[canonical_pair(self.source, self.source_bridge)] = EDGE_TYPE_SOURCE_TO_BRIDGE
        typed[canonical_pair(self.target_bridge, self.target)] = EDGE_TYPE_BRIDGE_TO_TARGET
        typed[canonical_pair(self.source_bridge, self.target_bridge)] = EDGE_TYPE_BRIDGE
        for m in range(self.num_dummy_cliques):
            typed[canonical_pair(self.dummy_bridge(m), self.dummy_attach_node(m))] = EDGE_TYPE_DUMMY_BRIDGE
        return sorted(typed.items())


def _layout_for(spec: BarbellSpec) -> _Layout:
    return _Layout(spec.clique_size, spec.num_dummy_cliques, spec.dummy_attach)


def _variant_name(num_dummy_cliques: int) -> str:
    for name, count in VARIANT_DUMMIES.items():
        if count == num_dummy_cliques:
            return name
    return f"dummies{num_dummy_cliques}"


def gen_one(spec: BarbellSpec, split: str, index: int) -> Graph:
    """Generate graph `index` of a split, deterministic in (seed, split, index)."""
    spec.validate()
    layout = _layout_for(spec)
    split_code = {"train": 0, "test": 1}.get(split)
    if split_code is None:
        raise ValidationError(f"unknown split {split!r}")
    rng = np.random.default_rng([spec.seed, split_code, index])

    features = np.zeros((layout.num_nodes, spec.feature_dim))
    signal = rng.standard_normal(spec.feature_dim)
    features[layout.source] = signal
    for m in range(spec.num_dummy_cliques):
        features[layout.dummy_source(m), m % spec.feature_dim] = 1.0

    typed = layout.typed_edges()
    edges = [pair for pair, _ in typed]
    types = [t for _, t in typed]
    if spec.feature_mode == "permuted":
        perm = rng.permutation(len(types))
        types = [types[p] for p in perm]

    name = _variant_name(spec.num_dummy_cliques)
    return make_graph(
        graph_id=f"barbell_{name}_{spec.feature_mode}_{split}_{index:04d}",
        num_nodes=layout.num_nodes,
        edges=edges,
        node_features=features,
        edge_features=types,
        roles={
            "source": layout.source,
            "target": layout.target,
            "dummy_sources": [layout.dummy_source(m) for m in range(spec.num_dummy_cliques)],
        },
        y=signal.tolist(),
        extra={"barbell": {
            "clique_size": spec.clique_size,
            "num_dummy_cliques": spec.num_dummy_cliques,
            "dummy_attach": spec.dummy_attach,
        }},
    )


def gen_barbell(spec: BarbellSpec, split: str = "train") -> list[Graph]:
    count = spec.num_train if split == "train" else spec.num_test
    return [gen_one(spec, split, i) for i in range(count)]


def gen_dataset(spec: BarbellSpec) -> tuple[list[Graph], list[Graph]]:
    return gen_barbell(spec, "train"), gen_barbell(spec, "test")


def spec_for_variant(variant: str, **overrides) -> BarbellSpec:
    if variant not in VARIANT_DUMMIES:
        raise ValidationError(f"unknown barbell variant {variant!r} (expected one of {sorted(VARIANT_DUMMIES)})")
    return replace(BarbellSpec(num_dummy_cliques=VARIANT_DUMMIES[variant]), **overrides).validate()


def edge_type(g: Graph, e) -> int:
    """Structural type code of an edge of a generated barbell graph."""
    meta = g.extra.get("barbell")
    if not isinstance(meta, dict):
        raise ValidationError(f"graph {g.graph_id!r} is not a generated barbell (missing metadata)")
    layout = _Layout(int(meta["clique_size"]), int(meta["num_dummy_cliques"]), meta.get("dummy_attach", "target"))
    pair = canonical_pair(int(e[0]), int(e[1]))
    if pair not in g.edge_index:
        raise ValidationError(f"graph {g.graph_id!r}: {list(pair)} is not a structural edge")
    return dict(layout.typed_edges())[pair]
