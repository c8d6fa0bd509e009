"""Typed heterogeneous network built from diagnostic triplets.

A triplet ``<disease, name, value>`` becomes four nodes: the disease, the
symptom name, the symptom value and an intermediate symptom-occurrence node
joined to the other three.  Symptom occurrences are shared by every triplet
with the same (name, value) pair.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import IO, Iterable, NamedTuple

import numpy as np


class NodeType(enum.Enum):
    DISEASE = "D"
    SYMPTOM = "S"
    NAME = "N"
    VALUE = "W"

    @classmethod
    def from_letter(cls, letter: str) -> "NodeType":
        try:
            return cls(letter.strip().upper())
        except ValueError:
            raise ValueError(f"unknown node type {letter!r}; expected one of D, S, N, W") from None


class EdgeType(enum.Enum):
    SD = "SD"
    SN = "SN"
    SW = "SW"


D, S, N, W = NodeType.DISEASE, NodeType.SYMPTOM, NodeType.NAME, NodeType.VALUE

# unordered type pair -> edge type; anything absent is not joinable
_SCHEMA = {
    frozenset((S, D)): EdgeType.SD,
    frozenset((S, N)): EdgeType.SN,
    frozenset((S, W)): EdgeType.SW,
}
_KEY_PREFIX = {D: "d:", S: "s:", N: "n:", W: "w:"}


def edge_type_for(a: NodeType, b: NodeType) -> EdgeType | None:
    """Edge type joining nodes of types ``a`` and ``b``, or None if the schema forbids it."""
    return _SCHEMA.get(frozenset((a, b)))


def node_key(t: NodeType, *parts: str) -> str:
    return _KEY_PREFIX[t] + "|".join(parts)


def type_of_key(key: str) -> NodeType:
    for t, prefix in _KEY_PREFIX.items():
        if key.startswith(prefix):
            return t
    raise ValueError(f"node key {key!r} has no type prefix")


class ParseError(ValueError):
    """Malformed input record; ``lineno`` is 1-based."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class Triplet(NamedTuple):
    disease: str
    name: str
    value: str


def load_triplets(source: IO[str]) -> list[Triplet]:
    """Parse ``disease<TAB>name<TAB>value`` records, skipping blanks and ``#`` comments."""
    triplets = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(lineno, f"expected 3 tab-separated fields, got {len(fields)}")
        if any(not f.strip() for f in fields):
            raise ParseError(lineno, "empty field")
        triplets.append(Triplet(*fields))
    return triplets


def write_triplets(triplets: Iterable[Triplet], sink: IO[str]) -> None:
    for t in triplets:
        sink.write(f"{t.disease}\t{t.name}\t{t.value}\n")


@dataclass(frozen=True, eq=False)
class HetNet:
    """Undirected typed graph.

    Node ids are dense integers ``0..n-1``.  ``origin`` maps each node to its
    id in the network this one was trimmed from (identity for built networks),
    so results on a trimmed copy can be carried back to the full graph.
    """

    keys: tuple[str, ...]
    types: tuple[NodeType, ...]
    edges: tuple[tuple[int, int, EdgeType], ...]
    origin: tuple[int, ...]

    def __post_init__(self):
        n = len(self.keys)
        adj: list[dict[NodeType, list[int]]] = [{} for _ in range(n)]
        for u, v, _ in self.edges:
            adj[u].setdefault(self.types[v], []).append(v)
            adj[v].setdefault(self.types[u], []).append(u)
        frozen = []
        for per_type in adj:
            frozen.append({t: tuple(sorted(vs)) for t, vs in per_type.items()})
        object.__setattr__(self, "_adj", tuple(frozen))
        object.__setattr__(self, "_nbrs", tuple(tuple(sorted(v for vs in d.values() for v in vs)) for d in frozen))
        object.__setattr__(self, "_nbr_sets", tuple(frozenset(x) for x in self._nbrs))
        object.__setattr__(self, "_index", {k: i for i, k in enumerate(self.keys)})

    @property
    def num_nodes(self) -> int:
        return len(self.keys)

    def __len__(self) -> int:
        return len(self.keys)

    def node_id(self, key: str) -> int:
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"unknown node key {key!r}") from None

    def _check(self, v: int) -> None:
        if not 0 <= v < len(self.keys):
            raise KeyError(f"unknown node id {v}")

    def type_of(self, v: int) -> NodeType:
        self._check(v)
        return self.types[v]

    def neighbors(self, v: int) -> tuple[int, ...]:
        self._check(v)
        return self._nbrs[v]

    def neighbor_set(self, v: int) -> frozenset[int]:
        return self._nbr_sets[v]

    def nodes_of_type(self, t: NodeType) -> list[int]:
        return [i for i, ti in enumerate(self.types) if ti is t]

    def type_array(self) -> np.ndarray:
        """Node types as one-letter codes, for vectorised filtering."""
        return np.array([t.value for t in self.types])


def neighbors_of_type(net: HetNet, v: int, t: NodeType) -> tuple[int, ...]:
    """Neighbours of ``v`` whose type is ``t``, ascending by id."""
    net._check(v)
    return net._adj[v].get(t, ())


def build_network(triplets: Iterable[Triplet]) -> HetNet:
    keys: list[str] = []
    types: list[NodeType] = []
    index: dict[str, int] = {}
    edges: list[tuple[int, int, EdgeType]] = []
    seen_edges: set[tuple[int, int]] = set()

    def get(t: NodeType, key: str) -> int:
        i = index.get(key)
        if i is None:
            i = index[key] = len(keys)
            keys.append(key)
            types.append(t)
        return i

    def link(a: int, b: int, et: EdgeType) -> None:
        u, v = (a, b) if a < b else (b, a)
        if (u, v) not in seen_edges:
            seen_edges.add((u, v))
            edges.append((u, v, et))

    count = 0
    for trip in triplets:
        count += 1
        d = get(D, node_key(D, trip.disease))
        s = get(S, node_key(S, trip.name, trip.value))
        n = get(N, node_key(N, trip.name))
        w = get(W, node_key(W, trip.value))
        link(s, d, EdgeType.SD)
        link(s, n, EdgeType.SN)
        link(s, w, EdgeType.SW)
    if count == 0:
        raise ValueError("cannot build a network from zero triplets")
    return HetNet(tuple(keys), tuple(types), tuple(edges), tuple(range(len(keys))))


def empty_network() -> HetNet:
    return HetNet((), (), (), ())


def subgraph(net: HetNet, keep: Iterable[int]) -> HetNet:
    """Induced subgraph on ``keep``; surviving nodes keep their relative order."""
    kept = sorted(set(keep))
    remap = {old: new for new, old in enumerate(kept)}
    edges = tuple(
        (remap[u], remap[v], et) for u, v, et in net.edges if u in remap and v in remap
    )
    return HetNet(
        tuple(net.keys[i] for i in kept),
        tuple(net.types[i] for i in kept),
        edges,
        tuple(net.origin[i] for i in kept),
    )


def trim_network(net: HetNet, alpha: float, rng: np.random.Generator) -> HetNet:
    """Remove ``floor(alpha% * |V|)`` nodes uniformly at random with their edges."""
    if not 0 <= alpha < 100:
        raise ValueError(f"alpha must be in [0, 100), got {alpha}")
    n_remove = int(alpha * len(net) // 100)
    removed = rng.choice(len(net), size=n_remove, replace=False) if n_remove else []
    return subgraph(net, set(range(len(net))) - set(int(i) for i in removed))


def network_stats(net: HetNet) -> dict:
    """Per-type node and edge counts, keyed by type letter (``D``, ``SD``...)."""
    counts = {t.value: 0 for t in NodeType}
    counts.update({e.value: 0 for e in EdgeType})
    for t in net.types:
        counts[t.value] += 1
    for _, _, et in net.edges:
        counts[et.value] += 1
    return counts


def format_stats(stats: dict) -> str:
    nodes = " ".join(f"{t.value}:{stats[t.value]}" for t in NodeType)
    edges = " ".join(f"{e.value}:{stats[e.value]}" for e in EdgeType)
    return f"{nodes} {edges}"


def dump_graph(net: HetNet, sink: IO[str]) -> None:
    """Write one ``type<TAB>key_u<TAB>key_v`` line per edge, in creation order."""
    for u, v, et in net.edges:
        sink.write(f"{et.value}\t{net.keys[u]}\t{net.keys[v]}\n")


def load_graph(source: IO[str]) -> HetNet:
    """Inverse of :func:`dump_graph`; node ids follow first appearance."""
    keys: list[str] = []
    types: list[NodeType] = []
    index: dict[str, int] = {}
    edges = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(lineno, f"expected 3 tab-separated fields, got {len(fields)}")
        try:
            et = EdgeType(fields[0])
            ends = []
            for key in fields[1:]:
                if key not in index:
                    index[key] = len(keys)
                    keys.append(key)
                    types.append(type_of_key(key))
                ends.append(index[key])
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        u, v = sorted(ends)
        if edge_type_for(types[u], types[v]) is not et:
            raise ParseError(lineno, f"edge type {et.value} does not join {fields[1]!r} and {fields[2]!r}")
        edges.append((u, v, et))
    return HetNet(tuple(keys), tuple(types), tuple(edges), tuple(range(len(keys))))
