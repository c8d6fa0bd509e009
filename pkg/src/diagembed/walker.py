"""Random-walk corpora over a :class:`HetNet` and skip-gram pair extraction.

Three walk engines are provided: the second-order biased walk of node2vec
(return parameter ``p``, in-out parameter ``q``), the meta-path guided walk
of metapath2vec, and the multi-meta-path corpus that splits the per-node
walk budget across several short meta-paths.
"""
from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .diagnet import HetNet, NodeType, edge_type_for, neighbors_of_type
from .seeding import child_int


@dataclass(frozen=True)
class MetaPath:
    """Cyclic node-type pattern, e.g. ``D-S-N-S-D``.

    Walks repeat the pattern without re-emitting the shared endpoint, so
    ``D-S-N-S-D`` extends as ``D S N S D S N S D ...``.
    """

    types: tuple[NodeType, ...]

    def __post_init__(self):
        if len(self.types) < 3:
            raise ValueError("a meta-path needs at least 3 node types")
        if self.types[0] is not self.types[-1]:
            raise ValueError(f"meta-path {self} must start and end with the same type")
        for a, b in zip(self.types, self.types[1:]):
            if edge_type_for(a, b) is None:
                raise ValueError(f"meta-path {self}: {a.value}-{b.value} is not an edge type of the schema")

    @classmethod
    def parse(cls, text: str) -> "MetaPath":
        """Parse ``"D,S,N,S,D"`` (commas, dashes or spaces as separators)."""
        parts = [p for p in text.replace("-", ",").replace(" ", ",").split(",") if p]
        return cls(tuple(NodeType.from_letter(p) for p in parts))

    @property
    def head(self) -> NodeType:
        return self.types[0]

    @property
    def period(self) -> int:
        return len(self.types) - 1

    def type_at(self, step: int) -> NodeType:
        return self.types[step % self.period]

    def __str__(self):
        return "-".join(t.value for t in self.types)


@dataclass(frozen=True)
class WalkParams:
    r: int = 10  # walks per node
    l: int = 80  # walk length in nodes

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"walks per node must be >= 1, got {self.r}")
        if self.l < 2:
            raise ValueError(f"walk length must be >= 2, got {self.l}")


@dataclass(frozen=True)
class Node2vec:
    p: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ValueError(f"p and q must be positive, got p={self.p}, q={self.q}")


@dataclass(frozen=True)
class MetaPaths:
    paths: tuple[MetaPath, ...]

    def __init__(self, paths: Sequence[MetaPath | str]):
        paths = tuple(MetaPath.parse(m) if isinstance(m, str) else m for m in paths)
        if not paths:
            raise ValueError("at least one meta-path is required")
        object.__setattr__(self, "paths", paths)


def node2vec_step_weights(net: HetNet, prev: int, cur: int, p: float, q: float) -> tuple[tuple[int, ...], list[float]]:
    """Candidate next nodes from ``cur`` (having come from ``prev``) and their unnormalised weights."""
    nbrs = net.neighbors(cur)
    prev_nbrs = net.neighbor_set(prev)
    weights = []
    for x in nbrs:
        if x == prev:
            weights.append(1.0 / p)
        elif x in prev_nbrs:
            weights.append(1.0)
        else:
            weights.append(1.0 / q)
    return nbrs, weights


def node2vec_next(net: HetNet, prev: int, cur: int, p: float, q: float, rng: np.random.Generator) -> int | None:
    """Sample the step after ``prev -> cur``; None at a dead end."""
    if p == 1 and q == 1:
        nbrs = net.neighbors(cur)
        return nbrs[int(rng.integers(len(nbrs)))] if nbrs else None
    nbrs, weights = node2vec_step_weights(net, prev, cur, p, q)
    if not nbrs:
        return None
    cum = list(itertools.accumulate(weights))
    return nbrs[bisect.bisect_right(cum, rng.random() * cum[-1])]


def node2vec_walk(net: HetNet, start: int, l: int, p: float, q: float, rng: np.random.Generator) -> list[int]:
    if not (p > 0 and q > 0):
        raise ValueError(f"p and q must be positive, got p={p}, q={q}")
    if l < 2:
        raise ValueError(f"walk length must be >= 2, got {l}")
    nbrs = net.neighbors(start)
    walk = [start]
    if not nbrs:
        return walk
    walk.append(nbrs[int(rng.integers(len(nbrs)))])
    while len(walk) < l:
        nxt = node2vec_next(net, walk[-2], walk[-1], p, q, rng)
        if nxt is None:
            break
        walk.append(nxt)
    return walk


def metapath_next(net: HetNet, cur: int, required: NodeType, rng: np.random.Generator) -> int | None:
    """Uniform choice among neighbours of type ``required``; None if there are none."""
    cands = neighbors_of_type(net, cur, required)
    return cands[int(rng.integers(len(cands)))] if cands else None


def metapath_walk(net: HetNet, start: int, l: int, mp: MetaPath, rng: np.random.Generator) -> list[int]:
    """Walk that at each step moves to a uniformly chosen neighbour of the next required type."""
    if net.type_of(start) is not mp.head:
        raise ValueError(f"start node {net.keys[start]!r} has type {net.types[start].value}, "
                         f"meta-path {mp} starts with {mp.head.value}")
    if l < 2:
        raise ValueError(f"walk length must be >= 2, got {l}")
    walk = [start]
    for step in range(1, l):
        nxt = metapath_next(net, walk[-1], mp.type_at(step), rng)
        if nxt is None:
            break
        walk.append(nxt)
    return walk


def generate_corpus(net: HetNet, strategy: Node2vec | MetaPaths, params: WalkParams,
                    rng: np.random.Generator) -> list[list[int]]:
    """Walk corpus for ``strategy``.

    Every walk is a task with its own stream seeded from ``(base, task index)``,
    so the corpus does not depend on the order tasks are executed in.

    For :class:`MetaPaths` the ``r`` walks per node are split into
    ``r // len(paths)`` rounds; a node only starts walks for the paths whose
    head type matches its own.
    """
    base = child_int(rng)
    n = len(net)
    walks = []
    if isinstance(strategy, Node2vec):
        for rnd in range(params.r):
            for v in range(n):
                task_rng = np.random.default_rng([base, rnd * n + v])
                walks.append(node2vec_walk(net, v, params.l, strategy.p, strategy.q, task_rng))
        return walks

    paths = strategy.paths
    rounds = params.r // len(paths)
    if rounds == 0:
        raise ValueError(f"r={params.r} is smaller than the number of meta-paths ({len(paths)})")
    for rnd in range(rounds):
        for v in range(n):
            for m, mp in enumerate(paths):
                if net.types[v] is not mp.head:
                    continue
                task_rng = np.random.default_rng([base, (rnd * n + v) * len(paths) + m])
                walks.append(metapath_walk(net, v, params.l, mp, task_rng))
    return walks


def extract_skipgrams(walks: Sequence[Sequence[int]], k: int, limit: int | None = None,
                      rng: np.random.Generator | None = None) -> np.ndarray:
    """All ``(center, context)`` pairs within distance ``k`` along each walk.

    Returns an ``(n_pairs, 2)`` int array ordered by walk, then center
    position, then context position.  With ``limit`` the pool is subsampled
    without replacement when larger, or topped up by sampling with
    replacement when smaller, to exactly ``limit`` pairs.
    """
    if k < 1:
        raise ValueError(f"window size must be >= 1, got {k}")
    lengths = np.array([len(w) for w in walks], dtype=np.int64)
    flat = np.fromiter(itertools.chain.from_iterable(walks), dtype=np.int64, count=int(lengths.sum()))
    wid = np.repeat(np.arange(len(lengths)), lengths)
    centers, contexts, order_i, order_j = [], [], [], []
    for delta in range(-k, k + 1):
        if delta == 0 or abs(delta) >= len(flat):
            continue
        i = np.arange(max(0, -delta), len(flat) - max(0, delta))
        i = i[wid[i] == wid[i + delta]]
        centers.append(flat[i])
        contexts.append(flat[i + delta])
        order_i.append(i)
        order_j.append(i + delta)
    if not centers:
        pairs = np.empty((0, 2), dtype=np.int64)
    else:
        oi, oj = np.concatenate(order_i), np.concatenate(order_j)
        order = np.lexsort((oj, oi))
        pairs = np.stack([np.concatenate(centers)[order], np.concatenate(contexts)[order]], axis=1)

    if limit is None or len(pairs) == limit:
        return pairs
    if rng is None:
        raise ValueError("a random generator is required when limit is set")
    if len(pairs) == 0:
        return pairs
    if len(pairs) > limit:
        keep = np.sort(rng.choice(len(pairs), size=limit, replace=False))
        return pairs[keep]
    extra = rng.integers(0, len(pairs), size=limit - len(pairs))
    return np.concatenate([pairs, pairs[extra]])


def skipgram_count(n: int, k: int) -> int:
    """Closed-form number of pairs from a walk of ``n`` nodes with window ``k``."""
    if n <= k:
        return n * (n - 1)
    return 2 * (k * n - k * (k + 1) // 2)


def write_corpus(walks: Sequence[Sequence[int]], keys: Sequence[str], sink: IO[str]) -> None:
    from .embed import encode_key

    for w in walks:
        sink.write(" ".join(encode_key(keys[v]) for v in w) + "\n")


def read_corpus(source: IO[str], net: HetNet) -> list[list[int]]:
    from .embed import decode_key

    walks = []
    for lineno, line in enumerate(source, start=1):
        tokens = line.split()
        if not tokens:
            continue
        try:
            walks.append([net.node_id(decode_key(t)) for t in tokens])
        except KeyError as exc:
            raise ValueError(f"corpus line {lineno}: {exc.args[0]}") from None
    return walks


def write_pairs(pairs: np.ndarray, keys: Sequence[str], sink: IO[str]) -> None:
    for c, x in pairs:
        sink.write(f"{keys[c]}\t{keys[x]}\n")
