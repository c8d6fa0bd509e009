"""Synthetic diagnostic networks with planted group structure.

Diseases are split into groups; each group owns a pool of symptom names.
A disease links to each of its own group's names with probability
``overlap`` and to every other group's names with probability ``noise``.
Values come from one vocabulary shared by all groups.  Disease nodes are
labelled by group, symptom-name nodes by the group whose diseases use them
most, giving ``2 * groups`` classes.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import IO

import numpy as np

from .diagnet import D, N, HetNet, Triplet, build_network, node_key
from .taskheads import LabeledNode


@dataclass(frozen=True)
class SynthSpec:
    groups: int = 10
    diseases_per_group: int = 5
    names_per_group: int = 20
    values: int = 8
    overlap: float = 0.3
    noise: float = 0.02
    seed: int = 0

    def __post_init__(self):
        for name in ("groups", "diseases_per_group", "names_per_group", "values"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("overlap", "noise"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be a probability, got {getattr(self, name)}")


def disease_class(g: int) -> str:
    return f"D-g{g:03d}"


def name_class(g: int) -> str:
    return f"N-g{g:03d}"


def synth_triplets(spec: SynthSpec) -> tuple[list[Triplet], dict[str, str]]:
    """Generated triplets and a ``node key -> class name`` map."""
    rng = np.random.default_rng(spec.seed)
    G, nd, nn = spec.groups, spec.diseases_per_group, spec.names_per_group
    diseases = [[f"g{g:03d}_d{i:03d}" for i in range(nd)] for g in range(G)]
    names = [[f"g{g:03d}_n{j:03d}" for j in range(nn)] for g in range(G)]
    values = [f"v{k:03d}" for k in range(spec.values)]

    triplets = []
    users: dict[tuple[int, int], Counter] = {(g, j): Counter() for g in range(G) for j in range(nn)}

    def emit(dg, di, ng, nj):
        triplets.append(Triplet(diseases[dg][di], names[ng][nj], values[int(rng.integers(spec.values))]))
        users[ng, nj][dg] += 1

    for g in range(G):
        for i in range(nd):
            own = np.flatnonzero(rng.random(nn) < spec.overlap)
            other = rng.random((G, nn)) < spec.noise
            other[g] = False
            if len(own) == 0 and not other.any():
                own = [int(rng.integers(nn))]
            for j in own:
                emit(g, i, g, int(j))
            for og, oj in zip(*np.nonzero(other)):
                emit(g, i, int(og), int(oj))
    # every name is used at least once, by its own group
    for g in range(G):
        for j in range(nn):
            if not users[g, j]:
                emit(g, int(rng.integers(nd)), g, j)

    labels = {}
    for g in range(G):
        for i in range(nd):
            labels[node_key(D, diseases[g][i])] = disease_class(g)
        for j in range(nn):
            counts = users[g, j]
            top = max(counts.values())
            dominant = g if counts[g] == top else min(k for k, c in counts.items() if c == top)
            labels[node_key(N, names[g][j])] = name_class(dominant)
    return triplets, labels


def class_names(labels: dict[str, str]) -> list[str]:
    return sorted(set(labels.values()))


def labeled_nodes(net: HetNet, labels: dict[str, str], classes: list[str] | None = None) -> tuple[list[LabeledNode], list[str]]:
    """Resolve a key->class map against ``net``; class indices follow ``classes`` (sorted by default)."""
    classes = classes or class_names(labels)
    index = {c: i for i, c in enumerate(classes)}
    items = [LabeledNode(net.node_id(k), index[c]) for k, c in labels.items()]
    items.sort()
    return items, classes


def synth_network(spec: SynthSpec) -> tuple[HetNet, list[LabeledNode]]:
    triplets, labels = synth_triplets(spec)
    net = build_network(triplets)
    items, _ = labeled_nodes(net, labels)
    return net, items


def write_labels(labels: dict[str, str], sink: IO[str]) -> None:
    for key, cls in labels.items():
        sink.write(f"{key}\t{cls}\n")


def read_labels(source: IO[str]) -> dict[str, str]:
    labels = {}
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not all(p.strip() for p in parts):
            raise ValueError(f"labels line {lineno}: expected 'node_key<TAB>class_name'")
        labels[parts[0]] = parts[1]
    return labels
