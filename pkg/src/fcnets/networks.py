"""Undirected network containers produced by thresholding.

Edges are canonical (i < j), sorted, and deduplicated. Both classes carry a
degree cache and convert to dense adjacency; persistence is an edge-list TSV
whose first line is a JSON header comment recording n and provenance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def _canonical_edges(edges):
    seen = set()
    out = []
    for a, b in edges:
        a, b = int(a), int(b)
        if a == b:
            raise ValueError(f"self-loop ({a}, {b})")
        if a > b:
            a, b = b, a
        if (a, b) in seen:
            raise ValueError(f"duplicate edge ({a}, {b})")
        seen.add((a, b))
        out.append((a, b))
    out.sort()
    return out


@dataclass
class BinaryNetwork:
    """Unweighted undirected graph on nodes 0..n-1."""

    n: int
    edges: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.edges = _canonical_edges(self.edges)
        for a, b in self.edges:
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) outside node range 0..{self.n - 1}")

    @property
    def edge_count(self):
        return len(self.edges)

    def degrees(self):
        deg = np.zeros(self.n, dtype=np.int64)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def adjacency(self):
        A = np.zeros((self.n, self.n), dtype=np.int8)
        for a, b in self.edges:
            A[a, b] = A[b, a] = 1
        return A

    def neighbor_sets(self):
        nbrs = [set() for _ in range(self.n)]
        for a, b in self.edges:
            nbrs[a].add(b)
            nbrs[b].add(a)
        return nbrs

    def has_edge(self, a, b):
        if a > b:
            a, b = b, a
        return (a, b) in set(self.edges)

    def save(self, path):
        _save_edgelist(path, self.n, [(a, b, None) for a, b in self.edges], self.meta)


@dataclass
class WeightedNetwork:
    """Weighted undirected graph; weights strictly positive and finite."""

    n: int
    edges: list  # (i, j, weight)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pairs = _canonical_edges([(a, b) for a, b, _ in self.edges])
        weights = {}
        for a, b, w in self.edges:
            a, b = (int(a), int(b)) if a < b else (int(b), int(a))
            w = float(w)
            if not np.isfinite(w) or w <= 0:
                raise ValueError(f"edge ({a}, {b}) weight must be positive and finite, got {w}")
            weights[(a, b)] = w
        self.edges = [(a, b, weights[(a, b)]) for a, b in pairs]
        for a, b in pairs:
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) outside node range 0..{self.n - 1}")

    @property
    def edge_count(self):
        return len(self.edges)

    def degrees(self):
        deg = np.zeros(self.n, dtype=np.int64)
        for a, b, _ in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def adjacency(self):
        W = np.zeros((self.n, self.n))
        for a, b, w in self.edges:
            W[a, b] = W[b, a] = w
        return W

    def binary(self):
        return BinaryNetwork(self.n, [(a, b) for a, b, _ in self.edges], dict(self.meta))

    def save(self, path):
        _save_edgelist(path, self.n, self.edges, self.meta)


def _save_edgelist(path, n, triples, meta):
    header = {"n": n}
    header.update(meta or {})
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        for a, b, w in triples:
            if w is None:
                fh.write(f"{a}\t{b}\n")
            else:
                fh.write(f"{a}\t{b}\t{w:.17g}\n")


def load_network(path):
    """Load an edge-list TSV; returns BinaryNetwork or WeightedNetwork.

    The first line must be a '# {json}' header carrying at least n.
    """
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path}: missing JSON header line")
        header = json.loads(first[1:].strip())
        n = int(header["n"])
        meta = {k: v for k, v in header.items() if k != "n"}
        pairs, triples, weighted = [], [], False
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) == 2:
                pairs.append((int(parts[0]), int(parts[1])))
            elif len(parts) == 3:
                weighted = True
                triples.append((int(parts[0]), int(parts[1]), float(parts[2])))
            else:
                raise ValueError(f"{path}: bad edge line {line!r}")
    if weighted:
        if pairs:
            raise ValueError(f"{path}: mixed weighted and unweighted lines")
        return WeightedNetwork(n, triples, meta)
    return BinaryNetwork(n, pairs, meta)


def from_adjacency(A, meta=None):
    """Build a network from a dense adjacency matrix (weights if non-0/1)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    iu, ju = np.triu_indices(n, 1)
    mask = A[iu, ju] != 0
    ii, jj, ww = iu[mask], ju[mask], A[iu, ju][mask]
    if np.all((ww == 1.0)):
        return BinaryNetwork(n, list(zip(ii.tolist(), jj.tolist())), meta or {})
    return WeightedNetwork(n, list(zip(ii.tolist(), jj.tolist(), ww.tolist())), meta or {})
