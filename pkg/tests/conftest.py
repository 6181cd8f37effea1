"""Shared graph builders and synthetic-data helpers."""

import numpy as np
import pytest

from fcnets.networks import BinaryNetwork


def path_graph(n):
    return BinaryNetwork(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return BinaryNetwork(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return BinaryNetwork(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves):
    return BinaryNetwork(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def k4_minus_edge():
    return BinaryNetwork(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])


def two_triangles():
    return BinaryNetwork(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])


def ring_lattice(n, k):
    edges = set()
    for offset in range(1, k // 2 + 1):
        for i in range(n):
            a, b = i, (i + offset) % n
            if a != b:
                edges.add((min(a, b), max(a, b)))
    return BinaryNetwork(n, sorted(edges))


def watts_strogatz(n, k, p, rng):
    """Ring lattice with each edge's far endpoint rewired with probability p."""
    edges = set()
    for offset in range(1, k // 2 + 1):
        for i in range(n):
            edges.add((min(i, (i + offset) % n), max(i, (i + offset) % n)))
    edges = sorted(edges)
    out = set(edges)
    for a, b in edges:
        if rng.random() < p:
            out.discard((a, b))
            while True:
                c = int(rng.integers(n))
                if c != a and (min(a, c), max(a, c)) not in out:
                    out.add((min(a, c), max(a, c)))
                    break
    return BinaryNetwork(n, sorted(out))


def erdos_renyi(n, mean_degree, rng):
    p = mean_degree / (n - 1)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    return BinaryNetwork(n, list(zip(iu[keep].tolist(), ju[keep].tolist())))


def random_graph(n, p, rng):
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    return BinaryNetwork(n, list(zip(iu[keep].tolist(), ju[keep].tolist())))


@pytest.fixture
def rng():
    return np.random.default_rng(20240815)
