"""Reductions of classic combinatorial problems to PPP instances.

Every reduction keeps the problem's objective equal to ``PPP(pi)`` (up to a
documented constant shift) for every placement ``pi``.  Random instance
generators are seeded and draw integer weights uniformly from ``[1, 100]``
unless told otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import networkx as nx
import numpy as np

from .errors import (
    DegenerateQ,
    DimensionMismatch,
    GuestLargerThanHost,
    LeftLargerThanRight,
    NonSquare,
    TooFewNodes,
)
from .ppp import AUTO, PPPInstance, quartet_count


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph on nodes ``0..num_nodes-1`` with integer edge weights."""

    num_nodes: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        seen = set()
        norm = []
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            w = int(e[2]) if len(e) > 2 else 1
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
                raise ValueError(f"edge ({u}, {v}) leaves the node range")
            u, v = min(u, v), max(u, v)
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            norm.append((u, v, w))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def max_abs_weight(self) -> int:
        return max((abs(w) for _, _, w in self.edges), default=0)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.edges:
            z = np.zeros(0, dtype=np.int64)
            return z, z.copy(), z.copy()
        arr = np.asarray(self.edges, dtype=np.int64)
        return arr[:, 0], arr[:, 1], arr[:, 2]

    def weights(self) -> dict[tuple[int, int], int]:
        return {(u, v): w for u, v, w in self.edges}

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.num_nodes))
        g.add_weighted_edges_from(self.edges)
        return g

    @classmethod
    def from_networkx(cls, g: nx.Graph, weight: str = "weight") -> "WeightedGraph":
        mapping = {node: i for i, node in enumerate(sorted(g.nodes))}
        return cls(
            g.number_of_nodes(),
            tuple((mapping[u], mapping[v], int(d.get(weight, 1))) for u, v, d in g.edges(data=True)),
        )


def _square(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"{name} must be a square matrix, got shape {arr.shape}")
    return arr


# --------------------------------------------------------------------------
# quadratic assignment


def qap_value(flows, distances, p: Sequence[int]) -> int:
    """``sum_{i,i'} f[i,i'] d[pi(i), pi(i')]``."""
    f = np.asarray(flows, dtype=np.int64)
    d = np.asarray(distances, dtype=np.int64)
    pi = np.asarray(p, dtype=np.int64)
    return int((f * d[np.ix_(pi, pi)]).sum())


def qap_to_ppp(flows, distances) -> PPPInstance:
    """Facility ``i`` placed at location ``pi(i)``.

    ``P[i,j] = f[i,i] d[j,j]`` and, for ``i < i'`` and ``j != j'``,
    ``I[i,j,i',j'] = f[i,i'] d[j,j'] + f[i',i] d[j',j]``.
    """
    f = _square(flows, "flows")
    d = _square(distances, "distances")
    if f.shape != d.shape:
        raise DimensionMismatch(f"flows {f.shape} and distances {d.shape} differ")
    n = f.shape[0]
    jj = np.arange(n)
    pot_keys = np.stack(np.meshgrid(jj, jj, indexing="ij"), axis=-1).reshape(-1, 2)
    pot_vals = np.outer(np.diag(f), np.diag(d)).ravel()
    i, ip = np.triu_indices(n, 1)
    live = (f[i, ip] != 0) | (f[ip, i] != 0)
    i, ip = i[live], ip[live]
    j, jp = np.nonzero(~np.eye(n, dtype=bool))
    vals = f[i, ip][:, None] * d[j, jp][None, :] + f[ip, i][:, None] * d[jp, j][None, :]
    keys = np.empty((i.size, j.size, 4), dtype=np.int64)
    keys[..., 0] = i[:, None]
    keys[..., 1] = j[None, :]
    keys[..., 2] = ip[:, None]
    keys[..., 3] = jp[None, :]
    return PPPInstance.from_arrays(
        n, n, (pot_keys, pot_vals), (keys.reshape(-1, 4), vals.ravel())
    )


def random_qap(n: int, seed: int = 0, low: int = 1, high: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Dense flows and symmetric distances with zero diagonals."""
    rng = np.random.default_rng(seed)
    f = rng.integers(low, high + 1, size=(n, n))
    d = rng.integers(low, high + 1, size=(n, n))
    d = np.triu(d, 1)
    d = d + d.T
    np.fill_diagonal(f, 0)
    return f, d


# --------------------------------------------------------------------------
# travelling salesman


def tour_length(distances, p: Sequence[int]) -> int:
    """Length of the closed tour visiting ``p[0], p[1], ...`` in order."""
    d = np.asarray(distances, dtype=np.int64)
    pi = np.asarray(p, dtype=np.int64)
    return int(d[pi, np.roll(pi, -1)].sum())


def _consecutive_quartets(n: int, j: np.ndarray, jp: np.ndarray, vals: np.ndarray):
    """Quartets ``(i, j, i+1 mod n, j')`` for every tour step ``i``."""
    steps = np.arange(n)
    keys = np.empty((n, j.size, 4), dtype=np.int64)
    keys[..., 0] = steps[:, None]
    keys[..., 1] = j[None, :]
    keys[..., 2] = ((steps + 1) % n)[:, None]
    keys[..., 3] = jp[None, :]
    return keys.reshape(-1, 4), np.tile(vals, n)


def tsp_to_ppp(distances) -> PPPInstance:
    """Step ``i`` of the tour visits city ``pi(i)``; ``I[i,j,i+1,j'] = d[j,j']``.

    The wrap-around step ``(n-1, 0)`` is stored in canonical order.
    """
    d = _square(distances, "distances")
    n = d.shape[0]
    if n < 2:
        return PPPInstance(n, n)
    j, jp = np.nonzero(~np.eye(n, dtype=bool))
    keys, vals = _consecutive_quartets(n, j, jp, d[j, jp])
    return PPPInstance.from_arrays(n, n, interactions=(keys, vals))


def random_tsp(n: int, seed: int = 0, low: int = 1, high: int = 100) -> np.ndarray:
    """Symmetric distance matrix with zero diagonal."""
    rng = np.random.default_rng(seed)
    d = np.triu(rng.integers(low, high + 1, size=(n, n)), 1)
    return d + d.T


def graph_tour_length(graph: WeightedGraph, p: Sequence[int], big: int) -> int:
    """Tour length where a missing edge costs ``big``."""
    w = graph.weights()
    pi = list(p)
    total = 0
    for a, b in zip(pi, pi[1:] + pi[:1]):
        total += w.get((min(a, b), max(a, b)), big)
    return total


def auto_big(graph: WeightedGraph) -> int:
    return graph.num_nodes * graph.max_abs_weight + 1


def tsp_graph_to_ppp(graph: WeightedGraph, big: Union[int, str] = AUTO) -> tuple[PPPInstance, int]:
    """Sparse TSP: interactions only along edges, biased by ``-big``.

    Returns the instance and the shift ``n * big`` with
    ``graph_tour_length(pi) == PPP(pi) + n * big`` for every tour.
    """
    n = graph.num_nodes
    if n < 3:
        raise TooFewNodes(f"a tour needs at least 3 nodes, got {n}")
    big = auto_big(graph) if big == AUTO or big is None else int(big)
    u, v, w = graph.edge_arrays()
    j = np.concatenate([u, v])
    jp = np.concatenate([v, u])
    vals = np.concatenate([w, w]) - big
    keys, vals = _consecutive_quartets(n, j, jp, vals)
    return PPPInstance.from_arrays(n, n, interactions=(keys, vals)), n * big


def random_graph(num_nodes: int, num_edges: int, seed: int = 0, low: int = 1, high: int = 100) -> WeightedGraph:
    """Uniform random graph with exactly ``num_edges`` edges and random weights."""
    g = nx.gnm_random_graph(num_nodes, num_edges, seed=seed)
    rng = np.random.default_rng(seed)
    weights = rng.integers(low, high + 1, size=g.number_of_edges())
    return WeightedGraph(
        num_nodes, tuple((u, v, int(wt)) for (u, v), wt in zip(sorted(g.edges), weights))
    )


def random_regular_graph(degree: int, num_nodes: int, seed: int = 0) -> WeightedGraph:
    g = nx.random_regular_graph(degree, num_nodes, seed=seed)
    return WeightedGraph(num_nodes, tuple((u, v, 1) for u, v in sorted(g.edges)))


def complete_graph(num_nodes: int, seed: int | None = None, low: int = 1, high: int = 100) -> WeightedGraph:
    """``K_n`` with unit weights, or random weights when ``seed`` is given."""
    pairs = [(u, v) for u in range(num_nodes) for v in range(u + 1, num_nodes)]
    if seed is None:
        weights = [1] * len(pairs)
    else:
        weights = np.random.default_rng(seed).integers(low, high + 1, size=len(pairs)).tolist()
    return WeightedGraph(num_nodes, tuple((u, v, int(w)) for (u, v), w in zip(pairs, weights)))


# --------------------------------------------------------------------------
# sub-graph isomorphism and matchings


def subgraph_iso_to_ppp(guest: WeightedGraph, host: WeightedGraph) -> PPPInstance:
    """Guest node ``i`` maps to host node ``pi(i)``; each preserved edge scores -1.

    The minimum ``-|E_guest|`` is reached exactly by embeddings.
    """
    m, n = guest.num_nodes, host.num_nodes
    if m > n:
        raise GuestLargerThanHost(f"guest has {m} nodes, host has {n}")
    gu, gv, _ = guest.edge_arrays()
    hu, hv, _ = host.edge_arrays()
    j = np.concatenate([hu, hv])
    jp = np.concatenate([hv, hu])
    keys = np.empty((gu.size, j.size, 4), dtype=np.int64)
    keys[..., 0] = gu[:, None]
    keys[..., 1] = j[None, :]
    keys[..., 2] = gv[:, None]
    keys[..., 3] = jp[None, :]
    vals = -np.ones(keys.shape[0] * keys.shape[1], dtype=np.int64)
    return PPPInstance.from_arrays(m, n, interactions=(keys.reshape(-1, 4), vals))


def matching_to_ppp(graph: WeightedGraph) -> PPPInstance:
    """Swapping nodes ``i < j`` (``pi(i) = j``, ``pi(j) = i``) matches edge ``(i, j)``.

    ``I[i,j,j,i] = -w[i,j]``; the maximum matching weight is ``-min PPP``.
    """
    n = graph.num_nodes
    u, v, w = graph.edge_arrays()
    keys = np.stack([u, v, v, u], axis=1)
    return PPPInstance.from_arrays(n, n, interactions=(keys, -w))


def matching_weight(graph: WeightedGraph, p: Sequence[int]) -> int:
    """Weight of the matching formed by the 2-cycles of ``p``."""
    w = graph.weights()
    return sum(w.get((i, j), 0) for i, j in enumerate(p) if i < j and p[j] == i)


def bipartite_matching_to_ppp(m: int, n: int, edges: Iterable[Sequence[int]]) -> PPPInstance:
    """Left node ``i`` matched to right node ``pi(i)`` earns ``w[i, pi(i)]``: ``P[i,j] = -w``."""
    if m > n:
        raise LeftLargerThanRight(f"left side has {m} nodes, right side has {n}")
    arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 3)
    return PPPInstance.from_arrays(m, n, potentials=(arr[:, :2], -arr[:, 2]))


def random_bipartite(m: int, n: int, seed: int = 0, low: int = 1, high: int = 100) -> list[tuple[int, int, int]]:
    """Complete bipartite edge list with random weights."""
    w = np.random.default_rng(seed).integers(low, high + 1, size=(m, n))
    return [(i, j, int(w[i, j])) for i in range(m) for j in range(n)]


# --------------------------------------------------------------------------
# density


def density(inst: PPPInstance) -> Fraction:
    """Share of canonical quartets carrying a nonzero interaction."""
    q = quartet_count(inst.m, inst.n)
    if q == 0:
        raise DegenerateQ(f"no quartets exist for m={inst.m}, n={inst.n}")
    return Fraction(inst.num_interactions, q)
