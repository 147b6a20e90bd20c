"""Seeded random instance generators for hypermatchings and low-degree hypergraphs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Hypergraph, vertex_tuple


class GenerationError(RuntimeError):
    """Raised when the retry budget runs out before a valid instance is packed."""


@dataclass(frozen=True)
class MatchingSpec:
    """Requested hypermatching: exact multiset of edge sizes over n vertices."""

    n: int
    size_distribution: tuple[tuple[int, int], ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self,
            "size_distribution",
            tuple((int(s), int(c)) for s, c in self.size_distribution),
        )
        if any(s < 1 for s, _ in self.size_distribution):
            raise ValueError("edge sizes must be >= 1")
        if any(c < 0 for _, c in self.size_distribution):
            raise ValueError("edge counts must be >= 0")
        if self.used_vertices() > self.n:
            raise ValueError(
                f"requested {self.used_vertices()} matched vertices but n={self.n}"
            )

    def used_vertices(self) -> int:
        return sum(s * c for s, c in self.size_distribution)


def gen_matching(spec: MatchingSpec) -> Hypergraph:
    """Disjoint uniformly random edges with exactly the requested size multiset.

    Deterministic per seed: a single permutation of [0, n) is cut into
    consecutive blocks, one block per requested edge.
    """
    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(spec.n)
    edges = []
    pos = 0
    for size, count in spec.size_distribution:
        for _ in range(count):
            edges.append(vertex_tuple(perm[pos : pos + size], spec.n))
            pos += size
    return Hypergraph(spec.n, edges)


@dataclass(frozen=True)
class LowDegreeSpec:
    """Requested near-uniform hypergraph with bounded degree.

    Edge sizes are drawn uniformly from [ceil(d/rho), d]; the generated graph
    never exceeds max degree delta, and no edge is strictly contained in
    another (the consolidation step of the bulk learner cannot distinguish a
    true sub-edge from an intersection of two larger edges, so nested inputs
    are outside its contract).
    """

    n: int
    delta: int
    d: int
    rho: float
    m: int
    seed: int = 0

    def __post_init__(self):
        if self.delta < 1:
            raise ValueError("delta must be >= 1")
        if self.rho < 1:
            raise ValueError("rho must be >= 1")
        if self.d / self.rho < 2:
            raise ValueError("d/rho must be >= 2")
        if self.m < 0:
            raise ValueError("m must be >= 0")
        if self.m > self.delta * self.n / (self.d / self.rho):
            raise ValueError(
                f"m={self.m} exceeds delta*n/(d/rho)="
                f"{self.delta * self.n / (self.d / self.rho):.1f}"
            )

    @property
    def min_size(self) -> int:
        return math.ceil(self.d / self.rho)


def gen_low_degree(spec: LowDegreeSpec, max_attempts: int | None = None) -> Hypergraph:
    """Greedy rejection sampler for LowDegreeSpec.

    Not uniform over all valid hypergraphs (no claim needs that); retries up
    to 1000*m attempts before giving up with GenerationError.
    """
    rng = np.random.default_rng(spec.seed)
    budget = max_attempts if max_attempts is not None else max(1000 * spec.m, 1000)
    degrees = np.zeros(spec.n, dtype=np.int64)
    edges: list[tuple[int, ...]] = []
    edge_sets: list[frozenset[int]] = []
    attempts = 0
    while len(edges) < spec.m:
        if attempts >= budget:
            raise GenerationError(
                f"could not place edge {len(edges) + 1}/{spec.m} within "
                f"{budget} attempts (n={spec.n}, delta={spec.delta}, d={spec.d}, "
                f"rho={spec.rho})"
            )
        attempts += 1
        size = int(rng.integers(spec.min_size, spec.d + 1))
        eligible = np.flatnonzero(degrees < spec.delta)
        if eligible.size < size:
            raise GenerationError(
                f"only {eligible.size} vertices below degree {spec.delta} remain; "
                f"cannot place a size-{size} edge"
            )
        cand = vertex_tuple(rng.choice(eligible, size=size, replace=False), spec.n)
        cset = frozenset(cand)
        if any(cset == s or cset < s or s < cset for s in edge_sets):
            continue
        edges.append(cand)
        edge_sets.append(cset)
        degrees[list(cand)] += 1
    return Hypergraph(spec.n, edges)
