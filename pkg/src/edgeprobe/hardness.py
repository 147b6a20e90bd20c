"""Adversarial instance families and round-limit experiments.

Two constructions make few-round learners fail.  The three-part family
hides one large edge among a sea of pair edges: any query large enough
to see the big edge almost surely swallows a pair first, so one-round
strategies learn nothing about where the big edge sits.  The tower
family stacks levels whose edge sizes grow quadratically, defeating one
extra adaptive round per level.

The experiments here operationalize both claims: answer-disagreement
between redraws of the hidden part (a learner whose whole transcript
answers identically under many hidden completions cannot tell them
apart), and direct attacks that run a real learner under a hard round
cap and measure exact-recovery rates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .core import EdgeOracle, Hypergraph, LearnOutcome, RoundLimitExceeded
from .matching import SubroutineKind, find_matching
from .reference import brute_force_learn

THREE_PART = "three-part"
TOWER = "tower"


@dataclass(frozen=True)
class ThreePartInstance:
    """Partition [0, n) into P1 (pair-matched), P2 (isolated), P3 (one edge).

    |P3| = floor(sqrt(n)) and |P2| is 1, or 2 when n - |P3| - 1 is odd,
    so that P1 admits a perfect 2-matching.  The hidden hypergraph is
    the P1 pairing plus P3 as a single edge.
    """

    n: int
    p1: tuple[int, ...]
    p2: tuple[int, ...]
    p3: tuple[int, ...]
    matching: Hypergraph

    @property
    def threshold(self) -> float:
        """Largest query size that can still dodge every P1 pair.

        A query with no full pair holds at most one vertex per pair plus
        all of P2 and P3, so anything strictly larger must answer 1
        under every placement of the big edge.
        """
        return len(self.p1) / 2 + len(self.p2) + len(self.p3)


@dataclass(frozen=True)
class TowerInstance:
    """Stacked parts P_0..P_R with quadratically growing edge sizes.

    Level i is exactly partitioned into c * d_i edges of size d_i, with
    d_0 = 3 and d_{i+1} = c * d_i^2 = |P_i|.  Leftover vertices are
    isolated.
    """

    n: int
    c: int
    parts: tuple[tuple[int, ...], ...]
    edge_sizes: tuple[int, ...]
    matching: Hypergraph
    leftovers: tuple[int, ...]

    @property
    def depth(self) -> int:
        """R, the index of the last built level."""
        return len(self.parts) - 1


def gen_three_part(n: int, seed=None) -> ThreePartInstance:
    """Uniformly random three-part instance on n >= 9 vertices."""
    if n < 9:
        raise ValueError("three-part construction needs n >= 9")
    root = math.isqrt(n)
    spare = 2 if (n - root - 1) % 2 else 1
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    p3 = tuple(sorted(int(v) for v in perm[:root]))
    p2 = tuple(sorted(int(v) for v in perm[root : root + spare]))
    p1_order = perm[root + spare :]
    edges = [
        tuple(sorted((int(p1_order[i]), int(p1_order[i + 1]))))
        for i in range(0, len(p1_order), 2)
    ]
    edges.append(p3)
    return ThreePartInstance(
        n=n,
        p1=tuple(sorted(int(v) for v in p1_order)),
        p2=p2,
        p3=p3,
        matching=Hypergraph(n, edges),
    )


def tower_factor(n: int) -> int:
    """Default growth factor ceil(3 * ln^2 n)."""
    return math.ceil(3.0 * math.log(n) ** 2)


def gen_tower(n: int, c_override: Optional[int] = None, seed=None) -> TowerInstance:
    """Greedy tower of parts, as many levels as fit inside n vertices.

    Every level P_i is a random subset of the remaining vertices,
    randomly partitioned into its c * d_i edges.  Raises when even P_0
    does not fit, naming the minimum feasible n for the chosen factor.
    """
    c = tower_factor(n) if c_override is None else c_override
    if c < 1:
        raise ValueError("growth factor must be positive")
    if n < 9 * c:
        raise ValueError(
            f"tower construction with factor {c} needs at least {9 * c} vertices"
        )
    level_sizes = []
    d, total = 3, 0
    while total + c * d * d <= n:
        level_sizes.append((d, c * d * d))
        total += c * d * d
        d = c * d * d
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    parts, edges, at = [], [], 0
    for d_i, size in level_sizes:
        block = perm[at : at + size]
        at += size
        parts.append(tuple(sorted(int(v) for v in block)))
        for j in range(0, size, d_i):
            edges.append(tuple(sorted(int(v) for v in block[j : j + d_i])))
    leftovers = tuple(sorted(int(v) for v in perm[at:]))
    return TowerInstance(
        n=n,
        c=c,
        parts=tuple(parts),
        edge_sizes=tuple(d for d, _ in level_sizes),
        matching=Hypergraph(n, edges),
        leftovers=leftovers,
    )


@dataclass
class IndistinguishabilityReport:
    """Answer-disagreement statistics across redraws of the hidden part."""

    family: str
    n: int
    c: Optional[int]
    depth: Optional[int]
    redraws: int
    queries: int
    disagreement: float
    size_buckets: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "family": self.family,
                "n": self.n,
                "c": self.c,
                "R": self.depth,
                "redraws": self.redraws,
                "queries": self.queries,
                "disagreement": self.disagreement,
                "size_buckets": self.size_buckets,
            },
            indent=2,
        )


def _mixed_query_sizes(rng, count: int, n: int) -> np.ndarray:
    return rng.integers(1, n + 1, size=count)


def _replayed_disagreement(
    rng,
    n: int,
    queries: int,
    sizes_for,
    fixed_edges: list[tuple[int, ...]],
    redraw_vertex_sets: list[list[np.ndarray]],
) -> tuple[float, list[dict]]:
    """Replay one random query multiset against every redraw.

    A query agrees across redraws unless it misses every fixed edge and
    contains the moving part of some redraws but not others; with c of
    k redraws answering positive, c*(k-c) of the C(k,2) pairs disagree.
    Returns the overall disagreement fraction and ten equal-width
    size-bucket breakdowns.
    """
    k = len(redraw_vertex_sets)
    pair_count = k * (k - 1) // 2
    fixed_cols = (
        [np.fromiter(e, dtype=np.int64, count=len(e)) for e in fixed_edges]
    )
    bucket_edges = np.linspace(1, n + 1, 11)
    bucket_q = np.zeros(10, dtype=np.int64)
    bucket_dis = np.zeros(10, dtype=np.float64)
    total = 0.0
    chunk = max(1, min(1024, queries))
    done = 0
    while done < queries:
        take = min(chunk, queries - done)
        sizes = sizes_for(rng, take, n)
        uniforms = rng.random((take, n))
        kth = np.take_along_axis(
            np.sort(uniforms, axis=1), sizes[:, None] - 1, axis=1
        )
        rows = uniforms <= kth
        base = np.zeros(take, dtype=bool)
        for cols in fixed_cols:
            base |= rows[:, cols].all(axis=1)
        counts = np.zeros(take, dtype=np.int64)
        for redraw in redraw_vertex_sets:
            hit = np.zeros(take, dtype=bool)
            for cols in redraw:
                hit |= rows[:, cols].all(axis=1)
            counts += hit
        counts[base] = k
        dis = counts * (k - counts) / pair_count
        total += float(dis.sum())
        which = np.clip(
            np.searchsorted(bucket_edges, sizes, side="right") - 1, 0, 9
        )
        np.add.at(bucket_q, which, 1)
        np.add.at(bucket_dis, which, dis)
        done += take
    buckets = [
        {
            "size_lo": int(bucket_edges[b]),
            "size_hi": int(bucket_edges[b + 1] - 1),
            "queries": int(bucket_q[b]),
            "disagreement": float(bucket_dis[b] / bucket_q[b]) if bucket_q[b] else 0.0,
        }
        for b in range(10)
    ]
    return total / queries, buckets


def indistinguishability_experiment(
    family: str,
    n: int,
    queries: int,
    query_size_policy: str = "mixed",
    seed=None,
    *,
    redraws: int = 20,
    c_override: Optional[int] = None,
) -> IndistinguishabilityReport:
    """Measure how well redraws of the hidden part hide from fixed queries.

    Fixes the low part of the construction (the P1 pairing for the
    three-part family, all levels below the top for towers), redraws the
    hidden part the given number of times, replays one random query
    multiset against every redraw, and reports the fraction of
    (query, redraw-pair) combinations whose answers differ.
    """
    if queries < 1:
        raise ValueError("need at least one query")
    if redraws < 2:
        raise ValueError("need at least two redraws to compare")
    if query_size_policy != "mixed":
        raise ValueError(f"unknown query size policy: {query_size_policy!r}")
    rng = np.random.default_rng(seed)

    if family == THREE_PART:
        inst = gen_three_part(n, seed=rng)
        pool = np.array(inst.p2 + inst.p3, dtype=np.int64)
        fixed = [e for e in sorted(inst.matching.edges) if len(e) == 2]
        moving = []
        for _ in range(redraws):
            shuffled = rng.permutation(pool)
            moving.append([np.sort(shuffled[: len(inst.p3)])])
        c_used, depth = None, None
    elif family == TOWER:
        inst = gen_tower(n, c_override=c_override, seed=rng)
        top = np.array(inst.parts[-1], dtype=np.int64)
        d_top = inst.edge_sizes[-1]
        fixed = [
            e for e in sorted(inst.matching.edges) if len(e) != d_top
        ]
        moving = []
        for _ in range(redraws):
            shuffled = rng.permutation(top)
            moving.append(
                [
                    np.sort(shuffled[j : j + d_top])
                    for j in range(0, len(top), d_top)
                ]
            )
        c_used, depth = inst.c, inst.depth
    else:
        raise ValueError(f"unknown family: {family!r}")

    disagreement, buckets = _replayed_disagreement(
        rng, n, queries, _mixed_query_sizes, fixed, moving
    )
    return IndistinguishabilityReport(
        family=family,
        n=n,
        c=c_used,
        depth=depth,
        redraws=redraws,
        queries=queries,
        disagreement=disagreement,
        size_buckets=buckets,
    )


def _matching_learner(kind: SubroutineKind) -> Callable[[EdgeOracle, object], LearnOutcome]:
    def run(oracle: EdgeOracle, seed) -> LearnOutcome:
        return find_matching(oracle, kind, seed=seed)

    return run


def _brute_force(oracle: EdgeOracle, seed) -> LearnOutcome:
    try:
        learned = brute_force_learn(oracle)
    except RoundLimitExceeded:
        return LearnOutcome(
            edges=frozenset(), ledger=oracle.ledger.snapshot(), truncated=True
        )
    return LearnOutcome(edges=learned.edges, ledger=oracle.ledger.snapshot())


LEARNERS: dict[str, Callable[[EdgeOracle, object], LearnOutcome]] = {
    "matching-parallel": _matching_learner(SubroutineKind.PARALLEL),
    "matching-adaptive": _matching_learner(SubroutineKind.ADAPTIVE),
    "brute-force": _brute_force,
}


def round_limited_attack(
    learner: Union[str, Callable[[EdgeOracle, object], LearnOutcome]],
    family: str,
    n: int,
    rounds_cap: Optional[int] = None,
    seed=None,
) -> bool:
    """Run a learner under a hard round cap; True iff it recovers exactly.

    The oracle refuses to open round rounds_cap + 1; learners with
    truncation handling return their best guess, anything else is
    treated as a failed run.  The instance is drawn from the named
    family with the given seed and the learner gets an independent
    stream derived from the same seed.
    """
    if family == THREE_PART:
        hidden = gen_three_part(n, seed=seed).matching
    elif family == TOWER:
        hidden = gen_tower(n, seed=seed).matching
    else:
        raise ValueError(f"unknown family: {family!r}")
    oracle = EdgeOracle(hidden, rounds_cap=rounds_cap)
    fn = LEARNERS[learner] if isinstance(learner, str) else learner
    learner_seed = None if seed is None else (int(seed), 1)
    try:
        outcome = fn(oracle, learner_seed)
    except RoundLimitExceeded:
        return False
    return outcome.edges == hidden.edges
