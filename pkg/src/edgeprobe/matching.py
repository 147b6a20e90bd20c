"""Learners for hidden hypermatchings behind an edge-detecting oracle.

The entry point is find_matching, which runs a singleton sweep and then a
schedule of sampling phases with growing sparsity parameter s.  Each phase
draws random vertex samples, gates them through the oracle in one batch,
and hands the positive samples to a one-edge subroutine:

* the parallel subroutine deletes one vertex at a time from the sample in
  a single extra round and keeps the vertices whose deletion flips the
  answer to zero;
* the adaptive subroutine performs a budgeted halving search over the
  sample, spending about log2 |S| extra rounds but far fewer queries.

All subroutine instances spawned by one phase are co-scheduled: matching
iterations share a ledger round, so the round count reflects parallel
execution.  For large instances the oracle-side transcript engine in
``_engine`` reproduces the exact joint distribution of (learned edges,
per-round query counts) without materializing individual samples.

Queries never include the empty set; its answer is zero a priori, so
empty samples and empty deletions are skipped without a charge.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .core import (
    Edge,
    EdgeOracle,
    LearnOutcome,
    RoundLimitExceeded,
    timed,
    vertex_tuple,
)

__all__ = [
    "SubroutineKind",
    "default_alpha",
    "quantized_probability",
    "find_singletons",
    "find_edge_parallel",
    "find_edge_adaptive",
    "find_disjoint_edges",
    "find_matching",
]

AUTO_ENGINE_THRESHOLD = 10_000_000

# A phase expects at least max(ln n, MIN_PHASE_LOG)^2 of its samples to
# contain any in-range edge.  Below a dozen vertices the bare ln^2 n
# factor drops under 1 and near-full-size edges get missed outright, so
# the log is floored; ln 13 > 2.5 already, leaving larger inputs on the
# plain asymptotic count.
MIN_PHASE_LOG = 2.5


class SubroutineKind(Enum):
    PARALLEL = "parallel"
    ADAPTIVE = "adaptive"


def default_alpha(kind: SubroutineKind, n: int) -> float:
    """Phase growth rate: 2 for the parallel subroutine, 1/(1 - 1/(2 ln n))
    for the adaptive one (which needs n >= 2 so the rate stays positive)."""
    if kind is SubroutineKind.PARALLEL:
        return 2.0
    if n < 2:
        raise ValueError("the adaptive default alpha needs n >= 2")
    return 1.0 / (1.0 - 1.0 / (2.0 * math.log(n)))


def quantized_probability(q: float) -> float:
    """Snap an inclusion probability onto the 2**-32 lattice.

    Both the literal sampler and the transcript engine use the snapped
    value, so they draw from identical distributions.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError("probability out of range")
    return math.floor(q * 2.0**32) / 2.0**32


def find_singletons(oracle: EdgeOracle, vertices=None) -> frozenset[Edge]:
    """All size-one edges among the given vertices (default: all).

    One query per vertex, all in a single round.
    """
    pool = range(oracle.n) if vertices is None else vertices
    V = vertex_tuple(pool, oracle.n)
    if not V:
        return frozenset()
    with oracle.ledger.round() as handle:
        answers = oracle.query_sets([(v,) for v in V], handle)
    return frozenset((v,) for v, hit in zip(V, answers) if hit)


def find_edge_parallel(
    oracle: EdgeOracle, vertices: Iterable[int], *, gate: Optional[bool] = None
) -> Optional[Edge]:
    """Single-deletion probe for the one edge a sample may contain.

    Gates on Q(S), then queries every S minus one vertex in a single
    batch.  The vertices whose deletion turns the answer off are exactly
    the intersection of the contained edges, so a sample holding one edge
    returns that edge and a sample holding two or more disjoint edges
    returns None.

    Pass gate=True when Q(S) = 1 is already known from an earlier batch
    (the phase sampler's gating round); the gate query is then skipped.
    Costs at most len(S) + 1 queries in at most two rounds.
    """
    S = vertex_tuple(vertices, oracle.n)
    if not S:
        raise ValueError("empty candidate set")
    if gate is None:
        gate = oracle.query(S)
    if not gate:
        return None
    if len(S) == 1:
        # Deleting the lone vertex leaves the empty set, which never
        # answers positive, so S itself is the edge.
        return S
    with oracle.ledger.round() as handle:
        answers = oracle.query_sets(
            [S[:i] + S[i + 1 :] for i in range(len(S))], handle
        )
    edge = tuple(v for v, still in zip(S, answers) if not still)
    return edge if edge else None


class _AdaptiveSearch:
    """Halving-search state for one candidate set.

    The search is driven from outside so that many instances can share
    ledger rounds: each call to begin_iteration retires singleton parts
    and emits this iteration's query sets (two per splittable part),
    absorb consumes the answers, and final_queries/finish run the
    verification batch.  ``alive`` goes False when the search concludes
    the sample cannot hold exactly one small edge.
    """

    def __init__(self, vertices, s):
        self.s = s
        self.frontier = [(tuple(vertices), ())]
        self.found: list[int] = []
        self.alive = True
        self._pending: list = []
        self._candidate: Optional[Edge] = None

    @property
    def searching(self) -> bool:
        return self.alive and (bool(self.frontier) or bool(self._pending))

    def begin_iteration(self) -> list:
        if len(self.frontier) > self.s:
            self.alive = False
            self.frontier = []
            return []
        queries = []
        self._pending = []
        for part, context in self.frontier:
            if len(part) == 1:
                self.found.append(part[0])
                continue
            cut = (len(part) + 1) // 2
            first, second = part[:cut], part[cut:]
            self._pending.append((first, second, context))
            queries.append(first + context)
            queries.append(second + context)
        self.frontier = []
        return queries

    def absorb(self, answers) -> None:
        frontier = []
        pos = 0
        for first, second, context in self._pending:
            hit_first, hit_second = answers[pos], answers[pos + 1]
            pos += 2
            if hit_first and hit_second:
                # Two disjoint witnesses: the sample holds at least two
                # edges, so there is nothing unique to return.
                self.alive = False
                self._pending = []
                return
            if hit_first:
                frontier.append((first, context))
            elif hit_second:
                frontier.append((second, context))
            else:
                frontier.append((first, second + context))
                frontier.append((second, first + context))
        self._pending = []
        self.frontier = frontier

    def final_queries(self) -> list:
        assert self.found, "a live search always retires at least one vertex"
        if len(self.found) > self.s:
            self.alive = False
            return []
        e = tuple(sorted(self.found))
        self._candidate = e
        queries = [e]
        if len(e) >= 2:
            queries.extend(e[:i] + e[i + 1 :] for i in range(len(e)))
        return queries

    def finish(self, answers) -> Optional[Edge]:
        if not answers[0] or any(answers[1:]):
            return None
        return self._candidate


def find_edge_adaptive(
    oracle: EdgeOracle,
    vertices: Iterable[int],
    s,
    *,
    gate: Optional[bool] = None,
) -> Optional[Edge]:
    """Budgeted halving search for the one edge a sample may contain.

    Repeatedly splits the sample in half, keeping a frontier of parts
    that must intersect the edge; a frontier larger than s aborts, two
    positive sibling halves abort (two disjoint edges), and the surviving
    single vertices are verified as an edge by one final batch.  Costs at
    most 2*s*ceil(log2 |S|) + s + 1 queries in ceil(log2 |S|) + 2 rounds.

    gate=True skips the opening Q(S) query when the answer is already
    known positive.
    """
    S = vertex_tuple(vertices, oracle.n)
    if not S:
        raise ValueError("empty candidate set")
    if s < 1:
        raise ValueError("frontier budget s must be at least 1")
    if gate is None:
        gate = oracle.query(S)
    if not gate:
        return None
    search = _AdaptiveSearch(S, s)
    while search.searching:
        queries = search.begin_iteration()
        if queries:
            with oracle.ledger.round() as handle:
                answers = oracle.query_sets(queries, handle)
            search.absorb(answers)
    if not search.alive:
        return None
    queries = search.final_queries()
    if not search.alive:
        return None
    with oracle.ledger.round() as handle:
        answers = oracle.query_sets(queries, handle)
    return search.finish(answers)


def _run_lockstep(ledger, searches, answer):
    """Drive many adaptive searches so iteration k of every live instance
    lands in one shared round, with a single trailing verification round.

    ``answer(search, sets, handle)`` resolves one instance's queries and
    charges the handle; handing every instance the same handle is what
    makes the round shared.
    """
    while any(se.searching for se in searches):
        queued = []
        for se in searches:
            if not se.searching:
                continue
            queries = se.begin_iteration()
            if queries:
                queued.append((se, queries))
        if not queued:
            continue
        with ledger.round() as handle:
            replies = [answer(se, qs, handle) for se, qs in queued]
        for (se, _), answers in zip(queued, replies):
            se.absorb(answers)

    finals = []
    for se in searches:
        if not se.alive:
            continue
        queries = se.final_queries()
        if queries:
            finals.append((se, queries))
    found = set()
    if finals:
        with ledger.round() as handle:
            replies = [answer(se, qs, handle) for se, qs in finals]
        for (se, _), answers in zip(finals, replies):
            edge = se.finish(answers)
            if edge is not None:
                found.add(edge)
    return found


def _sample_positives(oracle, vertices, count, q, rng):
    """Draw ``count`` q-samples of ``vertices`` and gate them in one round.

    Returns the positive samples as vertex tuples.  Empty samples are
    skipped without a query; the shared round only materializes if some
    sample is nonempty.
    """
    cols = np.fromiter(vertices, dtype=np.int64)
    positives = []
    with oracle.ledger.round() as handle:
        done = 0
        while done < count:
            take = min(16384, count - done)
            membership = rng.random((take, cols.size)) < q
            nonempty = membership.any(axis=1)
            if nonempty.any():
                picked = membership[nonempty]
                rows = np.zeros((picked.shape[0], oracle.n), dtype=bool)
                rows[:, cols] = picked
                answers = oracle.query_rows(rows, handle)
                for row in picked[answers]:
                    positives.append(tuple(cols[np.nonzero(row)[0]].tolist()))
            done += take
    return positives


def find_disjoint_edges(
    oracle: EdgeOracle,
    s,
    alpha: float,
    vertices=None,
    kind: SubroutineKind = SubroutineKind.ADAPTIVE,
    *,
    rng=None,
    engine: str = "auto",
) -> frozenset[Edge]:
    """One sampling phase: find edges of size at most s among ``vertices``.

    Draws ceil(n**alpha * max(ln n, MIN_PHASE_LOG)**2) samples that keep each vertex with
    probability n**(-alpha/s), gates them in one shared round, and runs
    the chosen one-edge subroutine on every positive sample with gates
    handed down, co-scheduled so the phase costs r + 1 rounds when the
    subroutine needs r.  Returns the deduplicated union of found edges.

    engine picks the implementation: "literal" materializes every sample,
    "aggregate" samples the oracle-side transcript distribution instead
    (exact for matchings), and "auto" switches to the aggregate engine
    when sample count times pool size passes AUTO_ENGINE_THRESHOLD.
    """
    if engine not in ("auto", "literal", "aggregate"):
        raise ValueError("engine must be auto, literal, or aggregate")
    if s < 1:
        raise ValueError("frontier budget s must be at least 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    n = oracle.n
    pool = range(n) if vertices is None else vertices
    V = vertex_tuple(pool, n)
    if not V:
        return frozenset()
    rng = np.random.default_rng(rng)
    N = math.ceil(n**alpha * max(math.log(n), MIN_PHASE_LOG) ** 2)
    if N == 0:
        return frozenset()
    q = quantized_probability(min(1.0, n ** (-alpha / s)))

    if engine != "literal":
        from . import _engine

        eligible = _engine.supports(oracle, V, kind)
        if engine == "aggregate":
            if not eligible:
                raise ValueError(
                    "the aggregate engine needs the hidden edges inside the "
                    "pool to form a matching with no singleton edge"
                )
            return _engine.run_phase(oracle, V, N, q, s, kind, rng)
        if eligible and N * len(V) > AUTO_ENGINE_THRESHOLD:
            return _engine.run_phase(oracle, V, N, q, s, kind, rng)

    positives = _sample_positives(oracle, V, N, q, rng)
    found = set()
    if kind is SubroutineKind.PARALLEL:
        deletion_sets = []
        spans = []
        for sample in positives:
            if len(sample) == 1:
                # A positive sample of one vertex is itself an edge.
                found.add(sample)
                continue
            start = len(deletion_sets)
            deletion_sets.extend(
                sample[:i] + sample[i + 1 :] for i in range(len(sample))
            )
            spans.append((sample, start))
        with oracle.ledger.round() as handle:
            answers = oracle.query_sets(deletion_sets, handle)
        for sample, start in spans:
            edge = tuple(
                v
                for i, v in enumerate(sample)
                if not answers[start + i]
            )
            if edge:
                found.add(edge)
    else:
        searches = [_AdaptiveSearch(sample, s) for sample in positives]

        def answer(_search, sets, handle):
            return oracle.query_sets(sets, handle)

        found = _run_lockstep(oracle.ledger, searches, answer)
    return frozenset(found)


def find_matching(
    oracle: EdgeOracle,
    kind: SubroutineKind = SubroutineKind.ADAPTIVE,
    alpha: Optional[float] = None,
    *,
    seed=None,
    engine: str = "auto",
) -> LearnOutcome:
    """Learn a hidden matching through the oracle.

    Runs the singleton sweep, then phases with s growing from 2*alpha by
    s -> floor(alpha*s) + 1 while s < n, each phase sampling only the
    vertices not yet matched, and a last phase at s = n that lets the
    subroutine accept edges of any size.  A RoundLimitExceeded from a
    capped oracle is caught and reported as a truncated outcome carrying
    whatever was learned before the cap.
    """
    n = oracle.n
    if alpha is None:
        alpha = default_alpha(kind, n)
    if alpha <= 1:
        raise ValueError("alpha must exceed 1 for the phase schedule to grow")
    rng = np.random.default_rng(seed)
    learned: set[Edge] = set()
    truncated = False
    with timed(oracle.ledger):
        try:
            learned.update(find_singletons(oracle))
            s = 2.0 * alpha
            while s < n:
                remaining = _unmatched(n, learned)
                learned.update(
                    find_disjoint_edges(
                        oracle, s, alpha, remaining, kind, rng=rng, engine=engine
                    )
                )
                s = math.floor(alpha * s) + 1
            remaining = _unmatched(n, learned)
            learned.update(
                find_disjoint_edges(
                    oracle, n, alpha, remaining, kind, rng=rng, engine=engine
                )
            )
        except RoundLimitExceeded:
            truncated = True
    return LearnOutcome(
        edges=frozenset(learned),
        ledger=oracle.ledger.snapshot(),
        truncated=truncated,
    )


def _unmatched(n, learned):
    used = set()
    for e in learned:
        used.update(e)
    return [v for v in range(n) if v not in used]
