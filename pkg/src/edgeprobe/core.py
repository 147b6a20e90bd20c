"""Hypergraph model plus an edge-detecting oracle with exact query/round accounting.

The oracle answers Q(S) = 1 iff the queried vertex set S contains at least one
hidden edge entirely.  Every learner in this package talks to the hidden graph
only through :class:`EdgeOracle`, and the attached :class:`QueryLedger` counts
queries and adaptive rounds exactly: a batch is one round no matter its size,
a lone query opens a round of size one.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

Edge = tuple[int, ...]


class RoundLimitExceeded(RuntimeError):
    """Raised when opening one more ledger round would exceed the configured cap."""


class BudgetRefusedError(RuntimeError):
    """An operation refused to run because its worst-case query demand exceeds a cap.

    Attributes
    ----------
    demand : float
        Estimated number of queries the operation would need.
    cap : float
        The configured ceiling it collided with.
    """

    def __init__(self, message: str, demand: float, cap: float):
        super().__init__(message)
        self.demand = demand
        self.cap = cap


def vertex_tuple(vertices: Iterable[int], n: Optional[int] = None) -> Edge:
    """Canonicalize a vertex collection: sorted, duplicate-free tuple of ints.

    Raises ValueError on ids outside [0, n) when n is given.
    """
    vs = sorted(set(int(v) for v in vertices))
    if vs and vs[0] < 0:
        raise ValueError(f"negative vertex id {vs[0]}")
    if n is not None and vs and vs[-1] >= n:
        raise ValueError(f"vertex id {vs[-1]} out of range for n={n}")
    return tuple(vs)


class Hypergraph:
    """A vertex count n and a set of nonempty edges over [0, n).

    Edges are stored as sorted tuples; the edge set is a frozenset so equal
    hypergraphs hash equal.  Derived quantities (max degree, rank, edge size
    ratio) are computed on demand.
    """

    __slots__ = ("n", "edges", "_edge_sets")

    def __init__(self, n: int, edges: Iterable[Iterable[int]] = ()):
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        self.n = int(n)
        canon = []
        for e in edges:
            t = vertex_tuple(e, self.n)
            if not t:
                raise ValueError("empty edge is not allowed")
            canon.append(t)
        self.edges: frozenset[Edge] = frozenset(canon)
        if len(canon) != len(self.edges):
            raise ValueError("duplicate edges are not allowed")
        self._edge_sets: Optional[list[frozenset[int]]] = None

    # -- derived quantities -------------------------------------------------

    @property
    def edge_sets(self) -> list[frozenset[int]]:
        if self._edge_sets is None:
            self._edge_sets = [frozenset(e) for e in sorted(self.edges)]
        return self._edge_sets

    def max_degree(self) -> int:
        deg: dict[int, int] = {}
        for e in self.edges:
            for v in e:
                deg[v] = deg.get(v, 0) + 1
        return max(deg.values(), default=0)

    def rank(self) -> int:
        """Maximum edge size, 0 for the empty hypergraph."""
        return max((len(e) for e in self.edges), default=0)

    def min_edge_size(self) -> int:
        return min((len(e) for e in self.edges), default=0)

    def edge_size_ratio(self) -> Optional[float]:
        """rank / min edge size; None when there are no edges."""
        if not self.edges:
            return None
        return self.rank() / self.min_edge_size()

    def is_matching(self) -> bool:
        return self.max_degree() <= 1

    def is_antichain(self) -> bool:
        """True when no edge is strictly contained in another."""
        sets = self.edge_sets
        for i, a in enumerate(sets):
            for b in sets[i + 1 :]:
                if a < b or b < a:
                    return False
        return True

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "edges": sorted(list(e) for e in self.edges)})

    @classmethod
    def from_json(cls, text: str) -> "Hypergraph":
        obj = json.loads(text)
        if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
            raise ValueError("instance JSON must be an object with 'n' and 'edges'")
        return cls(obj["n"], obj["edges"])

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Hypergraph":
        with open(path) as fh:
            return cls.from_json(fh.read())

    # -- dunder -------------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Hypergraph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Hypergraph(n={self.n}, m={len(self.edges)})"


@dataclass
class LedgerSnapshot:
    total_queries: int
    rounds: int
    per_round_queries: tuple[int, ...]
    wall_time: float


class _RoundHandle:
    """Accumulates chunked charges into one ledger round.

    The round materializes on the first charge, so a handle that never charges
    leaves no trace (an empty batch is an input error at the API edge, but a
    code path that conditionally skips all its queries should not count a
    round either).  Each handle remembers its own round, so two handles open
    at once keep charging their respective rounds even when interleaved.
    """

    def __init__(self, ledger: "QueryLedger"):
        self._ledger = ledger
        self._index: Optional[int] = None

    def charge(self, count: int) -> None:
        if count <= 0:
            raise ValueError("charge must be positive")
        if self._index is None:
            self._ledger._materialize_round()
            self._index = len(self._ledger.per_round_queries) - 1
        self._ledger.per_round_queries[self._index] += int(count)


class QueryLedger:
    """Counts total queries and adaptive rounds; optionally hard-stops at a cap.

    Invariants: total_queries == sum(per_round_queries) and
    rounds == len(per_round_queries).  When rounds_cap is set, materializing
    round number rounds_cap + 1 raises RoundLimitExceeded *before* any query
    of that round is charged.
    """

    def __init__(self, rounds_cap: Optional[int] = None):
        if rounds_cap is not None and rounds_cap < 0:
            raise ValueError("rounds_cap must be nonnegative")
        self.per_round_queries: list[int] = []
        self.wall_time: float = 0.0
        self.rounds_cap = rounds_cap

    @property
    def total_queries(self) -> int:
        return sum(self.per_round_queries)

    @property
    def rounds(self) -> int:
        return len(self.per_round_queries)

    def _materialize_round(self) -> None:
        if self.rounds_cap is not None and self.rounds >= self.rounds_cap:
            raise RoundLimitExceeded(
                f"round limit {self.rounds_cap} reached; refusing to open round "
                f"{self.rounds + 1}"
            )
        self.per_round_queries.append(0)

    def charge_round(self, count: int) -> None:
        """Charge an atomic batch of `count` queries as one round."""
        if count <= 0:
            raise ValueError("a round must contain at least one query")
        self._materialize_round()
        self.per_round_queries[-1] += int(count)

    @contextmanager
    def round(self) -> Iterator[_RoundHandle]:
        """Context for charging one round in chunks (vectorized batch paths)."""
        yield _RoundHandle(self)

    def snapshot(self) -> LedgerSnapshot:
        return LedgerSnapshot(
            total_queries=self.total_queries,
            rounds=self.rounds,
            per_round_queries=tuple(self.per_round_queries),
            wall_time=self.wall_time,
        )


class EdgeOracle:
    """Answers Q(S) = 1 iff some hidden edge is entirely contained in S.

    Learners must route all traffic through :meth:`query` / :meth:`query_batch`
    (or the bulk helpers, which charge identically); the hidden hypergraph is
    held privately.  Ids out of range are input errors, not silent falses.
    """

    def __init__(self, hidden: Hypergraph, rounds_cap: Optional[int] = None):
        self._hidden = hidden
        self.ledger = QueryLedger(rounds_cap=rounds_cap)

    @property
    def n(self) -> int:
        return self._hidden.n

    # Internal, for oracle-side machinery only (transcript engine, bulk paths).
    @property
    def hidden(self) -> Hypergraph:
        return self._hidden

    def _answer(self, s: frozenset[int]) -> bool:
        return any(e <= s for e in self._hidden.edge_sets)

    def _check_ids(self, vertices: Iterable[int]) -> frozenset[int]:
        s = frozenset(int(v) for v in vertices)
        for v in s:
            if v < 0 or v >= self._hidden.n:
                raise ValueError(f"vertex id {v} out of range for n={self._hidden.n}")
        return s

    def query(self, vertices: Iterable[int]) -> bool:
        """A lone query; opens its own round of size one."""
        s = self._check_ids(vertices)
        self.ledger.charge_round(1)
        return self._answer(s)

    def query_batch(self, batch: Sequence[Iterable[int]]) -> list[bool]:
        """Answer every set of a nonempty batch; exactly one round."""
        if len(batch) == 0:
            raise ValueError("empty batch")
        sets = [self._check_ids(b) for b in batch]
        self.ledger.charge_round(len(sets))
        return [self._answer(s) for s in sets]

    def query_sets(self, sets: Sequence[Iterable[int]], handle: _RoundHandle) -> list[bool]:
        """Answer each set, charging the given round handle.

        Lets several co-scheduled subroutine instances share one ledger round;
        an empty list charges nothing and leaves the round unmaterialized.
        """
        checked = [self._check_ids(s) for s in sets]
        if checked:
            handle.charge(len(checked))
        return [self._answer(s) for s in checked]

    def query_rows(self, rows: np.ndarray, handle: _RoundHandle) -> np.ndarray:
        """Vectorized batch: answer each row of a boolean membership matrix.

        rows has shape (k, n); row i encodes the queried set.  Charges k
        queries to the given round handle, so chunked callers still produce a
        single ledger round.  Equivalent to query_batch row by row.
        """
        if rows.ndim != 2 or rows.shape[1] != self._hidden.n:
            raise ValueError("membership matrix must be (k, n)")
        k = rows.shape[0]
        if k == 0:
            return np.zeros(0, dtype=bool)
        handle.charge(k)
        out = np.zeros(k, dtype=bool)
        for e in self._hidden.edge_sets:
            idx = list(e)
            out |= rows[:, idx].all(axis=1)
        return out

    def _edge_columns(self) -> list[np.ndarray]:
        """Cached per-edge vertex-index arrays, aligned with edge_sets."""
        cols = getattr(self, "_edge_cols", None)
        if cols is None:
            cols = [
                np.fromiter(sorted(e), dtype=np.int64, count=len(e))
                for e in self._hidden.edge_sets
            ]
            self._edge_cols = cols
        return cols

    def query_deletion_rows(
        self,
        rows: np.ndarray,
        gate_handle: _RoundHandle,
        deletion_handle: _RoundHandle,
        *,
        only_positive: bool,
    ) -> tuple[np.ndarray, set[Edge]]:
        """Gate each nonempty row, then answer its single-vertex deletions.

        The query shape of the one-shot learners: Q(S_i) for every sample,
        then Q(S_i minus {v}) for each v in S_i, speculatively for every
        nonempty sample (only_positive=False) or just for the positive ones
        (only_positive=True).  Gates charge gate_handle and deletions charge
        deletion_handle; passing the same handle twice merges everything
        into one round.  Empty rows and empty deletion sets (|S_i| = 1) are
        never queried, matching the learners' skip rule for Q(empty).

        Answers come back compressed: the gate vector plus the set of
        distinct nonempty zero sets {v in S_i : Q(S_i minus {v}) = 0} over
        positive rows.  A negative row's deletion answers are all negative
        (shrinking a set without edges cannot create one), so they are
        charged but not repeated back.
        """
        rows = np.asarray(rows, dtype=bool)
        if rows.ndim != 2 or rows.shape[1] != self._hidden.n:
            raise ValueError("membership matrix must be (k, n)")
        sizes = rows.sum(axis=1)
        n_gates = int(np.count_nonzero(sizes))
        if n_gates:
            gate_handle.charge(n_gates)
        edge_sets = self._hidden.edge_sets
        gates = np.zeros(rows.shape[0], dtype=bool)
        full = np.zeros((rows.shape[0], len(edge_sets)), dtype=bool)
        if n_gates:
            for j, cj in enumerate(self._edge_columns()):
                full[:, j] = rows[:, cj].all(axis=1)
            gates = full.any(axis=1)
        scope = gates if only_positive else sizes > 0
        deletions = int(sizes[scope & (sizes >= 2)].sum())
        if deletions:
            deletion_handle.charge(deletions)

        candidates: set[Edge] = set()
        pos = np.nonzero(gates)[0]
        if pos.size:
            counts = full[pos].sum(axis=1)
            single = pos[counts == 1]
            if single.size:
                for j in np.unique(full[single].argmax(axis=1)):
                    candidates.add(tuple(sorted(edge_sets[j])))
            for i in pos[counts > 1]:
                js = np.nonzero(full[i])[0]
                inter = frozenset.intersection(*(edge_sets[j] for j in js))
                if inter:
                    candidates.add(tuple(sorted(inter)))
        return gates, candidates

    def query_all_subsets(self) -> np.ndarray:
        """Answer every subset of [0, n) in one round of 2^n queries.

        Index X of the result is the answer for the set whose membership mask
        is X (bit v set iff vertex v is in the set).  Refused for n > 20.
        """
        n = self._hidden.n
        if n > 20:
            raise BudgetRefusedError(
                f"2^{n} subset queries refused (n > 20)", demand=float(2**n), cap=2.0**20
            )
        masks = np.arange(1 << n, dtype=np.uint32)
        self.ledger.charge_round(1 << n)
        pos = np.zeros(1 << n, dtype=bool)
        for e in self._hidden.edges:
            em = np.uint32(0)
            for v in e:
                em |= np.uint32(1 << v)
            pos |= (masks & em) == em
        return pos


def is_unique_edge_cover(
    family: Sequence[Iterable[int]], hypergraph: Hypergraph
) -> bool:
    """True iff every edge has a family member containing it and no other edge.

    Vacuously true for the empty hypergraph.
    """
    fam = [frozenset(s) for s in family]
    for e in hypergraph.edge_sets:
        hit = False
        for s in fam:
            if e <= s and not any(
                other <= s for other in hypergraph.edge_sets if other != e
            ):
                hit = True
                break
        if not hit:
            return False
    return True


@dataclass
class LearnOutcome:
    """What a learner returns: the learned edge set plus its ledger snapshot."""

    edges: frozenset[Edge]
    ledger: LedgerSnapshot
    truncated: bool = False
    violations: tuple[str, ...] = ()

    def as_hypergraph(self, n: int) -> Hypergraph:
        return Hypergraph(n, self.edges)


class timed:
    """Tiny context manager: accumulates elapsed wall time onto a ledger."""

    def __init__(self, ledger: QueryLedger):
        self.ledger = ledger

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ledger.wall_time += time.perf_counter() - self._t0
        return False
