"""One-shot learner for near-uniform hypergraphs of bounded degree.

Draws a large family of random vertex subsets, asks the oracle about
each subset and each subset minus one vertex, and keeps the vertex sets
whose deletion answers vanish.  When a sample contains exactly one
edge, those vertices are exactly that edge; when it contains several,
they are the common intersection.  Intersections shorter than the
minimum legal edge size cannot be edges and are dropped outright; the
rest are handled by a final consolidation pass that discards any
candidate strictly contained in a surviving larger one.

Two execution modes trade rounds for queries.  Eager mode issues every
gate and every deletion speculatively and is genuinely one-round; lazy
mode gates first and pays deletion queries only for positive samples,
finishing in two rounds with far fewer queries.  Both modes draw the
identical sample family for a given seed, since generation consumes the
RNG the same way regardless of mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BudgetRefusedError, Edge, EdgeOracle, LearnOutcome, timed

DEFAULT_QUERY_CAP = 100_000_000
_CHUNK = 1 << 15


@dataclass(frozen=True)
class LowDegreeParams:
    """Learner inputs: edge size ratio rho, max edge size d, max degree delta.

    d/rho bounds the minimum edge size from below and must be at least 2.
    sample_budget_override replaces the default sample count outright;
    lazy_mode picks the two-round execution; seed fixes the sample family.
    """

    rho: float = 1.0
    d: int = 2
    delta: int = 2
    sample_budget_override: Optional[int] = None
    lazy_mode: bool = False
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.rho < 1:
            raise ValueError("rho must be at least 1")
        if self.delta < 2:
            raise ValueError("delta must be at least 2")
        if self.d / self.rho < 2:
            raise ValueError("d/rho must be at least 2")
        if self.sample_budget_override is not None and self.sample_budget_override < 1:
            raise ValueError("sample budget override must be positive")


def plan_budget(n: int, params: LowDegreeParams) -> tuple[int, int]:
    """Sample count and worst-case query total, without touching an oracle.

    The default count is ceil((2n)^(rho*delta) * ln^2 n); an override on
    the params replaces it.  Worst case is (n+1) queries per sample: one
    gate plus up to n deletions.
    """
    if params.sample_budget_override is not None:
        samples = params.sample_budget_override
    else:
        samples = math.ceil((2.0 * n) ** (params.rho * params.delta) * math.log(n) ** 2)
    return samples, (n + 1) * samples


def inclusion_probability(n: int, params: LowDegreeParams) -> float:
    """Per-vertex sampling probability (2n)^(-rho/d)."""
    return (2.0 * n) ** (-params.rho / params.d)


def find_low_degree_edges(
    oracle: EdgeOracle,
    params: LowDegreeParams,
    *,
    query_cap: int = DEFAULT_QUERY_CAP,
) -> LearnOutcome:
    """Learn a rho-near-uniform hypergraph with max degree delta >= 2.

    For each positive sample S_i whose zero set
    {v in S_i : Q(S_i minus {v}) = 0} is nonempty, that set becomes a
    candidate.  Zero sets shorter than ceil(d/rho) are intersections of
    overlapping edges, never edges themselves, so they are discarded on
    the spot; candidates strictly contained in another candidate are
    removed at the end.  At rho = 1 the floor catches every possible
    intersection artifact, so each returned set answers positively on
    replay; for rho > 1 an oversized intersection can survive with
    vanishing probability.  Recovery holds with probability 1 - o(1)
    in the guarantee regime n >= 100; smaller inputs run fine but
    promise nothing.

    Refuses to start when the mode's up-front query demand exceeds
    query_cap: eager mode is on the hook for (n+1) queries per sample,
    lazy mode for the gates only (its deletion cost is data-dependent).
    """
    n = oracle.n
    n_samples, worst = plan_budget(n, params)
    demand = n_samples if params.lazy_mode else worst
    if demand > query_cap:
        raise BudgetRefusedError(
            f"planned demand of {demand} queries exceeds the cap of {query_cap}; "
            "pass a larger query_cap or lower the sample budget",
            demand=float(demand),
            cap=float(query_cap),
        )
    p = inclusion_probability(n, params)
    rng = np.random.default_rng(params.seed)
    candidates: set[Edge] = set()
    with timed(oracle.ledger):
        with oracle.ledger.round() as gate_handle, oracle.ledger.round() as late:
            deletion_handle = late if params.lazy_mode else gate_handle
            done = 0
            while done < n_samples:
                take = min(_CHUNK, n_samples - done)
                rows = rng.random((take, n)) < p
                _, found = oracle.query_deletion_rows(
                    rows,
                    gate_handle,
                    deletion_handle,
                    only_positive=params.lazy_mode,
                )
                candidates |= found
                done += take
    # Legal edge sizes live in [d/rho, d]; the small epsilon keeps a
    # mathematically integral quotient from rounding up under floating
    # point and banning a legitimate size.
    min_size = math.ceil(params.d / params.rho - 1e-9)
    edges = consolidate(c for c in candidates if len(c) >= min_size)
    return LearnOutcome(
        edges=frozenset(edges),
        ledger=oracle.ledger.snapshot(),
        truncated=False,
    )


def consolidate(candidates) -> set[Edge]:
    """Drop every candidate strictly contained in another candidate."""
    sets = {tuple(c): frozenset(c) for c in candidates}
    return {
        c
        for c, cs in sets.items()
        if not any(cs < other for other in sets.values())
    }
