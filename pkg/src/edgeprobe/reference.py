"""Exhaustive ground-truth learner for tiny instances.

Queries every subset of the vertex set in one round and returns the minimal
positive sets.  By oracle monotonicity a hidden edge is exactly a minimal S
with Q(S) = 1, so on antichain inputs the output equals the hidden edge set.
Never competitive, only an equivalence oracle for the real learners.
"""

from __future__ import annotations

import numpy as np

from .core import BudgetRefusedError, EdgeOracle, Hypergraph


def brute_force_learn(oracle: EdgeOracle) -> Hypergraph:
    """Learn the hidden antichain exactly with 2^n queries in 1 round.

    Refuses n > 20 with the demand in the error.  When the hidden edge set is
    not an antichain, nested edges are unobservable (a strict super-edge never
    shows up as a minimal positive set); that is a property of the query
    model, not of this implementation.
    """
    n = oracle.n
    if n > 20:
        raise BudgetRefusedError(
            f"brute force needs 2^{n} = {2**n} queries; refusing for n > 20",
            demand=float(2**n),
            cap=2.0**20,
        )
    pos = oracle.query_all_subsets()
    size = 1 << n
    idx = np.arange(size, dtype=np.uint32)
    minimal = pos.copy()
    for v in range(n):
        bit = np.uint32(1 << v)
        has_v = (idx & bit) != 0
        # X is non-minimal if X minus v is already positive.
        minimal[has_v] &= ~pos[(idx[has_v] ^ bit)]
    edges = []
    for mask in np.flatnonzero(minimal):
        edges.append(tuple(v for v in range(n) if (int(mask) >> v) & 1))
    return Hypergraph(n, edges)
