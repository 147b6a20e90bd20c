"""Oracle-side transcript samplers for the large sampling phases.

When the hidden edges inside the sampled vertex pool form a matching,
the outcome of a ``find_disjoint_edges`` phase depends on the random
samples only through a handful of independent per-edge events, so the
phase can be replayed in aggregate: the PARALLEL variant never builds a
sample at all, and the ADAPTIVE variant builds only the positive ones.
Ledger charges are drawn from the same distribution, round for round,
as a literal sample-by-sample run with the same quantized q.

Exactness rests on disjointness.  Vertex inclusions are independent
Bernoulli(q), so the events "edge e fully included" are independent
Bernoulli(q^|e|) across edges, and conditioned on which edges are full
the remaining inclusions stay independent, with the vertices of a
non-full edge following the inclusion-count law truncated below full
membership.  Free vertices (covered by no edge in the pool) stay plain
Bernoulli(q).

The draw order against the generator is part of the behavior contract,
since a fixed seed must reproduce one transcript:

1. number of positive samples,
2. number of empty samples among the negatives,
   (the sampling round is charged here)
3. kind-specific positive-side draws:
   PARALLEL  - alone/multi split over positives, full-count patterns
               for the multi samples, truncated inclusion counts per
               size group (ascending size), free-vertex total;
   ADAPTIVE  - first-full-edge index per positive, later full edges,
               truncated inclusion counts then member orders per edge
               (canonical edge order), free-vertex counts, free-vertex
               picks per positive.

The ADAPTIVE path materializes every positive sample, so its memory
grows with the positive count; the PARALLEL path is constant-size in
the number of samples.
"""

from __future__ import annotations

import math
from itertools import product as _cartesian

import numpy as np

from .core import BudgetRefusedError, Edge, EdgeOracle
from .matching import SubroutineKind, _AdaptiveSearch, _run_lockstep

# Full-count patterns are enumerated over the product of per-size-group
# count ranges; refuse rather than allocate an absurd table.
_PATTERN_CAP = 500_000


def _edges_within(oracle: EdgeOracle, pool) -> list[Edge]:
    """Hidden edges entirely inside the pool, in canonical order."""
    vs = set(pool)
    return sorted(e for e in oracle.hidden.edges if vs.issuperset(e))


def supports(oracle: EdgeOracle, pool, kind: SubroutineKind) -> bool:
    """True when the hidden edges inside ``pool`` form a matching with
    no singleton edge, the shape the aggregate samplers are exact for."""
    seen: set[int] = set()
    for e in _edges_within(oracle, pool):
        if len(e) < 2:
            return False
        for v in e:
            if v in seen:
                return False
            seen.add(v)
    return True


def run_phase(
    oracle: EdgeOracle,
    pool,
    num_samples: int,
    q: float,
    s,
    kind: SubroutineKind,
    rng: np.random.Generator,
) -> frozenset[Edge]:
    """Replay one sampling phase in aggregate and return its edges.

    ``pool`` is the sampled vertex tuple, ``num_samples`` the sample
    count, ``q`` the already-quantized inclusion probability and ``s``
    the frontier budget handed to adaptive searches.  Charges the
    oracle ledger exactly as the literal phase would: one sampling
    round covering the nonempty samples (skipped when every sample
    comes up empty) and then the subroutine rounds.
    """
    edges = _edges_within(oracle, pool)
    sizes = np.array([len(e) for e in edges], dtype=np.int64)
    p = np.power(float(q), sizes.astype(np.float64))
    log_p0 = float(np.log1p(-p).sum()) if edges else 0.0
    p_pos = min(1.0, max(0.0, -math.expm1(log_p0)))
    k_pos = int(rng.binomial(num_samples, p_pos)) if p_pos > 0.0 else 0

    if q <= 0.0:
        p_empty_neg = 1.0
    elif q >= 1.0:
        p_empty_neg = 0.0 if pool else 1.0
    else:
        p_empty_neg = min(1.0, math.exp(len(pool) * math.log1p(-q) - log_p0))
    n_neg = num_samples - k_pos
    n_empty = int(rng.binomial(n_neg, p_empty_neg)) if n_neg else 0

    nonempty = num_samples - n_empty
    if nonempty:
        oracle.ledger.charge_round(nonempty)
    if not k_pos:
        return frozenset()
    if kind is SubroutineKind.PARALLEL:
        return _parallel_positives(oracle, pool, edges, p, k_pos, q, rng)
    return _adaptive_positives(oracle, pool, edges, p, k_pos, q, s, rng)


def _log_choose(n: int, k):
    """log C(n, k) for scalar n and scalar or array k."""
    table = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1.0, n + 1.0)))))
    return table[n] - table[k] - table[n - k]


def _truncated_inclusion_law(size: int, q: float) -> np.ndarray:
    """Law of the inclusion count of a non-full edge's vertices.

    Binomial(size, q) conditioned on count < size, as a pval vector
    over 0..size-1.
    """
    z = np.arange(size)
    logw = _log_choose(size, z) + z * math.log(q) + (size - z) * math.log1p(-q)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def _multi_full_patterns(n_multi: int, g_count, g_p, rng) -> np.ndarray:
    """Total full-edge count per size group across the multi samples.

    Each multi sample holds at least two full edges; its per-group full
    counts follow independent Binomial(m_g, p_g) laws conditioned on a
    total of at least two.  The conditional law lives on the product of
    count ranges, small enough to enumerate outright for matchings with
    few distinct sizes, and only group totals are needed downstream.
    """
    shape = [int(c) + 1 for c in g_count]
    n_patterns = math.prod(shape)
    if n_patterns > _PATTERN_CAP:
        raise BudgetRefusedError(
            "full-count pattern table too large for the aggregate engine; "
            "rerun with engine='literal'",
            demand=float(n_patterns),
            cap=float(_PATTERN_CAP),
        )
    cats = np.array(
        list(_cartesian(*[range(hi) for hi in shape])), dtype=np.int64
    )
    cats = cats[cats.sum(axis=1) >= 2]
    logw = np.zeros(len(cats))
    for g in range(len(g_count)):
        c = cats[:, g]
        mg = int(g_count[g])
        logw += (
            _log_choose(mg, c)
            + c * math.log(g_p[g])
            + (mg - c) * math.log1p(-g_p[g])
        )
    w = np.exp(logw - logw.max())
    w /= w.sum()
    picks = rng.multinomial(n_multi, w)
    return cats.T @ picks


def _parallel_positives(oracle, pool, edges, p, k_pos, q, rng):
    """Aggregate-charge the one deletion round of the parallel variant.

    A positive sample learns its edge exactly when that edge is the
    only full one (the deletion answers then vanish precisely on its
    vertices); with two or more disjoint full edges every deletion
    answer stays positive and nothing is learned.  So the learned set
    needs only per-edge alone counts, and the deletion-round charge
    sum(|S_i|) needs only group totals of full, partially-included and
    free vertices.
    """
    m = len(edges)
    log_p0 = float(np.log1p(-p).sum())
    # P(sample full on edge j and on no other edge).
    alone_p = np.exp(log_p0 + np.log(p) - np.log1p(-p))
    p_pos = -math.expm1(log_p0)
    p_multi = max(0.0, p_pos - float(alone_p.sum())) if m > 1 else 0.0
    pvals = np.append(alone_p, p_multi)
    pvals = np.clip(pvals, 0.0, None)
    pvals /= pvals.sum()
    counts = rng.multinomial(k_pos, pvals)
    alone_counts = counts[:m]
    n_multi = int(counts[m])

    size_list = sorted({len(e) for e in edges})
    g_index = {size: g for g, size in enumerate(size_list)}
    g_count = np.zeros(len(size_list), dtype=np.int64)
    full_by_group = np.zeros(len(size_list), dtype=np.int64)
    for j, e in enumerate(edges):
        g_count[g_index[len(e)]] += 1
        full_by_group[g_index[len(e)]] += int(alone_counts[j])
    g_sizes = np.array(size_list, dtype=np.int64)
    g_p = np.power(float(q), g_sizes.astype(np.float64))
    if n_multi:
        full_by_group += _multi_full_patterns(n_multi, g_count, g_p, rng)

    deletion = int((g_sizes * full_by_group).sum())
    for g, size in enumerate(size_list):
        slots = k_pos * int(g_count[g]) - int(full_by_group[g])
        if slots > 0:
            law = _truncated_inclusion_law(size, q)
            zc = rng.multinomial(slots, law)
            deletion += int(np.dot(np.arange(size), zc))
    n_free = len(pool) - int(sum(len(e) for e in edges))
    if n_free:
        deletion += int(rng.binomial(k_pos * n_free, q))

    oracle.ledger.charge_round(deletion)
    return frozenset(edges[j] for j in range(m) if alone_counts[j])


def _adaptive_positives(oracle, pool, edges, p, k_pos, q, s, rng):
    """Materialize the positive samples and run the budgeted searches.

    Sampled parts: the first full edge in canonical order via inverse
    CDF, later edges as independent coin flips, truncated inclusion
    counts plus a uniform member order for every non-full edge slot,
    and plain Bernoulli free vertices.  The searches then run in
    lockstep against each sample's own full-edge list, which answers
    any subset query of that sample correctly, while charging the real
    ledger.
    """
    m = len(edges)
    survive = np.concatenate(([1.0], np.cumprod(1.0 - p)[:-1]))
    cum = np.cumsum(p * survive)
    u = rng.random(k_pos) * cum[-1]
    first = np.minimum(np.searchsorted(cum, u, side="right"), m - 1)
    later = rng.random((k_pos, m)) < p[None, :]
    full = later & (np.arange(m)[None, :] > first[:, None])
    full[np.arange(k_pos), first] = True

    # Truncated inclusion counts and member orders are drawn for every
    # slot and consulted only where the edge is not full; the unused
    # draws are independent of everything else.
    z_draw = np.empty((k_pos, m), dtype=np.int64)
    orders = []
    for j, e in enumerate(edges):
        law = _truncated_inclusion_law(len(e), q)
        z_draw[:, j] = rng.choice(len(e), size=k_pos, p=law)
        orders.append(np.argsort(rng.random((k_pos, len(e))), axis=1))

    covered: set[int] = set()
    for e in edges:
        covered.update(e)
    free = np.array(sorted(v for v in pool if v not in covered), dtype=np.int64)
    if free.size:
        free_counts = rng.binomial(int(free.size), q, size=k_pos)
    else:
        free_counts = np.zeros(k_pos, dtype=np.int64)

    searches = []
    for i in range(k_pos):
        members: list[int] = []
        fulls = []
        for j, e in enumerate(edges):
            if full[i, j]:
                members.extend(e)
                fulls.append(frozenset(e))
            else:
                z = int(z_draw[i, j])
                if z:
                    members.extend(e[t] for t in orders[j][i, :z])
        n_free = int(free_counts[i])
        if n_free:
            picks = rng.choice(free, size=n_free, replace=False)
            members.extend(int(v) for v in picks)
        search = _AdaptiveSearch(tuple(sorted(members)), s)
        search.full_edges = fulls
        searches.append(search)

    def answer(search, sets, handle):
        handle.charge(len(sets))
        return [any(f.issubset(x) for f in search.full_edges) for x in sets]

    return frozenset(_run_lockstep(oracle.ledger, searches, answer))
