"""Hardness-construction tests: frozen shapes, partition invariants, the
pigeonhole threshold, disagreement accounting, and round-capped attacks."""

import json
import math

import numpy as np
import pytest

from edgeprobe.core import BudgetRefusedError, EdgeOracle, Hypergraph, LearnOutcome
from edgeprobe.hardness import (
    LEARNERS,
    THREE_PART,
    TOWER,
    gen_three_part,
    gen_tower,
    indistinguishability_experiment,
    round_limited_attack,
    tower_factor,
)


def test_three_part_shape_at_100():
    inst = gen_three_part(100, seed=0)
    assert len(inst.p1) == 88
    assert len(inst.p2) == 2
    assert len(inst.p3) == 10
    assert inst.threshold == 88 / 2 + 2 + 10 == 56
    sizes = sorted(len(e) for e in inst.matching.edges)
    assert sizes == [2] * 44 + [10]
    assert inst.matching.is_matching()


def test_three_part_partitions_vertices():
    for n in (9, 10, 25, 60):
        inst = gen_three_part(n, seed=3)
        pieces = set(inst.p1) | set(inst.p2) | set(inst.p3)
        assert pieces == set(range(n))
        assert len(inst.p1) + len(inst.p2) + len(inst.p3) == n
        assert len(inst.p1) % 2 == 0
        assert len(inst.p3) == math.isqrt(n)
        assert len(inst.p2) in (1, 2)
    with pytest.raises(ValueError):
        gen_three_part(8)


def test_three_part_deterministic():
    assert gen_three_part(49, seed=11) == gen_three_part(49, seed=11)
    assert gen_three_part(49, seed=11) != gen_three_part(49, seed=12)


def test_threshold_is_pigeonhole_tight():
    """Size threshold can dodge every pair; threshold+1 never can."""
    inst = gen_three_part(49, seed=5)
    t = int(inst.threshold)
    pairs = [e for e in inst.matching.edges if len(e) == 2]
    # the canonical dodge: one vertex per pair plus all of P2 and P3
    dodge = {e[0] for e in pairs} | set(inst.p2) | set(inst.p3)
    assert len(dodge) == t
    assert not any(set(e) <= dodge for e in pairs)
    rng = np.random.default_rng(9)
    for _ in range(200):
        s = set(rng.choice(49, size=t + 1, replace=False).tolist())
        assert any(set(e) <= s for e in pairs)


def test_tower_factor_frozen():
    assert tower_factor(10**6) == 573
    assert tower_factor(100) == math.ceil(3 * math.log(100) ** 2)


def test_tower_shape_c2_at_million():
    inst = gen_tower(10**6, c_override=2, seed=0)
    assert inst.edge_sizes == (3, 18, 648)
    assert inst.depth == 2
    assert [len(p) for p in inst.parts] == [18, 648, 839808]
    assert len(inst.leftovers) == 10**6 - (18 + 648 + 839808)
    # level i carries exactly c * d_i edges, partitioning its part
    by_size = {}
    for e in inst.matching.edges:
        by_size.setdefault(len(e), []).append(e)
    for d_i, part in zip(inst.edge_sizes, inst.parts):
        level = by_size[d_i]
        assert len(level) == 2 * d_i
        flat = sorted(v for e in level for v in e)
        assert flat == sorted(part)
    assert inst.matching.is_matching()


def test_tower_default_factor_single_level():
    inst = gen_tower(10**6, seed=1)
    assert inst.c == 573
    assert inst.depth == 0
    assert inst.edge_sizes == (3,)
    assert len(inst.parts[0]) == 9 * 573


def test_tower_refusals():
    with pytest.raises(ValueError) as exc:
        gen_tower(100)  # default factor 64 needs 576 vertices
    assert "576" in str(exc.value)
    with pytest.raises(ValueError):
        gen_tower(100, c_override=0)
    # c=1 squeezes into small n
    inst = gen_tower(9, c_override=1, seed=0)
    assert inst.edge_sizes == (3,)


# -- indistinguishability ----------------------------------------------------


def test_experiment_validation():
    with pytest.raises(ValueError):
        indistinguishability_experiment(THREE_PART, 100, 0)
    with pytest.raises(ValueError):
        indistinguishability_experiment(THREE_PART, 100, 10, redraws=1)
    with pytest.raises(ValueError):
        indistinguishability_experiment(THREE_PART, 100, 10, query_size_policy="tiny")
    with pytest.raises(ValueError):
        indistinguishability_experiment("mystery", 100, 10)


def test_experiment_report_shape():
    rep = indistinguishability_experiment(THREE_PART, 100, 400, seed=0)
    payload = json.loads(rep.to_json())
    assert set(payload) == {
        "family", "n", "c", "R", "redraws", "queries", "disagreement",
        "size_buckets",
    }
    assert payload["family"] == THREE_PART
    assert payload["c"] is None and payload["R"] is None
    assert len(payload["size_buckets"]) == 10
    assert sum(b["queries"] for b in payload["size_buckets"]) == 400
    assert rep.disagreement <= 1e-3


def test_experiment_tower_reports_depth():
    rep = indistinguishability_experiment(
        TOWER, 800, 300, seed=2, c_override=2
    )
    assert rep.c == 2 and rep.depth == 1
    assert 0.0 <= rep.disagreement <= 1.0


def test_experiment_deterministic():
    a = indistinguishability_experiment(THREE_PART, 64, 300, seed=7)
    b = indistinguishability_experiment(THREE_PART, 64, 300, seed=7)
    assert a.disagreement == b.disagreement
    assert a.size_buckets == b.size_buckets


def test_disagreement_detects_an_actual_tell():
    """Sanity check the metric itself: a moving singleton whose placement
    flips tiny queries must show heavy disagreement at small n."""
    rep = indistinguishability_experiment(THREE_PART, 9, 2000, seed=4)
    # pool |P2|+|P3| is 5 or 6 of nine vertices; small queries that dodge
    # the two pairs regularly isolate some placements of the triple
    assert rep.disagreement > 0.0


# -- round-capped attacks ----------------------------------------------------


def test_learner_registry():
    assert set(LEARNERS) == {"matching-parallel", "matching-adaptive", "brute-force"}


def test_attack_unknown_family():
    with pytest.raises(ValueError):
        round_limited_attack("brute-force", "mystery", 12)


def test_brute_force_attack_needs_exactly_one_round():
    assert round_limited_attack("brute-force", THREE_PART, 12, rounds_cap=1, seed=0)
    assert not round_limited_attack("brute-force", THREE_PART, 12, rounds_cap=0, seed=0)


def test_matching_learner_attack_capped_vs_free():
    assert not round_limited_attack(
        "matching-parallel", THREE_PART, 144, rounds_cap=1, seed=0
    )
    assert round_limited_attack("matching-parallel", THREE_PART, 144, seed=0)


def test_attack_accepts_callable():
    def hopeless(oracle, seed):
        return LearnOutcome(edges=frozenset(), ledger=oracle.ledger.snapshot())

    assert not round_limited_attack(hopeless, THREE_PART, 16, seed=1)
