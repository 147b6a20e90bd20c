"""Model and ledger tests: hypergraph canonicalization, oracle semantics, accounting."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgeprobe.core import (
    BudgetRefusedError,
    EdgeOracle,
    Hypergraph,
    LearnOutcome,
    QueryLedger,
    RoundLimitExceeded,
    is_unique_edge_cover,
    vertex_tuple,
)


@st.composite
def hypergraphs(draw, max_n=10, max_edges=6):
    n = draw(st.integers(min_value=1, max_value=max_n))
    edges = draw(
        st.frozensets(
            st.frozensets(st.integers(0, n - 1), min_size=1, max_size=n),
            max_size=max_edges,
        )
    )
    return Hypergraph(n, [tuple(sorted(e)) for e in edges])


def test_vertex_tuple_canonicalizes():
    assert vertex_tuple([3, 1, 1, 2]) == (1, 2, 3)
    assert vertex_tuple([]) == ()
    with pytest.raises(ValueError):
        vertex_tuple([-1, 2])
    with pytest.raises(ValueError):
        vertex_tuple([0, 5], n=5)


def test_hypergraph_rejects_bad_edges():
    with pytest.raises(ValueError):
        Hypergraph(4, [()])
    with pytest.raises(ValueError):
        Hypergraph(4, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Hypergraph(-1)


def test_hypergraph_shape_predicates():
    m = Hypergraph(6, [(0, 1), (2, 3, 4)])
    assert m.is_matching() and m.is_antichain()
    assert m.rank() == 3 and m.min_edge_size() == 2
    assert m.edge_size_ratio() == 1.5

    shared = Hypergraph(4, [(0, 1), (1, 2)])
    assert not shared.is_matching()
    assert shared.is_antichain()

    nested = Hypergraph(4, [(0, 1), (0, 1, 2)])
    assert not nested.is_antichain()
    assert Hypergraph(3).edge_size_ratio() is None
    assert Hypergraph(3).is_matching()


@given(hypergraphs())
def test_json_round_trip(h):
    assert Hypergraph.from_json(h.to_json()) == h


def test_save_load(tmp_path):
    h = Hypergraph(5, [(0, 1), (2, 3)])
    path = tmp_path / "inst.json"
    h.save(path)
    assert Hypergraph.load(path) == h
    # the on-disk form is plain JSON a human can write by hand
    obj = json.loads(path.read_text())
    assert obj == {"n": 5, "edges": [[0, 1], [2, 3]]}


def test_from_json_rejects_garbage():
    with pytest.raises(ValueError):
        Hypergraph.from_json("[1, 2]")
    with pytest.raises(ValueError):
        Hypergraph.from_json('{"n": 3}')


# -- ledger ------------------------------------------------------------------


def test_ledger_conservation():
    led = QueryLedger()
    led.charge_round(3)
    led.charge_round(1)
    with led.round() as h:
        h.charge(2)
        h.charge(5)
    assert led.per_round_queries == [3, 1, 7]
    assert led.total_queries == 11
    assert led.rounds == 3


def test_unused_round_handle_leaves_no_trace():
    led = QueryLedger()
    with led.round():
        pass
    assert led.rounds == 0


def test_interleaved_handles_charge_their_own_rounds():
    """Two handles open at once must not bleed charges into each other."""
    led = QueryLedger()
    with led.round() as a, led.round() as b:
        a.charge(1)
        b.charge(10)
        a.charge(2)
        b.charge(20)
    assert led.per_round_queries == [3, 30]


def test_round_cap_raises_before_charging():
    led = QueryLedger(rounds_cap=2)
    led.charge_round(4)
    led.charge_round(4)
    with pytest.raises(RoundLimitExceeded):
        led.charge_round(1)
    # the refused round left no partial charge behind
    assert led.rounds == 2
    assert led.total_queries == 8


def test_charges_must_be_positive():
    led = QueryLedger()
    with pytest.raises(ValueError):
        led.charge_round(0)
    with led.round() as h:
        with pytest.raises(ValueError):
            h.charge(0)
    with pytest.raises(ValueError):
        QueryLedger(rounds_cap=-1)


def test_snapshot_is_frozen_copy():
    led = QueryLedger()
    led.charge_round(2)
    snap = led.snapshot()
    led.charge_round(2)
    assert snap.total_queries == 2 and snap.rounds == 1
    assert snap.per_round_queries == (2,)


# -- oracle ------------------------------------------------------------------


def test_oracle_answers_containment():
    o = EdgeOracle(Hypergraph(5, [(0, 1), (2, 3, 4)]))
    assert o.query([0, 1])
    assert o.query([0, 1, 4])
    assert not o.query([0, 2, 3])
    assert not o.query([1])
    assert o.ledger.rounds == 4
    assert o.ledger.total_queries == 4


def test_oracle_rejects_out_of_range_ids():
    o = EdgeOracle(Hypergraph(3, [(0, 1)]))
    with pytest.raises(ValueError):
        o.query([0, 3])
    with pytest.raises(ValueError):
        o.query([-1])
    assert o.ledger.total_queries == 0


def test_query_batch_is_one_round():
    o = EdgeOracle(Hypergraph(4, [(1, 2)]))
    answers = o.query_batch([[1, 2], [0, 3], [0, 1, 2, 3]])
    assert answers == [True, False, True]
    assert o.ledger.rounds == 1
    assert o.ledger.per_round_queries == [3]
    with pytest.raises(ValueError):
        o.query_batch([])


@given(hypergraphs(max_n=8), st.data())
@settings(max_examples=60)
def test_monotone_and_pure(h, data):
    """Q is monotone under supersets and repeat queries agree."""
    o = EdgeOracle(h)
    s = data.draw(st.frozensets(st.integers(0, h.n - 1), max_size=h.n))
    extra = data.draw(st.frozensets(st.integers(0, h.n - 1), max_size=h.n))
    first = o.query(s) if s else False
    again = o.query(s) if s else False
    assert first == again
    if first:
        assert o.query(s | extra)


def test_query_rows_matches_query_batch():
    rng = np.random.default_rng(5)
    h = Hypergraph(9, [(0, 1, 2), (3, 4), (6, 7, 8)])
    rows = rng.random((40, 9)) < 0.45
    a = EdgeOracle(h)
    with a.ledger.round() as handle:
        vec = a.query_rows(rows, handle)
    b = EdgeOracle(h)
    nonempty = [list(np.nonzero(r)[0]) for r in rows if r.any()]
    expected = dict(zip(map(tuple, nonempty), b.query_batch(nonempty)))
    for r, got in zip(rows, vec):
        key = tuple(np.nonzero(r)[0])
        assert got == expected.get(key, False)
    assert a.ledger.per_round_queries == [40]


def test_query_rows_empty_is_free():
    o = EdgeOracle(Hypergraph(3, [(0, 1)]))
    with o.ledger.round() as handle:
        out = o.query_rows(np.zeros((0, 3), dtype=bool), handle)
    assert out.shape == (0,)
    assert o.ledger.rounds == 0


def test_query_all_subsets_small():
    o = EdgeOracle(Hypergraph(3, [(0, 1)]))
    table = o.query_all_subsets()
    # mask 0b011 contains the edge, as does anything extending it
    assert list(np.nonzero(table)[0]) == [0b011, 0b111]
    assert o.ledger.per_round_queries == [8]


def test_query_all_subsets_refuses_large_n():
    o = EdgeOracle(Hypergraph(21, [(0, 1)]))
    with pytest.raises(BudgetRefusedError) as exc:
        o.query_all_subsets()
    assert exc.value.demand == 2.0**21
    assert o.ledger.total_queries == 0


# -- bulk gate-plus-deletion path ---------------------------------------------


def _deletion_reference(h, rows, only_positive):
    """Reimplementation of the gate/deletion contract, one query at a time."""
    gate_q = del_q = 0
    gates = []
    zero_sets = set()
    for row in rows:
        s = frozenset(int(v) for v in np.nonzero(row)[0])
        if not s:
            gates.append(False)
            continue
        gate_q += 1
        pos = any(e <= s for e in h.edge_sets)
        gates.append(pos)
        in_scope = pos if only_positive else True
        if in_scope and len(s) >= 2:
            del_q += len(s)
        if pos:
            zs = frozenset(
                v for v in s if not any(e <= s - {v} for e in h.edge_sets)
            )
            if zs:
                zero_sets.add(tuple(sorted(zs)))
    return gates, zero_sets, gate_q, del_q


@pytest.mark.parametrize("only_positive", [False, True])
def test_query_deletion_rows_matches_reference(only_positive):
    rng = np.random.default_rng(11)
    h = Hypergraph(10, [(0, 1), (2, 3, 4), (7,), (5, 6, 8, 9)])
    rows = rng.random((120, 10)) < 0.4
    rows[0] = False  # force an empty row into the batch
    o = EdgeOracle(h)
    with o.ledger.round() as g, o.ledger.round() as d:
        gates, cands = o.query_deletion_rows(
            rows, g, d, only_positive=only_positive
        )
    ref_gates, ref_sets, gate_q, del_q = _deletion_reference(h, rows, only_positive)
    assert list(gates) == ref_gates
    assert cands == ref_sets
    assert o.ledger.per_round_queries == [gate_q, del_q]


def test_query_deletion_rows_shared_handle_merges_rounds():
    h = Hypergraph(4, [(0, 1)])
    rows = np.array([[1, 1, 0, 0], [0, 0, 1, 1]], dtype=bool)
    o = EdgeOracle(h)
    with o.ledger.round() as handle:
        gates, cands = o.query_deletion_rows(
            rows, handle, handle, only_positive=False
        )
    # 2 gates + 2 + 2 deletion queries, all in a single round
    assert o.ledger.per_round_queries == [6]
    assert list(gates) == [True, False]
    assert cands == {(0, 1)}


def test_query_deletion_rows_skips_singleton_deletions():
    h = Hypergraph(3, [(1,)])
    rows = np.array([[0, 1, 0]], dtype=bool)
    o = EdgeOracle(h)
    with o.ledger.round() as g, o.ledger.round() as d:
        gates, cands = o.query_deletion_rows(rows, g, d, only_positive=True)
    assert list(gates) == [True]
    assert cands == {(1,)}
    # deleting the only vertex would query the empty set, which is skipped
    assert o.ledger.per_round_queries == [1]


# -- unique cover -------------------------------------------------------------


def test_is_unique_edge_cover():
    h = Hypergraph(6, [(0, 1), (2, 3)])
    assert is_unique_edge_cover([{0, 1, 4}, {2, 3}], h)
    # one sample containing both edges isolates neither
    assert not is_unique_edge_cover([{0, 1, 2, 3}], h)
    assert not is_unique_edge_cover([{0, 1}], h)
    assert is_unique_edge_cover([], Hypergraph(4))


def test_learn_outcome_as_hypergraph():
    led = QueryLedger()
    led.charge_round(1)
    out = LearnOutcome(edges=frozenset({(0, 1)}), ledger=led.snapshot())
    assert out.as_hypergraph(3) == Hypergraph(3, [(0, 1)])
    assert not out.truncated and out.violations == ()
