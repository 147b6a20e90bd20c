"""Bound-program tests.

The closed forms get three independent oracles: hand-derived expressions
frozen into the test, vertex enumeration of the two-constraint polytope,
and random feasible points that must never beat a claimed optimum.
"""

import json
import math

import numpy as np
import pytest

from edgeprobe.bounds import (
    DEFAULT_GRID,
    ProgramParams,
    canonical_p,
    estimate_unique_containment,
    f_bullet,
    failure_bound,
    lp_bullet,
    polytope_vertices,
    verify_inequality_chain,
)
from edgeprobe.core import Hypergraph

POINT = ProgramParams(delta=2, p=0.5, d=4, rho=1.0, n=10)


def test_params_validation():
    with pytest.raises(ValueError):
        ProgramParams(delta=0, p=0.5, d=4, rho=1.0, n=10)
    with pytest.raises(ValueError):
        ProgramParams(delta=2, p=1.0, d=4, rho=1.0, n=10)
    with pytest.raises(ValueError):
        ProgramParams(delta=2, p=0.5, d=1, rho=1.0, n=10)
    with pytest.raises(ValueError):
        ProgramParams(delta=2, p=0.5, d=4, rho=3.0, n=10)  # dmin = 1
    assert ProgramParams(delta=2, p=0.5, d=5, rho=2.0, n=10).dmin == 2
    assert ProgramParams(delta=2, p=0.5, d=5, rho=2.0, n=10).rounded
    assert not POINT.rounded


def test_canonical_p():
    assert canonical_p(100, 2) == pytest.approx(200**-0.5)
    assert canonical_p(100, 4, rho=2.0) == pytest.approx(200**-0.5)
    assert canonical_p(100, 2) == 0.07071067811865475


def test_f_bullet_closed_form():
    """dmin=4, c1=4, c2=5: weight 4/3 on intersection 3, 11/3 on 0."""
    value, sol = f_bullet(POINT)
    by_hand = 0.5 ** (4 / 3) * 0.9375 ** (11 / 3)
    assert value == pytest.approx(by_hand, rel=1e-12)
    assert value == pytest.approx(0.31322375084015236, rel=1e-12)
    assert sol.a[3] == pytest.approx(4 / 3)
    assert sol.a[0] == pytest.approx(11 / 3)
    assert sol.log_objective == pytest.approx(math.log(by_hand))


def test_lp_bullet_closed_form():
    value, sol = lp_bullet(POINT)
    # (4/3) * 0.5 + (11/3) * 0.5**4 = 43/48
    assert value == pytest.approx(43 / 48, rel=1e-12)
    assert sol.a[3] == pytest.approx(4 / 3)
    assert sol.a[0] == pytest.approx(11 / 3)


def test_lp_bullet_canonical_n100_point():
    """The canonical n=100, d=4 point used by the chain's cap links."""
    p = canonical_p(100, 4)
    params = ProgramParams(delta=2, p=p, d=4, rho=1.0, n=100)
    value, _ = lp_bullet(params)
    by_hand = (4 / 3) * p + (50 - 4 / 3) / 200  # p**4 is exactly 1/200
    assert value == pytest.approx(by_hand, rel=1e-12)
    assert value == pytest.approx(0.5978863931832453, rel=1e-9)
    assert value <= 1 - math.log(100) / 200


def test_failure_bound():
    fb = failure_bound(ProgramParams(delta=2, p=0.1, d=2, rho=1.0, n=100))
    assert float(fb) == pytest.approx(1 - math.log(100) / 200)
    assert float(fb) == pytest.approx(0.9769741490700595)
    assert not fb.regime_warning
    assert failure_bound(ProgramParams(delta=2, p=0.1, d=2, rho=1.0, n=99)).regime_warning
    # a matching cannot fail isolation at all
    zero = failure_bound(ProgramParams(delta=1, p=0.1, d=2, rho=1.0, n=100))
    assert float(zero) == 0.0


def test_polytope_vertices_hand_case():
    # {a >= 0 : 0*a0 + 1*a1 <= 2, a0 + a1 <= 3}
    verts = polytope_vertices([(0.0, 1.0), (1.0, 1.0)], 2.0, 3.0)
    as_sets = {tuple(sorted(v.items())) for v in verts}
    assert ((0, 3.0),) in as_sets
    assert ((1, 2.0),) in as_sets
    assert ((0, 1.0), (1, 2.0)) in as_sets
    for v in verts:
        a0, a1 = v.get(0, 0.0), v.get(1, 0.0)
        assert a1 <= 2.0 + 1e-9 and a0 + a1 <= 3.0 + 1e-9


def _random_feasible(rng, dm, c1, c2, count):
    """Rejection-free random points of the shared polytope."""
    pts = []
    for _ in range(count):
        a = rng.random(dm)
        a *= rng.random() * c2 / a.sum()
        load = (np.arange(dm) * a).sum()
        if load > c1:
            a *= c1 / load
        pts.append(a)
    return pts


@pytest.mark.parametrize("delta", [2, 3, 4])
def test_optima_are_never_beaten(delta):
    params = ProgramParams(delta=delta, p=0.35, d=5, rho=1.0, n=40)
    dm = params.dmin
    c1 = float((delta - 1) * params.d)
    c2 = delta * params.n / dm
    lp_val, _ = lp_bullet(params)
    _, f_sol = f_bullet(params)
    rng = np.random.default_rng(3)
    for a in _random_feasible(rng, dm, c1, c2, 400):
        lin = sum(a[i] * params.p ** (dm - i) for i in range(dm))
        assert lin <= lp_val + 1e-9
        logprod = sum(a[i] * math.log1p(-params.p ** (dm - i)) for i in range(dm))
        assert logprod >= f_sol.log_objective - 1e-9


def test_chain_passes_on_default_grid():
    report = verify_inequality_chain()
    assert report.passed
    assert report.violations() == []
    assert len(report.checks) == 493
    assert len(report.skipped) == 12
    # every skip carries its reason
    assert all("reason" in s for s in report.skipped)


def test_chain_report_json_shape():
    report = verify_inequality_chain(
        [ProgramParams(delta=2, p=canonical_p(50, 3), d=3, rho=1.0, n=50)]
    )
    payload = json.loads(report.to_json())
    assert set(payload) == {"passed", "checks", "summary", "violations", "skipped"}
    assert payload["passed"] is True
    assert "product-vs-union" in payload["summary"]
    # n=50 is outside the cap-link regime, so that point must be skipped
    assert any("n >= 100" in s["reason"] for s in payload["skipped"])


def test_chain_runs_on_custom_grid():
    grid = [
        ProgramParams(delta=3, p=canonical_p(100, 4), d=4, rho=1.0, n=100),
        ProgramParams(delta=2, p=canonical_p(500, 2), d=2, rho=1.0, n=500),
    ]
    report = verify_inequality_chain(grid)
    assert report.passed
    names = {c.name for c in report.checks}
    assert "union-bound-cap" in names and "composed-floor-outer" in names


def test_estimate_unique_containment_validation():
    h = Hypergraph(4, [(0, 1), (2, 3)])
    with pytest.raises(ValueError):
        estimate_unique_containment(h, (0, 2), 0.5, 100)
    with pytest.raises(ValueError):
        estimate_unique_containment(h, (0, 1), 0.5, 0)


def test_estimate_unique_containment_degenerate():
    lonely = Hypergraph(4, [(0, 1)])
    assert estimate_unique_containment(lonely, (0, 1), 0.5, 100) == (0.0, 0.0)
    h = Hypergraph(4, [(0, 1), (2, 3)])
    est, se = estimate_unique_containment(h, (0, 1), 0.0, 100, seed=0)
    assert est == 0.0 and se == 0.0


def test_estimate_unique_containment_matches_binomial():
    """With one competing pair the hit rate is exactly p**2."""
    h = Hypergraph(4, [(0, 1), (2, 3)])
    p = 0.3
    est, se = estimate_unique_containment(h, (0, 1), p, 200_000, seed=17)
    assert se > 0
    assert abs(est - p**2) <= 4 * se + 1e-9
