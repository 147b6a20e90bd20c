"""Optimization programs that govern single-edge isolation under random
vertex sampling.

Two small programs over degree profiles drive the guarantees of the
low-degree learner.  A product program lower-bounds the probability that
a random sample containing a fixed edge contains no other edge, and a
linear program upper-bounds the union bound on competing edges.  Both
range over the same two-constraint polytope of intersection profiles

    sum_i i * a_i <= (delta - 1) * d,    sum_i a_i <= delta * n / dmin,

where ``a_i`` counts edges meeting the pinned edge in ``i`` vertices and
``dmin = floor(d / rho)`` is the minimum edge size.  Optima concentrate
on two support points and are evaluated in closed form; vertex
enumeration of the polytope is kept alongside as an independent oracle.

``verify_inequality_chain`` re-derives the failure-probability bound
numerically across a parameter grid, checking every step of the chain
from the product program down to ``1 - (ln n / 2n)**((delta-1)*rho)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "ProgramParams",
    "LPSolution",
    "FailureBound",
    "ChainCheck",
    "ChainReport",
    "DEFAULT_GRID",
    "canonical_p",
    "f_bullet",
    "lp_bullet",
    "failure_bound",
    "verify_inequality_chain",
    "estimate_unique_containment",
    "polytope_vertices",
]

_INEQ_SLACK = 1e-12
_ORACLE_TOL = 1e-9


def canonical_p(n, d, rho=1.0):
    """Sampling probability (2n)**(-rho/d) used by the low-degree learner."""
    return float((2 * n) ** (-rho / d))


@dataclass(frozen=True)
class ProgramParams:
    """Parameter point for the isolation programs.

    delta is the maximum vertex degree, p the per-vertex sampling
    probability, d the maximum edge size, rho the max/min edge size
    ratio, and n the vertex count.
    """

    delta: int
    p: float
    d: int
    rho: float
    n: int

    def __post_init__(self):
        if self.delta < 1:
            raise ValueError("delta must be at least 1")
        if not 0.0 <= self.p < 1.0:
            raise ValueError("p must lie in [0, 1)")
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if self.rho < 1:
            raise ValueError("rho must be at least 1")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.dmin < 2:
            raise ValueError(
                "d/rho must stay at least 2 after rounding down, got %d" % self.dmin
            )

    @property
    def dmin(self) -> int:
        """Minimum edge size floor(d / rho)."""
        return math.floor(self.d / self.rho)

    @property
    def rounded(self) -> bool:
        """True when d / rho was fractional and got rounded down."""
        return self.dmin * self.rho != self.d

    def point(self) -> dict:
        out = {
            "delta": self.delta,
            "p": self.p,
            "d": self.d,
            "rho": self.rho,
            "n": self.n,
            "dmin": self.dmin,
        }
        if self.rounded:
            out["rounded"] = True
        return out


@dataclass(frozen=True)
class LPSolution:
    """Optimal weights for one program instance.

    ``a`` maps an intersection size (or an (intersection, size) pair for
    the unconsolidated variant) to its weight.  ``objective`` is the
    program value; ``log_objective`` is exact even when the product
    objective underflows float range.
    """

    a: dict
    objective: float
    log_objective: float


@dataclass(frozen=True)
class FailureBound:
    value: float
    regime_warning: bool

    def __float__(self) -> float:
        return self.value


def _shared_polytope(params: ProgramParams):
    dm = params.dmin
    c1 = (params.delta - 1) * params.d
    c2 = params.delta * params.n / dm
    return dm, float(c1), float(c2)


def f_bullet(params: ProgramParams) -> tuple[float, LPSolution]:
    """Minimum of prod_i (1 - p**(dmin-i))**a_i over the shared polytope.

    The optimum puts everything the first constraint allows on the
    largest intersection size dmin-1 and the rest of the mass budget on
    intersection size 0:

        a[dmin-1] = min{(delta-1)*d/(dmin-1), delta*n/dmin}
        a[0]      = delta*n/dmin - a[dmin-1]

    Returns (value, solution).  The value can underflow to 0.0 when the
    exponents are huge; solution.log_objective is always finite for
    p < 1 and is what the chain checks compare.
    """
    dm, c1, c2 = _shared_polytope(params)
    a_top = min(c1 / (dm - 1), c2)
    a_zero = c2 - a_top
    log_value = a_top * math.log1p(-params.p) + a_zero * math.log1p(
        -(params.p**dm)
    )
    value = math.exp(log_value)
    sol = LPSolution({dm - 1: a_top, 0: a_zero}, value, log_value)
    return value, sol


def lp_bullet(params: ProgramParams) -> tuple[float, LPSolution]:
    """Maximum of sum_i a_i * p**(dmin-i) over the shared polytope.

    For delta = 2 the optimum has the closed form

        a[dmin-1] = min{dmin/(dmin-1), 2n/dmin}   (when called with rho=1
                                                   and d equal to the
                                                   minimum edge size)
        a[0]      = 2n/dmin - a[dmin-1],

    which is the same two-point support as the product program.  Other
    delta values are solved exactly by vertex enumeration; the polytope
    has only two nontrivial constraints, so every vertex has at most two
    nonzero coordinates.
    """
    dm, c1, c2 = _shared_polytope(params)
    if params.delta == 2:
        a_top = min(c1 / (dm - 1), c2)
        a_zero = c2 - a_top
        value = a_top * params.p + a_zero * params.p**dm
        weights = {dm - 1: a_top, 0: a_zero}
    else:
        coefs = [params.p ** (dm - i) for i in range(dm)]
        pairs = [(float(i), 1.0) for i in range(dm)]
        value, vert = _maximize_over_vertices(coefs, pairs, c1, c2)
        weights = {i: a for i, a in vert.items() if a}
    log_value = math.log(value) if value > 0 else float("-inf")
    return value, LPSolution(weights, value, log_value)


def failure_bound(params: ProgramParams) -> FailureBound:
    """Failure probability cap 1 - (ln n / 2n)**((delta-1)*rho).

    Valid for the canonical sampling rate and n >= 100; smaller n sets
    regime_warning instead of raising, since the formula still evaluates.
    A matching (delta = 1) gets a zero bound: a pinned edge never shares
    vertices with another edge, so isolation cannot fail.
    """
    expo = (params.delta - 1) * params.rho
    value = 1.0 - (math.log(params.n) / (2.0 * params.n)) ** expo
    return FailureBound(value, params.n < 100)


def polytope_vertices(pairs, c1, c2):
    """Vertices of {a >= 0 : sum u*a <= c1, sum w*a <= c2}.

    ``pairs`` lists the per-variable constraint coefficients (u, w).
    With two nontrivial constraints every vertex has at most two nonzero
    coordinates, so enumeration is quadratic in the variable count.
    Serves as the independent oracle for the closed-form optima and as
    the solver for general delta.
    """
    verts = [{}]
    for v, (u, w) in enumerate(pairs):
        caps = []
        if u > 0:
            caps.append(c1 / u)
        if w > 0:
            caps.append(c2 / w)
        if caps:
            verts.append({v: min(caps)})
    nvar = len(pairs)
    for v1 in range(nvar):
        u1, w1 = pairs[v1]
        for v2 in range(v1 + 1, nvar):
            u2, w2 = pairs[v2]
            det = u1 * w2 - u2 * w1
            if abs(det) < 1e-12:
                continue
            a1 = (c1 * w2 - c2 * u2) / det
            a2 = (c2 * u1 - c1 * w1) / det
            if a1 >= -_ORACLE_TOL and a2 >= -_ORACLE_TOL:
                verts.append({v1: max(a1, 0.0), v2: max(a2, 0.0)})
    return verts


def _maximize_over_vertices(coefs, pairs, c1, c2):
    best = float("-inf")
    best_vert: dict = {}
    for vert in polytope_vertices(pairs, c1, c2):
        val = sum(coefs[v] * a for v, a in vert.items())
        if val > best:
            best, best_vert = val, vert
    return best, best_vert


def _minimize_log_over_vertices(log_coefs, pairs, c1, c2):
    best = float("inf")
    best_vert: dict = {}
    for vert in polytope_vertices(pairs, c1, c2):
        val = sum(log_coefs[v] * a for v, a in vert.items())
        if val < best:
            best, best_vert = val, vert
    return best, best_vert


# ---------------------------------------------------------------------------
# Inequality chain verification
# ---------------------------------------------------------------------------

DEFAULT_GRID = tuple(
    (n, d, rho, delta)
    for n in (100, 500, 10_000)
    for d in (2, 3, 4, 8)
    for rho in (1, 2)
    for delta in (2, 3)
)


@dataclass
class ChainCheck:
    """One verified inequality at one grid point.

    ``margin`` is how far inside the inequality the evaluation landed;
    a negative margin beyond the slack makes ``ok`` False.
    """

    name: str
    point: dict
    ok: bool
    margin: float
    detail: str = ""


@dataclass
class ChainReport:
    checks: list
    skipped: list

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def violations(self):
        return [c for c in self.checks if not c.ok]

    def worst_by_name(self) -> dict:
        worst: dict = {}
        for c in self.checks:
            cur = worst.get(c.name)
            if cur is None or c.margin < cur.margin:
                worst[c.name] = c
        return worst

    def to_json(self, indent=2) -> str:
        summary = {}
        for name, worst in sorted(self.worst_by_name().items()):
            group = [c for c in self.checks if c.name == name]
            summary[name] = {
                "passed": all(c.ok for c in group),
                "checked": len(group),
                "worst_margin": worst.margin,
                "worst_point": worst.point,
            }
        payload = {
            "passed": self.passed,
            "checks": len(self.checks),
            "summary": summary,
            "violations": [asdict(c) for c in self.violations()],
            "skipped": self.skipped,
        }
        return json.dumps(payload, indent=indent, sort_keys=True)


def _geq(name, point, lhs, rhs, rel=_INEQ_SLACK, detail=""):
    scale = max(1.0, abs(lhs), abs(rhs))
    margin = lhs - rhs
    ok = margin >= -rel * scale
    if not detail:
        detail = "lhs=%r rhs=%r" % (lhs, rhs)
    return ChainCheck(name, point, ok, margin, detail)


def _eq(name, point, lhs, rhs, rel=_ORACLE_TOL, detail=""):
    scale = max(1.0, abs(lhs), abs(rhs))
    margin = rel * scale - abs(lhs - rhs)
    ok = margin >= 0.0
    if not detail:
        detail = "lhs=%r rhs=%r" % (lhs, rhs)
    return ChainCheck(name, point, ok, margin, detail)


def _log1m(x: float) -> float:
    """log(1 - x), falling to -inf when x >= 1."""
    if x >= 1.0:
        return float("-inf")
    return math.log1p(-x)


def _enumerated_optima(params: ProgramParams):
    """(max log-free LP value, min log product value) by vertex enumeration."""
    dm, c1, c2 = _shared_polytope(params)
    coefs = [params.p ** (dm - i) for i in range(dm)]
    log_coefs = [math.log1p(-(params.p ** (dm - i))) for i in range(dm)]
    pairs = [(float(i), 1.0) for i in range(dm)]
    lp_val, _ = _maximize_over_vertices(coefs, pairs, c1, c2)
    f_log, _ = _minimize_log_over_vertices(log_coefs, pairs, c1, c2)
    return lp_val, f_log


def _unconsolidated_optima(params: ProgramParams):
    """Optima of the variant where edges keep their own size j.

    Variables are (i, j) pairs with dmin <= j <= d and 0 <= i < j, under
    sum i*a_ij <= (delta-1)*d and sum j*a_ij <= delta*n.  Consolidating
    all sizes down to dmin is supposed to change neither optimum.
    """
    dm, d = params.dmin, params.d
    c1 = float((params.delta - 1) * params.d)
    c2 = float(params.delta * params.n)
    idx, pairs, coefs, log_coefs = [], [], [], []
    for j in range(dm, d + 1):
        for i in range(j):
            idx.append((i, j))
            pairs.append((float(i), float(j)))
            coefs.append(params.p ** (j - i))
            log_coefs.append(math.log1p(-(params.p ** (j - i))))
    lp_val, _ = _maximize_over_vertices(coefs, pairs, c1, c2)
    f_log, _ = _minimize_log_over_vertices(log_coefs, pairs, c1, c2)
    return lp_val, f_log


def _ratio_monotone_check(p, d, point):
    """g(x) = ((1-p**d)/(1-p**(d-x)))**(1/x) must not decrease on [1, d-1]."""
    if d <= 2:
        xs = np.array([1.0])
    else:
        xs = np.linspace(1.0, float(d - 1), 33)
    vals = ((1.0 - p**d) / (1.0 - p ** (d - xs))) ** (1.0 / xs)
    steps = np.diff(vals)
    margin = float(steps.min()) if steps.size else 0.0
    return _geq("ratio-monotone", point, margin, 0.0, detail="min step of g")


def _binomial_checks(n: int):
    """n**k/(4 k!) <= C(n,k) <= n**k/k! for k strictly below sqrt(n).

    Decided in exact integer arithmetic; the reported margin is the log
    of the surviving headroom.
    """
    out = []
    k_max = math.isqrt(n - 1) if n > 1 else 1
    ks = sorted({k for k in (1, 2, 5, k_max) if 1 <= k <= k_max})
    for k in ks:
        point = {"n": n, "k": k}
        comb = math.comb(n, k)
        fact = math.factorial(k)
        power = n**k
        lower_ok = power <= 4 * fact * comb
        upper_ok = fact * comb <= power
        lower_margin = math.log(4 * fact * comb) - math.log(power)
        upper_margin = math.log(power) - math.log(fact * comb)
        out.append(
            ChainCheck(
                "binomial-envelope-lower",
                point,
                lower_ok,
                lower_margin,
                "log(4 k! C(n,k)) - k log n",
            )
        )
        out.append(
            ChainCheck(
                "binomial-envelope-upper",
                point,
                upper_ok,
                upper_margin,
                "k log n - log(k! C(n,k))",
            )
        )
    return out


def _point_checks(params: ProgramParams):
    checks = []
    skipped = []
    pt = params.point()
    dm = params.dmin
    n, p = params.n, params.p
    expo = (params.delta - 1) * params.rho

    collapsed = ProgramParams(2, p, dm, 1, n)
    own_two = (
        params
        if params.delta == 2
        else ProgramParams(2, p, params.d, params.rho, n)
    )

    _, f_sol = f_bullet(params)
    _, f_two_sol = f_bullet(own_two)
    _, f_col_sol = f_bullet(collapsed)
    lp_own, lp_own_sol = lp_bullet(own_two)
    lp_col, lp_col_sol = lp_bullet(collapsed)

    # Closed forms against the vertex-enumeration oracle.  For delta
    # other than 2 the solver itself enumerates vertices, so the
    # two-point support pattern is the independent side there.
    lp_enum, f_enum_log = _enumerated_optima(params)
    lp_val, _ = lp_bullet(params)
    _, c1, c2 = _shared_polytope(params)
    a_top = min(c1 / (dm - 1), c2)
    pattern = a_top * p + (c2 - a_top) * p**dm
    checks.append(_eq("closed-vs-enumeration-max", pt, lp_val, lp_enum))
    checks.append(_eq("support-pattern-max", pt, lp_val, pattern))
    checks.append(
        _eq("closed-vs-enumeration-min", pt, f_sol.log_objective, f_enum_log)
    )

    # Raising the two-degree collapsed product bound to (delta-1)*rho
    # never overshoots the full product bound.
    checks.append(
        _geq(
            "exponent-collapse",
            pt,
            f_sol.log_objective,
            expo * f_col_sol.log_objective,
        )
    )

    # Product bound dominates one minus the union bound, both at the
    # point's own shape and at the collapsed shape.
    checks.append(
        _geq("product-vs-union", pt, f_two_sol.log_objective, _log1m(lp_own))
    )
    checks.append(
        _geq(
            "product-vs-union-collapsed",
            pt,
            f_col_sol.log_objective,
            _log1m(lp_col),
        )
    )

    # Consolidating edge sizes changes neither optimum.
    lp_unc, f_unc_log = _unconsolidated_optima(params)
    checks.append(_eq("size-collapse-max", pt, lp_val, lp_unc))
    checks.append(_geq("size-collapse-min", pt, f_unc_log, f_sol.log_objective,
                       rel=_ORACLE_TOL))

    checks.append(_ratio_monotone_check(p, params.d, pt))

    # The remaining links hold at the canonical sampling rate only.
    p_star = canonical_p(n, params.d, params.rho)
    if abs(p - p_star) > 1e-9 * p_star:
        skipped.append(dict(pt, reason="p is not the canonical sampling rate"))
        return checks, skipped
    if n < 100:
        skipped.append(dict(pt, reason="cap links need n >= 100"))
        return checks, skipped

    cap = dm / (dm - 1) * n ** (-1.0 / dm) + 1.0 / dm
    log_floor = math.log(math.log(n) / (2.0 * n))
    checks.append(_geq("union-bound-cap", pt, cap, lp_col))
    checks.append(_geq("cap-below-one", pt, 1.0 - math.log(n) / (2.0 * n), cap))
    checks.append(
        _geq(
            "composed-floor-inner",
            pt,
            expo * _log1m(lp_col),
            expo * log_floor,
        )
    )
    checks.append(
        _geq(
            "composed-floor-outer",
            pt,
            f_sol.log_objective,
            expo * _log1m(lp_col),
        )
    )
    return checks, skipped


def verify_inequality_chain(grid=None) -> ChainReport:
    """Evaluate the whole failure-bound inequality chain on a grid.

    ``grid`` is an iterable of ProgramParams; None selects the default
    grid (n in {100, 500, 10000}, d in {2,3,4,8}, rho in {1,2}, delta in
    {2,3}) at the canonical sampling rate, skipping combinations whose
    minimum edge size would fall below 2.  Links that require the
    canonical rate or n >= 100 are skipped (with a reason) at points
    that do not qualify, never silently passed.
    """
    checks: list = []
    skipped: list = []
    points = []
    if grid is None:
        for n, d, rho, delta in DEFAULT_GRID:
            if math.floor(d / rho) < 2:
                skipped.append(
                    {
                        "n": n,
                        "d": d,
                        "rho": rho,
                        "delta": delta,
                        "reason": "minimum edge size d/rho falls below 2",
                    }
                )
                continue
            points.append(ProgramParams(delta, canonical_p(n, d, rho), d, rho, n))
    else:
        points = list(grid)

    seen_ns = set()
    for params in points:
        point_checks, point_skips = _point_checks(params)
        checks.extend(point_checks)
        skipped.extend(point_skips)
        seen_ns.add(params.n)
    for n in sorted(seen_ns):
        checks.extend(_binomial_checks(n))
    checks.append(_ratio_monotone_check(0.5, 8, {"p": 0.5, "d": 8}))
    return ChainReport(checks, skipped)


# ---------------------------------------------------------------------------
# Monte-Carlo estimate behind the isolation probability
# ---------------------------------------------------------------------------


def estimate_unique_containment(hypergraph, edge, p, trials, seed=None):
    """Estimate the chance that a p-sample pinned to contain ``edge``
    also contains some other edge of ``hypergraph``.

    Every vertex outside ``edge`` joins the sample independently with
    probability p while ``edge`` itself is forced in.  Returns
    (estimate, standard_error) where the standard error is the usual
    binomial sqrt(q(1-q)/trials).
    """
    from .core import vertex_tuple

    if trials < 1:
        raise ValueError("trials must be at least 1")
    edge_t = vertex_tuple(edge, hypergraph.n)
    if frozenset(edge_t) not in hypergraph.edge_sets:
        raise ValueError("edge must belong to the hypergraph")
    others = [e for e in hypergraph.edges if frozenset(e) != frozenset(edge_t)]
    if not others:
        return 0.0, 0.0

    rng = np.random.default_rng(seed)
    edge_cols = np.fromiter(edge_t, dtype=np.int64)
    other_cols = [np.fromiter(e, dtype=np.int64) for e in others]
    hits = 0
    done = 0
    chunk = max(1, min(trials, 1 << 14))
    while done < trials:
        t = min(chunk, trials - done)
        sample = rng.random((t, hypergraph.n)) < p
        sample[:, edge_cols] = True
        contained = np.zeros(t, dtype=bool)
        for cols in other_cols:
            contained |= sample[:, cols].all(axis=1)
        hits += int(contained.sum())
        done += t
    estimate = hits / trials
    se = math.sqrt(estimate * (1.0 - estimate) / trials)
    return estimate, se
