"""Numerical checks of "agent 2 is more risk averse than agent 1" under RDU.

Four characterisations are compared on finite grids:

(i)   both local indices of agent 2 dominate those of agent 1;
(ii)  agent 2's exact premium is at least agent 1's for every query;
(iv)  ``U2 o U1^-1`` and ``h2 o h1^-1`` are concave;
(v)   the cross ratios ``(f(y)-f(x)) / (f(w)-f(v))`` of agent 2 are smaller.

In the continuum these are equivalent. On a grid, (iv) and (v) are probed by
small stencils centred at the grid points, so that they look at the same
locations as (i). Only the direction (i) => (ii) is implied by the grids;
when (ii) fails the worst query is reported as a witness.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np

from .errors import BadQuadruple, RangeViolation
from .evaluation import PremiumQuery, rdu_premium_batch
from .preferences import UtilityFunction, WeightingFunction

__all__ = [
    "Agent",
    "Check",
    "DominanceReport",
    "DEFAULT_P_GRID",
    "wealth_grid",
    "index_dominance",
    "concave_transform_check",
    "cross_ratio_check",
    "local_quadruples",
    "premium_dominance",
    "sample_queries",
    "proposition1_report",
]

TOL = 1e-10
DEFAULT_P_GRID = np.round(np.linspace(0.01, 0.99, 99), 12)

PreferenceFunction = Union[UtilityFunction, WeightingFunction]


@dataclass(frozen=True)
class Agent:
    utility: UtilityFunction
    weighting: WeightingFunction
    label: str = ""

    def __str__(self) -> str:
        return self.label or f"{self.utility.spec}+{self.weighting.spec}"


@dataclass(frozen=True)
class Check:
    """Outcome of one grid check.

    ``gap`` is the worst margin found (negative means violated); ``witness``
    locates it when available.
    """

    holds: bool
    gap: float
    witness: Any = None

    @property
    def violation(self) -> float:
        return max(0.0, -self.gap)

    def to_dict(self) -> dict:
        return {"holds": self.holds, "gap": self.gap, "violation": self.violation,
                "witness": self.witness}


def _combine(*checks: Check) -> Check:
    worst = min(checks, key=lambda c: c.gap)
    return Check(all(c.holds for c in checks), worst.gap, worst.witness)


def wealth_grid(lo: float, hi: float, n: int = 101) -> np.ndarray:
    return np.linspace(lo, hi, n)


def index_dominance(
    a1: Agent, a2: Agent, w_grid: Sequence[float], p_grid: Sequence[float], tol: float = TOL
) -> Check:
    """Condition (i): ``-U2''/U2' >= -U1''/U1'`` and ``-h2''/h2' >= -h1''/h1'`` on the grids."""
    w = np.asarray(w_grid, dtype=float)
    p = np.asarray(p_grid, dtype=float)
    du = a2.utility.local_index(w) - a1.utility.local_index(w)
    dh = a2.weighting.local_index(p) - a1.weighting.local_index(p)
    iu, ih = int(np.argmin(du)), int(np.argmin(dh))
    return _combine(
        Check(bool(du[iu] >= -tol), float(du[iu]), {"w": float(w[iu])}),
        Check(bool(dh[ih] >= -tol), float(dh[ih]), {"p": float(p[ih])}),
    )


def _span(*fs: PreferenceFunction) -> tuple[float, float, bool]:
    """Common evaluation interval of ``fs`` and whether it is closed.

    Weighting functions are defined on ``[0, 1]``; utilities on their open
    ``domain``.
    """
    if all(isinstance(f, WeightingFunction) for f in fs):
        return 0.0, 1.0, True
    lo = max(f.domain[0] if isinstance(f, UtilityFunction) else 0.0 for f in fs)
    hi = min(f.domain[1] if isinstance(f, UtilityFunction) else 1.0 for f in fs)
    return lo, hi, False


def _stencil(
    grid: Sequence[float], rel_step: float, reach: int, span: tuple[float, float, bool] | None = None
) -> tuple[np.ndarray, float]:
    """Grid points, and a half-width ``d``, for stencils reaching ``reach * d``.

    ``d`` is ``rel_step`` times the smallest grid spacing. Stencils are
    centred on the grid points and may reach past the grid ends; centres are
    only pulled in where a stencil would leave ``span`` (the grid span when
    not given).
    """
    x = np.asarray(grid, dtype=float)
    if x.size < 2:
        d = rel_step * max(1.0, abs(float(x[0])))
    else:
        d = rel_step * float(np.min(np.diff(np.sort(x))))
    if span is None:
        lo, hi, closed = float(x.min()), float(x.max()), True
    else:
        lo, hi, closed = span
    margin = reach * d * (1.0 if closed else 1.5)
    return np.clip(x, lo + margin, hi - margin), d


def concave_transform_check(
    f1: PreferenceFunction, f2: PreferenceFunction, grid: Sequence[float],
    rel_step: float = 0.25, tol: float = TOL,
) -> Check:
    """Condition (iv): ``f2 o f1^-1`` is concave around every grid point.

    At each grid point ``x`` the composition is sampled at the images
    ``t = f1(x - d), f1(x), f1(x + d)``. The drop in slope across the
    stencil, relative to the mean slope and divided by ``d``, must be at
    least ``-tol``. This gap approximates the index difference between
    ``f2`` and ``f1`` at ``x``, so it is on the same scale as
    :func:`index_dominance`.
    """
    x, d = _stencil(grid, rel_step, 1, _span(f1, f2))
    pts = np.stack([x - d, x, x + d])
    t = f1.value(pts)
    g = f2.value(pts)
    if np.any(np.diff(t, axis=0) <= 0.0):
        raise RangeViolation("f1 is not strictly increasing on the grid")
    s_left = (g[1] - g[0]) / (t[1] - t[0])
    s_right = (g[2] - g[1]) / (t[2] - t[1])
    rel = (s_left - s_right) / (0.5 * (np.abs(s_left) + np.abs(s_right))) / d
    k = int(np.argmin(rel))
    return Check(bool(rel[k] >= -tol), float(rel[k]), {"x": float(x[k])})


def local_quadruples(
    grid: Sequence[float], rel_step: float = 0.25, within: Sequence[PreferenceFunction] = ()
) -> np.ndarray:
    """Quadruples ``(x-2d, x-d, x+d, x+2d)`` centred at each grid point.

    Without ``within`` the quadruples stay inside the grid span. Otherwise
    they may reach past its ends as far as the functions in ``within`` are
    defined.
    """
    x, d = _stencil(grid, rel_step, 2, _span(*within) if within else None)
    return np.stack([x - 2 * d, x - d, x + d, x + 2 * d], axis=1)


def cross_ratio_check(
    f1: PreferenceFunction, f2: PreferenceFunction, quadruples, tol: float = TOL
) -> Check:
    """Condition (v) on quadruples ``v < w <= x < y``.

    Requires ``(f2(y)-f2(x))/(f2(w)-f2(v)) <= (f1(y)-f1(x))/(f1(w)-f1(v))``.
    The gap is the relative difference of the two ratios divided by the
    distance between the midpoints of ``[v, w]`` and ``[x, y]``.
    """
    q = np.atleast_2d(np.asarray(quadruples, dtype=float))
    if q.ndim != 2 or q.shape[1] != 4:
        raise BadQuadruple("quadruples must have four entries")
    v, w, x, y = q.T
    bad = ~((v < w) & (w <= x) & (x < y))
    if np.any(bad):
        raise BadQuadruple(f"not ordered v < w <= x < y: {q[np.argmax(bad)].tolist()}")

    def ratio(f):
        fv = f.value(q)
        return (fv[:, 3] - fv[:, 2]) / (fv[:, 1] - fv[:, 0])

    r1, r2 = ratio(f1), ratio(f2)
    rel = (r1 - r2) / r1 / (0.5 * (x + y - v - w))
    k = int(np.argmin(rel))
    return Check(bool(rel[k] >= -tol), float(rel[k]), {"quadruple": q[k].tolist()})


def _premia(agent: Agent, queries: Sequence[PremiumQuery]) -> np.ndarray:
    cols = np.array([[q.w0, q.p0, q.eps1, q.eps2] for q in queries]).T
    # re-validate against this agent's utility domain
    agent.utility._check(np.concatenate([cols[0] - cols[3], cols[0] + cols[3]]))
    return np.atleast_1d(rdu_premium_batch(agent.utility, agent.weighting, *cols))


def _query_dict(q: PremiumQuery) -> dict:
    return {"w0": q.w0, "p0": q.p0, "eps1": q.eps1, "eps2": q.eps2}


def premium_dominance(
    a1: Agent, a2: Agent, queries: Sequence[PremiumQuery], tol: float = TOL
) -> Check:
    """Condition (ii): ``lambda_2 >= lambda_1 - tol`` for every query.

    Only the numeric fields of each query are used; preferences come from
    the agents.
    """
    queries = list(queries)
    if not queries:
        return Check(True, float("inf"))
    gap = _premia(a2, queries) - _premia(a1, queries)
    k = int(np.argmin(gap))
    return Check(bool(gap[k] >= -tol), float(gap[k]), _query_dict(queries[k]))


def sample_queries(
    n: int,
    w_range: tuple[float, float],
    p_range: tuple[float, float] = (0.01, 0.99),
    seed: int = 0,
    n_boundary: int | None = None,
) -> list[PremiumQuery]:
    """Random feasible queries whose evaluation points stay inside the ranges.

    ``n`` interior queries keep ``[p0 - eps1, p0 + eps1]`` inside ``p_range``
    and ``[w0 - eps2, w0 + eps2]`` inside ``w_range``. ``n_boundary`` more
    queries use ``eps1 = min(p0, 1 - p0)``, which reaches ``p = 0`` or
    ``p = 1``; these are flagged by :attr:`PremiumQuery.is_boundary`.
    By default one boundary query is added per ten interior ones.
    """
    if n_boundary is None:
        n_boundary = n // 10
    rng = np.random.default_rng(seed)
    w_lo, w_hi = w_range
    p_lo, p_hi = p_range
    out = []
    for i in range(n + n_boundary):
        w0 = rng.uniform(w_lo, w_hi)
        eps2 = rng.uniform(0.01, 1.0) * min(w0 - w_lo, w_hi - w0)
        p0 = rng.uniform(p_lo, p_hi)
        if i < n:
            eps1 = rng.uniform(0.01, 1.0) * min(p0 - p_lo, p_hi - p0)
        else:
            eps1 = min(p0, 1.0 - p0)
        if eps1 <= 0.0 or eps2 <= 0.0:
            continue
        out.append(PremiumQuery(p0=p0, eps1=eps1, eps2=eps2, w0=w0))
    return out


@dataclass(frozen=True)
class DominanceReport:
    condition_i: Check
    condition_ii: Check
    condition_iv: Check
    condition_v: Check
    boundary_ii: Check | None = None
    w_grid: tuple[float, ...] = field(default=(), repr=False)
    p_grid: tuple[float, ...] = field(default=(), repr=False)
    n_queries: int = 0

    @property
    def agree(self) -> bool:
        flags = {c.holds for c in (self.condition_i, self.condition_ii,
                                   self.condition_iv, self.condition_v)}
        return len(flags) == 1

    def to_dict(self) -> dict:
        return {
            "condition_i": self.condition_i.to_dict(),
            "condition_ii": self.condition_ii.to_dict(),
            "condition_iv": self.condition_iv.to_dict(),
            "condition_v": self.condition_v.to_dict(),
            "boundary_ii": None if self.boundary_ii is None else self.boundary_ii.to_dict(),
            "agree": self.agree,
            "w_grid": [float(w) for w in self.w_grid],
            "p_grid": [float(p) for p in self.p_grid],
            "n_queries": self.n_queries,
        }


def proposition1_report(
    a1: Agent,
    a2: Agent,
    w_grid: Sequence[float],
    p_grid: Sequence[float],
    queries: Sequence[PremiumQuery],
) -> DominanceReport:
    """Evaluate (i), (ii), (iv) and (v) for ``a2`` versus ``a1``.

    Boundary queries (``eps1 = min(p0, 1 - p0)``) are split off into
    ``boundary_ii`` because they evaluate the weighting functions at 0 or 1,
    outside any probability grid strictly inside ``(0, 1)``.
    """
    w = np.asarray(w_grid, dtype=float)
    p = np.asarray(p_grid, dtype=float)
    queries = list(queries)
    interior = [q for q in queries if not q.is_boundary]
    boundary = [q for q in queries if q.is_boundary]
    cond_iv = _combine(
        concave_transform_check(a1.utility, a2.utility, w),
        concave_transform_check(a1.weighting, a2.weighting, p),
    )
    cond_v = _combine(
        cross_ratio_check(a1.utility, a2.utility, local_quadruples(w, within=(a1.utility, a2.utility))),
        cross_ratio_check(a1.weighting, a2.weighting, local_quadruples(p, within=(a1.weighting, a2.weighting))),
    )
    return DominanceReport(
        condition_i=index_dominance(a1, a2, w, p),
        condition_ii=premium_dominance(a1, a2, interior),
        condition_iv=cond_iv,
        condition_v=cond_v,
        boundary_ii=premium_dominance(a1, a2, boundary) if boundary else None,
        w_grid=tuple(w.tolist()),
        p_grid=tuple(p.tolist()),
        n_queries=len(queries),
    )


def with_preferences(q: PremiumQuery, agent: Agent) -> PremiumQuery:
    """Copy of ``q`` carrying the agent's preferences."""
    return dataclasses.replace(q, utility=agent.utility, weighting=agent.weighting)
