"""Rank-dependent evaluation and risk premia, exact and local.

The setting: a two-branch lottery with outcomes ``w0 - eps2`` (probability
``p0``) and ``w0 + eps2`` is compared with its mean-preserving contraction,
which moves probability ``eps1`` from each branch to an intermediate outcome
``w0 - lambda``. The premium ``lambda`` makes the agent indifferent. Under
the dual theory (linear utility) the outer outcomes are ``w0 -/+ 1`` and the
premium is written ``rho``.

The local approximations are

* EU: ``m2 / 2 * (-U''/U')(w0)``
* DT: ``mbar2 / (2 Pr) * (-h''/h')(p0)``
* RDU: ``m2 / (2 Pr) * (-U''/U')(w0) + mbar2 / (2 Pr) * (-h''/h')(p0)``

where ``m2``, ``mbar2`` and ``Pr`` are the unconditional variance, maxiance
and mass of the spread risk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .errors import (
    DomainViolation,
    InconsistentLambda,
    NoBracket,
    NotZeroMean,
    OrderingViolated,
    ParamOutOfRange,
)
from .preferences import (
    IdentityWeighting,
    LinearUtility,
    UtilityFunction,
    WeightingFunction,
)
from .risk_model import (
    Lottery,
    MomentSet,
    SpreadRisk,
    binary_spread,
    build_lottery,
    moments,
)

__all__ = [
    "PremiumQuery",
    "PremiumResult",
    "dt_value",
    "rdu_value",
    "eu_premium_exact",
    "eu_premium_approx",
    "dt_premium_exact",
    "dt_premium_general",
    "dt_premium_approx",
    "rdu_premium_exact",
    "rdu_premium_general",
    "rdu_premium_approx",
    "rdu_premium_batch",
    "premium_sensitivity",
    "premium_surface",
    "dt_lottery_pair",
    "rdu_lottery_pair",
]

FEAS_TOL = 1e-12


@dataclass(frozen=True)
class PremiumQuery:
    """Parameters of one premium problem.

    ``eps2`` and ``utility`` are irrelevant for the dual theory and default
    to 1 and linear utility.
    """

    p0: float
    eps1: float
    eps2: float = 1.0
    w0: float = 0.0
    utility: UtilityFunction = field(default_factory=LinearUtility)
    weighting: WeightingFunction = field(default_factory=IdentityWeighting)

    def __post_init__(self):
        if not 0.0 < self.p0 < 1.0:
            raise ParamOutOfRange(f"p0 must lie in (0, 1), got {self.p0}")
        if not 0.0 < self.eps1 <= min(self.p0, 1.0 - self.p0) + FEAS_TOL:
            raise ParamOutOfRange(
                f"need 0 < eps1 <= min(p0, 1 - p0); got eps1={self.eps1}, p0={self.p0}"
            )
        if not self.eps2 > 0.0:
            raise ParamOutOfRange(f"eps2 must be positive, got {self.eps2}")
        self.utility._check([self.w0 - self.eps2, self.w0 + self.eps2])

    @property
    def is_boundary(self) -> bool:
        """True when ``eps1 = min(p0, 1 - p0)``: a branch of the contraction is empty."""
        return abs(self.eps1 - min(self.p0, 1.0 - self.p0)) <= FEAS_TOL

    def branch_weights(self) -> tuple[float, float, float]:
        """``(h(p0) - h(p0-eps1), h(p0+eps1) - h(p0), h(p0+eps1) - h(p0-eps1))``."""
        h = self.weighting
        left = -float(h.step(self.p0, -self.eps1))
        right = float(h.step(self.p0, self.eps1))
        return left, right, left + right


@dataclass(frozen=True)
class PremiumResult:
    """An approximated premium together with the exact value it approximates."""

    exact: float
    approx: float
    variance_term: float
    maxiance_term: float
    moments: MomentSet
    solver_iterations: int = 0

    @property
    def error(self) -> float:
        return self.exact - self.approx

    def to_dict(self) -> dict:
        return {
            "exact": self.exact,
            "approx": self.approx,
            "variance_term": self.variance_term,
            "maxiance_term": self.maxiance_term,
            "moments": self.moments.to_dict(),
            "solver_iterations": self.solver_iterations,
        }


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _decision_weights(h: WeightingFunction, lottery: Lottery, convention: str) -> np.ndarray:
    p = lottery.probs
    if convention == "cumulative":
        F = np.concatenate(([0.0], np.cumsum(p)))
        F[-1] = 1.0
        return np.diff(h.value(F))
    if convention == "decumulative":
        # G_i = P(X >= x_i); weight of x_i is hbar(G_i) - hbar(G_{i+1})
        G = np.concatenate((np.cumsum(p[::-1])[::-1], [0.0]))
        G[0] = 1.0
        return -np.diff(h.value(G))
    raise ParamOutOfRange(f"unknown convention {convention!r}")


def dt_value(h: WeightingFunction, lottery: Lottery, convention: str = "cumulative") -> float:
    """Dual-theory value ``sum_i x_i (h(F_i) - h(F_{i-1}))``.

    With ``convention="decumulative"``, ``h`` is read as a distortion of
    decumulative probabilities, as produced by
    :func:`~dualrisk.preferences.decumulative_transform`.
    """
    w = _decision_weights(h, lottery, convention)
    return math.fsum((w * lottery.outcomes).tolist())


def rdu_value(U: UtilityFunction, h: WeightingFunction, lottery: Lottery) -> float:
    """Rank-dependent utility ``sum_i U(x_i) (h(F_i) - h(F_{i-1}))``."""
    w = _decision_weights(h, lottery, "cumulative")
    return math.fsum((w * U.value(lottery.outcomes)).tolist())


# ---------------------------------------------------------------------------
# expected utility
# ---------------------------------------------------------------------------


def _zero_mean(risk: Lottery) -> None:
    if abs(risk.mean) > 1e-9:
        raise NotZeroMean(f"risk mean {risk.mean!r} is not zero")


def eu_premium_exact(U: UtilityFunction, w0: float, risk: Lottery) -> float:
    """Pratt-Arrow premium ``pi`` solving ``U(w0 - pi) = E[U(w0 + X)]``."""
    _zero_mean(risk)
    eu = math.fsum((risk.probs * U.value(w0 + risk.outcomes)).tolist())
    return w0 - U.inverse(eu)


def eu_premium_approx(U: UtilityFunction, w0: float, risk: Lottery) -> float:
    """Local approximation ``variance / 2 * (-U''/U')(w0)``."""
    _zero_mean(risk)
    U._check(w0 + risk.outcomes)
    return 0.5 * moments(risk).variance * U.local_index(w0)


# ---------------------------------------------------------------------------
# dual theory
# ---------------------------------------------------------------------------


def dt_premium_exact(q: PremiumQuery) -> float:
    """Exact DT premium for the binary spread ``+-1`` with probability ``eps1`` each."""
    left, right, total = q.branch_weights()
    return (left - right) / total


def _branch(p0: float, risk: SpreadRisk) -> tuple[float, float, np.ndarray]:
    eps1 = 0.5 * risk.total_mass
    if not 0.0 < p0 < 1.0:
        raise ParamOutOfRange(f"p0 must lie in (0, 1), got {p0}")
    if eps1 > min(p0, 1.0 - p0) + FEAS_TOL:
        raise ParamOutOfRange(f"spread mass {2 * eps1} does not fit around p0={p0}")
    lo = max(p0 - eps1, 0.0)
    hi = min(p0 + eps1, 1.0)
    points = lo + np.concatenate(([0.0], np.cumsum(risk.probs)))
    points[0], points[-1] = lo, hi
    return lo, hi, np.clip(points, 0.0, 1.0)


def _spread_weights(h: WeightingFunction, p0: float, risk: SpreadRisk) -> tuple[np.ndarray, float]:
    """Successive weighting increments over the intermediate branch, and their sum."""
    _, _, points = _branch(p0, risk)
    hv = h.value(points)
    return np.diff(hv), float(hv[-1] - hv[0])


def dt_premium_general(
    h: WeightingFunction, p0: float, risk: SpreadRisk, outer: float = 1.0
) -> float:
    """Exact DT premium when an arbitrary zero-mean ``risk`` is attached.

    The risk is attached to the intermediate branch, which spans cumulative
    probabilities ``[p0 - eps1, p0 + eps1]`` with ``eps1 = Pr / 2``. Its
    outcomes must stay within the outer outcomes ``[-outer, outer]``.
    """
    if risk.outcomes[0] < -outer or risk.outcomes[-1] > outer:
        raise OrderingViolated(f"spread outcomes must lie in [-{outer}, {outer}]")
    dh, total = _spread_weights(h, p0, risk)
    return -math.fsum((dh * risk.outcomes).tolist()) / total


def dt_premium_approx(h: WeightingFunction, p0: float, risk: SpreadRisk) -> PremiumResult:
    """DT approximation ``mbar2 / (2 Pr) * (-h''/h')(p0)``.

    ``exact`` is filled in with :func:`dt_premium_general`, with the outer
    outcomes widened when the spread exceeds ``[-1, 1]`` (the premium does
    not depend on the outer outcomes, only on the ordering).
    """
    m = moments(risk)
    outer = max(1.0, float(np.max(np.abs(risk.outcomes))))
    exact = dt_premium_general(h, p0, risk, outer=outer)
    term = m.maxiance / (2.0 * m.total_mass) * h.local_index(p0)
    return PremiumResult(exact=exact, approx=term, variance_term=0.0, maxiance_term=term, moments=m)


# ---------------------------------------------------------------------------
# rank-dependent utility
# ---------------------------------------------------------------------------


def _solve_lambda(U: UtilityFunction, w0: float, target: float, half_width: float) -> tuple[float, int]:
    """Solve ``U(w0 - lam) = target``; closed form first, bisection otherwise."""
    try:
        return w0 - U.inverse(target), 0
    except NotImplementedError:
        pass

    def f(lam):
        return U.value(w0 - lam) - target

    lo, hi = -half_width, half_width
    if f(lo) * f(hi) > 0.0:
        raise NoBracket(f"indifference equation has no root in [{lo}, {hi}]")
    root, info = bisect(f, lo, hi, xtol=1e-12, maxiter=200, full_output=True)
    return root, info.iterations


def rdu_premium_general(
    U: UtilityFunction,
    h: WeightingFunction,
    w0: float,
    p0: float,
    risk: SpreadRisk,
    eps2: float | None = None,
) -> float:
    """Exact RDU premium for an arbitrary zero-mean spread on the middle branch.

    Solves ``(h(p0+eps1) - h(p0-eps1)) U(w0 - lam) = sum_i dh_i U(w0 + x_i)``
    with ``eps1 = Pr / 2``. If ``eps2`` is given, outcomes must satisfy
    ``|x_i| <= eps2`` so that the outer branches keep their rank.
    """
    return _rdu_general(U, h, w0, p0, risk, eps2)[0]


def _rdu_general(U, h, w0, p0, risk, eps2=None) -> tuple[float, int]:
    if eps2 is not None and float(np.max(np.abs(risk.outcomes))) > eps2:
        raise OrderingViolated(f"spread outcomes must satisfy |x| <= eps2 = {eps2}")
    dh, total = _spread_weights(h, p0, risk)
    u = U.value(w0 + risk.outcomes)
    target = math.fsum((dh * u).tolist()) / total
    return _solve_lambda(U, w0, target, float(np.max(np.abs(risk.outcomes))))


def rdu_premium_exact(q: PremiumQuery) -> float:
    """Exact RDU premium ``lambda`` for the binary spread ``+-eps2``.

    With ``p0 = eps1 = 1/2`` the contracted lottery is the sure amount
    ``w0 - lambda`` and ``lambda`` is the Pratt-Arrow premium.
    """
    U = q.utility
    left, right, total = q.branch_weights()
    u_lo, u_hi = U.value(np.array([q.w0 - q.eps2, q.w0 + q.eps2])).tolist()
    target = (left * u_lo + right * u_hi) / total
    lam, _ = _solve_lambda(U, q.w0, target, q.eps2)
    return lam


def rdu_premium_batch(U: UtilityFunction, h: WeightingFunction, w0, p0, eps1, eps2) -> np.ndarray:
    """Vectorised :func:`rdu_premium_exact` over broadcast parameter arrays.

    Inputs are not validated; build :class:`PremiumQuery` objects first when
    they come from outside.
    """
    w0, p0, eps1, eps2 = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (w0, p0, eps1, eps2))
    )
    left = -np.asarray(h.step(p0, -eps1))
    right = np.asarray(h.step(p0, eps1))
    u_lo, u_hi = U.value(w0 - eps2), U.value(w0 + eps2)
    target = (left * u_lo + right * u_hi) / (left + right)
    try:
        return w0 - U.inverse(target)
    except NotImplementedError:
        pass
    out = np.empty(target.shape)
    for i in np.ndindex(target.shape):
        out[i] = _solve_lambda(U, float(w0[i]), float(target[i]), float(eps2[i]))[0]
    return out


def rdu_premium_approx(
    U: UtilityFunction, h: WeightingFunction, w0: float, p0: float, risk: SpreadRisk
) -> PremiumResult:
    """Local RDU approximation split into its variance and maxiance terms."""
    m = moments(risk)
    lam, iters = _rdu_general(U, h, w0, p0, risk)
    scale = 1.0 / (2.0 * m.total_mass)
    var_term = m.variance * scale * U.local_index(w0)
    max_term = m.maxiance * scale * h.local_index(p0)
    return PremiumResult(
        exact=lam,
        approx=var_term + max_term,
        variance_term=var_term,
        maxiance_term=max_term,
        moments=m,
        solver_iterations=iters,
    )


def premium_sensitivity(q: PremiumQuery, lam: float) -> float:
    """Derivative of the exact RDU premium with respect to ``eps2``.

    Obtained by setting the total differential of the indifference equation
    to zero. ``lam`` must solve that equation for ``q``.
    """
    U = q.utility
    left, right, total = q.branch_weights()
    a, b = left / total, right / total
    u_lo, u_hi = U.value(np.array([q.w0 - q.eps2, q.w0 + q.eps2])).tolist()
    try:
        u_lam = U.value(q.w0 - lam)
    except DomainViolation:
        raise InconsistentLambda(f"lambda={lam} leaves the utility domain") from None
    if abs(u_lam - (a * u_lo + b * u_hi)) >= 1e-9:
        raise InconsistentLambda(f"lambda={lam} does not solve the indifference equation")
    d_lo, d_hi = U.d1(np.array([q.w0 - q.eps2, q.w0 + q.eps2])).tolist()
    d_lam = U.d1(q.w0 - lam)
    return a * d_lo / d_lam - b * d_hi / d_lam


def premium_surface(
    U: UtilityFunction,
    h: WeightingFunction,
    w0_grid,
    p0_grid,
    m2_over_2pr: float = 1.0,
    mbar2_over_2pr: float = 1.0,
) -> np.ndarray:
    """Approximate RDU premium on a ``(w0, p0)`` grid with normalised moments.

    Returns an array of shape ``(len(w0_grid), len(p0_grid))``.
    """
    w = np.asarray(w0_grid, dtype=float)
    p = np.asarray(p0_grid, dtype=float)
    return m2_over_2pr * U.local_index(w)[:, None] + mbar2_over_2pr * h.local_index(p)[None, :]


# ---------------------------------------------------------------------------
# the lotteries behind the premia
# ---------------------------------------------------------------------------


def _lottery(pairs) -> Lottery:
    return build_lottery([(x, p) for x, p in pairs if p > 0.0])


def dt_lottery_pair(w0: float, p0: float, eps1: float, x: float = 0.0) -> tuple[Lottery, Lottery]:
    """Lottery ``A`` (``w0 -/+ 1``) and its contraction ``B`` with middle outcome ``w0 + x``."""
    return rdu_lottery_pair(w0, p0, eps1, 1.0, x)


def rdu_lottery_pair(
    w0: float, p0: float, eps1: float, eps2: float, y: float = 0.0
) -> tuple[Lottery, Lottery]:
    """Lottery ``C`` (``w0 -/+ eps2``) and its contraction ``D`` with middle outcome ``w0 + y``."""
    if not 0.0 < eps1 <= min(p0, 1.0 - p0) + FEAS_TOL:
        raise ParamOutOfRange("need 0 < eps1 <= min(p0, 1 - p0)")
    if not -eps2 < y < eps2:
        raise OrderingViolated("the middle outcome must lie strictly between the branches")
    C = _lottery([(w0 - eps2, p0), (w0 + eps2, 1.0 - p0)])
    D = _lottery(
        [(w0 - eps2, p0 - eps1), (w0 + y, 2.0 * eps1), (w0 + eps2, 1.0 - p0 - eps1)]
    )
    return C, D


def spread_for_query(q: PremiumQuery) -> SpreadRisk:
    """The binary spread risk behind a premium query."""
    return binary_spread(q.eps1, q.eps2)
