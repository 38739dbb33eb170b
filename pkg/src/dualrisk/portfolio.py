"""Two-asset portfolio choice under rank-dependent utility.

A risk-free asset returns zero and a risky asset returns ``-R0`` with
probability ``p0`` and ``+R1`` otherwise. Investing ``share`` units of wealth
in the risky asset gives terminal wealth ``w0 - share*R0`` or
``w0 + share*R1``. Since the loss is the worse outcome it receives decision
weight ``h(p0)``.

Holding none of the risky asset is optimal exactly when
``h(p0) = R1 / (R0 + R1)``, whatever the utility. At that point the module
measures how much the middle return of a mean-preserving contraction of the
risky asset can be reduced while keeping zero participation optimal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    NonConcaveUtility,
    NotAtZeroParticipation,
    ParamOutOfRange,
    PortfolioAssumptionWarning,
)
from .preferences import UtilityFunction, WeightingFunction
from .risk_model import binary_spread, moments

__all__ = [
    "PortfolioProblem",
    "foc",
    "optimal_share",
    "zero_participation_weight",
    "contraction_reduction_exact",
    "contraction_reduction_approx",
]

SHARE_MARGIN = 1e-9
ZERO_PARTICIPATION_TOL = 1e-9


@dataclass(frozen=True)
class PortfolioProblem:
    """Inputs of the portfolio problem.

    Attributes:
        w0: Initial wealth.
        p0: Probability of the loss return.
        R0: Size of the loss return (positive).
        R1: Size of the gain return (positive).
        utility: Utility over terminal wealth.
        weighting: Probability weighting function.
    """

    w0: float
    p0: float
    R0: float
    R1: float
    utility: UtilityFunction
    weighting: WeightingFunction

    def __post_init__(self):
        if not (self.R0 > 0 and self.R1 > 0):
            raise ParamOutOfRange(f"returns must be positive, got R0={self.R0}, R1={self.R1}")
        if not 0.0 < self.p0 < 1.0:
            raise ParamOutOfRange(f"p0 must lie in (0, 1), got {self.p0}")
        self.utility._check(self.w0)
        if not self.R0 < self.R1:
            warnings.warn("expected R0 < R1", PortfolioAssumptionWarning, stacklevel=3)
        elif not self.R1 / (self.R0 + self.R1) > self.p0:
            warnings.warn("expected return is not positive", PortfolioAssumptionWarning, stacklevel=3)

    @property
    def loss_weight(self) -> float:
        return float(self.weighting.value(self.p0))

    @property
    def max_share(self) -> float:
        """Largest admissible share: wealth stays positive and inside the utility domain."""
        cap = self.w0 / self.R0 - SHARE_MARGIN
        lo, hi = self.utility.domain
        if math.isfinite(lo):
            cap = min(cap, (self.w0 - lo) / self.R0 - SHARE_MARGIN)
        if math.isfinite(hi):
            cap = min(cap, (hi - self.w0) / self.R1 - SHARE_MARGIN)
        return cap


def foc(prob: PortfolioProblem, share):
    """Derivative of the RDU objective with respect to ``share``."""
    hp = prob.loss_weight
    U, w0 = prob.utility, prob.w0
    return -prob.R0 * hp * U.d1(w0 - share * prob.R0) + prob.R1 * (1.0 - hp) * U.d1(w0 + share * prob.R1)


def _objective(prob: PortfolioProblem, share: float) -> float:
    hp = prob.loss_weight
    U, w0 = prob.utility, prob.w0
    return hp * U.value(w0 - share * prob.R0) + (1.0 - hp) * U.value(w0 + share * prob.R1)


def optimal_share(prob: PortfolioProblem) -> float:
    """Optimal share of wealth in the risky asset, within ``[0, max_share]``.

    Returns 0 when the marginal value of the first unit is not positive, and
    the upper end of the interval when the objective still rises there.
    Without strict concavity an interior optimum need not exist; a
    :class:`NonConcaveUtility` warning is issued and the better endpoint is
    returned.
    """
    hi = prob.max_share
    if hi <= 0.0:
        return 0.0
    if not prob.utility.is_concave:
        warnings.warn("utility is not strictly concave; no interior optimum", NonConcaveUtility,
                      stacklevel=2)
        return hi if _objective(prob, hi) > _objective(prob, 0.0) else 0.0
    f0 = foc(prob, 0.0)
    hp = prob.loss_weight
    # rounding level of the two terms of the first-order condition at 0
    noise = 8 * np.finfo(float).eps * (prob.R0 * hp + prob.R1 * (1.0 - hp)) * prob.utility.d1(prob.w0)
    if f0 <= noise:
        return 0.0
    if foc(prob, hi) >= 0.0:
        return hi
    return float(brentq(lambda a: foc(prob, a), 0.0, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps))


def zero_participation_weight(R0: float, R1: float) -> float:
    """Loss weight ``h(p0)`` at which holding no risky asset is optimal."""
    if not 0.0 < R0 < R1:
        raise ParamOutOfRange(f"requires 0 < R0 < R1, got R0={R0}, R1={R1}")
    return R1 / (R0 + R1)


def _check_contraction(prob: PortfolioProblem, eps1: float) -> None:
    target = prob.R1 / (prob.R0 + prob.R1)
    if abs(prob.loss_weight - target) > ZERO_PARTICIPATION_TOL:
        raise NotAtZeroParticipation(
            f"h(p0) = {prob.loss_weight!r} differs from R1/(R0+R1) = {target!r}"
        )
    if not 0.0 < eps1 <= min(prob.p0, 1.0 - prob.p0) + 1e-12:
        raise ParamOutOfRange(f"eps1 must lie in (0, min(p0, 1-p0)], got {eps1}")


def contraction_reduction_exact(prob: PortfolioProblem, eps1: float) -> float:
    """Reduction of the middle return that keeps zero participation optimal.

    The contracted asset returns ``-R0`` with probability ``p0 - eps1``,
    ``(R1 - R0)/2 - s`` with probability ``2*eps1`` and ``R1`` otherwise.
    The returned ``s`` makes the first-order condition at share 0 vanish.
    """
    _check_contraction(prob, eps1)
    h, p0 = prob.weighting, prob.p0
    R0, R1 = prob.R0, prob.R1
    left = -float(h.step(p0, -eps1))
    right = float(h.step(p0, eps1))
    hp = prob.loss_weight
    # numerator regrouped around h(p0) so that small eps1 does not cancel
    residual = -R0 * hp + R1 * (1.0 - hp)
    return (0.5 * (R0 + R1) * (left - right) + residual) / (left + right)


def contraction_reduction_approx(prob: PortfolioProblem, eps1: float) -> float:
    """Local approximation: maxiance over twice the mass, times the weighting index.

    The contraction undoes a spread of ``+-(R0 + R1)/2`` with probability
    ``eps1`` each.
    """
    _check_contraction(prob, eps1)
    m = moments(binary_spread(eps1, 0.5 * (prob.R0 + prob.R1)))
    return m.maxiance / (2.0 * m.total_mass) * float(prob.weighting.local_index(prob.p0))
