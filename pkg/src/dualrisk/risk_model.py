"""Discrete risks and their primal and dual moments.

Two kinds of risk are supported:

* :class:`Lottery` -- a finite probability distribution with total mass one.
* :class:`SpreadRisk` -- a zero-mean *sub*-probability risk with total mass
  ``Pr <= 1``. It describes a mean-preserving spread that is only effective
  on one branch of a lottery; its moments are "unconditional", i.e. they are
  Stieltjes integrals against the sub-distribution whose CDF tops out at
  ``Pr``.

The maxiance of a risk is the expected best of two independent draws minus
the mean, and equals ``sum_i (x_i - m) * (F_i**2 - F_{i-1}**2)`` for sorted
outcomes. The miniance is the analogue for the worst of two draws.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    BadOrder,
    EmptyLottery,
    InsufficientBranchMass,
    MassExceedsOne,
    MassNotOne,
    NonPositiveProbability,
    NotZeroMean,
    OrderingViolated,
    ParamOutOfRange,
    ZeroMeanGini,
)

__all__ = [
    "Lottery",
    "SpreadRisk",
    "MomentSet",
    "build_lottery",
    "build_spread_risk",
    "binary_spread",
    "nstate_spread",
    "apply_spread",
    "moments",
    "dual_moment",
    "gini",
    "risk_to_json",
    "risk_from_json",
]

MASS_TOL = 1e-9
MEAN_TOL = 1e-9
# below this, a mass is left alone so that re-building a built risk is bit-exact
_RENORM_TOL = 1e-15

Pairs = Iterable[Sequence[float]]


class _DiscreteRisk:
    """Shared storage for sorted, merged, read-only atoms."""

    outcomes: np.ndarray
    probs: np.ndarray

    def __init__(self, outcomes: np.ndarray, probs: np.ndarray) -> None:
        outcomes = np.array(outcomes, dtype=float)
        probs = np.array(probs, dtype=float)
        outcomes.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "probs", probs)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __len__(self) -> int:
        return len(self.outcomes)

    def __eq__(self, other) -> bool:
        return (
            type(other) is type(self)
            and np.array_equal(self.outcomes, other.outcomes)
            and np.array_equal(self.probs, other.probs)
        )

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.outcomes.tobytes(), self.probs.tobytes()))

    def __repr__(self) -> str:
        body = ", ".join(f"({x!r}, {p!r})" for x, p in self.atoms)
        return f"{type(self).__name__}{{{body}}}"

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        return tuple(zip(self.outcomes.tolist(), self.probs.tolist()))

    @property
    def cdf(self) -> np.ndarray:
        """(Sub-)CDF evaluated at each outcome."""
        return np.cumsum(self.probs)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.probs.tolist())

    @property
    def mean(self) -> float:
        """Unconditional mean ``sum p_i x_i``."""
        return math.fsum((self.outcomes * self.probs).tolist())

    def to_dict(self) -> dict:
        return {"atoms": [[x, p] for x, p in self.atoms]}


class Lottery(_DiscreteRisk):
    """Finite discrete distribution over monetary outcomes (mass one).

    Build instances with :func:`build_lottery`; the constructor does not
    validate.
    """


class SpreadRisk(_DiscreteRisk):
    """Zero-mean sub-probability risk attached to one branch of a lottery.

    Build instances with :func:`build_spread_risk`, :func:`binary_spread` or
    :func:`nstate_spread`.
    """


Risk = Union[Lottery, SpreadRisk]


@dataclass(frozen=True)
class MomentSet:
    """Primal and dual moments of a risk.

    For a :class:`SpreadRisk` the centring point is zero and every moment is
    unconditional (computed against the sub-CDF).
    """

    mean: float
    variance: float
    maxiance: float
    miniance: float
    total_mass: float

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "maxiance": self.maxiance,
            "miniance": self.miniance,
            "total_mass": self.total_mass,
        }


def _merge(pairs: Pairs) -> tuple[np.ndarray, np.ndarray]:
    pairs = [(float(x), float(p)) for x, p in pairs]
    if not pairs:
        raise EmptyLottery("a risk needs at least one atom")
    for x, p in pairs:
        if not math.isfinite(x) or not math.isfinite(p):
            raise ParamOutOfRange(f"non-finite atom ({x}, {p})")
        if p <= 0.0:
            raise NonPositiveProbability(f"probability {p} at outcome {x} is not positive")
    merged: dict[float, list[float]] = {}
    for x, p in pairs:
        merged.setdefault(x, []).append(p)
    outcomes = np.array(sorted(merged))
    probs = np.array([math.fsum(merged[x]) for x in outcomes.tolist()])
    return outcomes, probs


def build_lottery(pairs: Pairs) -> Lottery:
    """Build a :class:`Lottery` from ``(outcome, probability)`` pairs.

    Duplicate outcomes are merged, outcomes are sorted, and a total mass
    within ``1e-9`` of one is renormalised.

    Raises:
        EmptyLottery: no pairs given.
        NonPositiveProbability: some probability is ``<= 0``.
        MassNotOne: the probabilities sum to something more than ``1e-9``
            away from one.

    Example:
        >>> build_lottery([(1, 0.5), (-1, 0.5)]).atoms
        ((-1.0, 0.5), (1.0, 0.5))
    """
    outcomes, probs = _merge(pairs)
    total = math.fsum(probs.tolist())
    if abs(total - 1.0) > MASS_TOL:
        raise MassNotOne(f"probabilities sum to {total!r}, not 1")
    if abs(total - 1.0) > _RENORM_TOL:
        probs = probs / total
    return Lottery(outcomes, probs)


def build_spread_risk(pairs: Pairs) -> SpreadRisk:
    """Build a zero-mean :class:`SpreadRisk` from ``(outcome, probability)`` pairs.

    Raises:
        MassExceedsOne: the probabilities sum to more than one.
        NotZeroMean: ``|sum p_i x_i| > 1e-9``. Non-zero means are rejected,
            never silently centred.
    """
    outcomes, probs = _merge(pairs)
    total = math.fsum(probs.tolist())
    if total > 1.0 + 1e-12:
        raise MassExceedsOne(f"total mass {total!r} exceeds 1")
    mean = math.fsum((outcomes * probs).tolist())
    if abs(mean) > MEAN_TOL:
        raise NotZeroMean(f"unconditional mean {mean!r} is not zero")
    return SpreadRisk(outcomes, probs)


def binary_spread(eps1: float, eps2: float) -> SpreadRisk:
    """Risk taking the values ``-eps2`` and ``+eps2`` each with probability ``eps1``."""
    if not 0.0 < eps1 <= 0.5:
        raise ParamOutOfRange(f"eps1 must lie in (0, 1/2], got {eps1}")
    if not eps2 > 0.0:
        raise ParamOutOfRange(f"eps2 must be positive, got {eps2}")
    return build_spread_risk([(-eps2, eps1), (eps2, eps1)])


def nstate_spread(eps1: float, outcomes: Sequence[float]) -> SpreadRisk:
    """Zero-mean ``n``-state risk, each state with probability ``2*eps1/n``.

    Adjacent outcomes may coincide; they are merged into a single atom, which
    is how unequal state probabilities are expressed.

    Args:
        eps1: half the total mass, in ``(0, 1/2]``.
        outcomes: ``n >= 2`` non-decreasing values summing to zero.
    """
    xs = [float(x) for x in outcomes]
    n = len(xs)
    if n < 2:
        raise ParamOutOfRange(f"need at least 2 states, got {n}")
    if any(b < a for a, b in zip(xs, xs[1:])):
        raise ParamOutOfRange("outcomes must be sorted ascending")
    if not 0.0 < eps1 <= 0.5:
        raise ParamOutOfRange(f"eps1 must lie in (0, 1/2], got {eps1}")
    if abs(math.fsum(xs)) > MEAN_TOL:
        raise NotZeroMean(f"outcomes sum to {math.fsum(xs)!r}, not 0")
    p = 2.0 * eps1 / n
    return build_spread_risk([(x, p) for x in xs])


def apply_spread(base: Lottery, branch_outcome: float, risk: SpreadRisk) -> Lottery:
    """Attach ``risk`` to the atom of ``base`` located at ``branch_outcome``.

    Mass ``risk.total_mass`` is taken from the branch atom and redistributed
    to ``branch_outcome + x_i`` with probability ``p_i``. The result is a
    mean-preserving spread of ``base``.

    Raises:
        InsufficientBranchMass: the branch atom is missing or lighter than
            the spread.
        OrderingViolated: a shifted outcome would jump past a neighbouring
            outcome of ``base``. Landing exactly on a neighbour is allowed.
    """
    xs = base.outcomes
    hits = np.flatnonzero(np.abs(xs - branch_outcome) <= 1e-12)
    mass = risk.total_mass
    if hits.size == 0:
        raise InsufficientBranchMass(f"no atom at {branch_outcome}")
    k = int(hits[0])
    branch_mass = float(base.probs[k])
    if branch_mass < mass - 1e-12:
        raise InsufficientBranchMass(
            f"branch mass {branch_mass} is smaller than spread mass {mass}"
        )
    shifted = xs[k] + risk.outcomes
    if k > 0 and shifted[0] < xs[k - 1]:
        raise OrderingViolated("spread reaches below the next lower outcome")
    if k < len(xs) - 1 and shifted[-1] > xs[k + 1]:
        raise OrderingViolated("spread reaches above the next higher outcome")

    pairs = [(x, p) for i, (x, p) in enumerate(base.atoms) if i != k]
    rest = branch_mass - mass
    if rest > 1e-12:
        pairs.append((float(xs[k]), rest))
    pairs.extend(zip(shifted.tolist(), risk.probs.tolist()))
    return build_lottery(pairs)


def _centre(risk: Risk) -> float:
    return risk.mean if isinstance(risk, Lottery) else 0.0


def moments(risk: Risk) -> MomentSet:
    """Mean, variance, maxiance and miniance of a lottery or spread risk.

    Example:
        >>> m = moments(binary_spread(0.1, 1.0))
        >>> round(m.maxiance, 12), round(m.total_mass, 12)
        (0.02, 0.2)
    """
    x = risk.outcomes - _centre(risk)
    p = risk.probs
    F = np.cumsum(p)
    F_prev = np.concatenate(([0.0], F[:-1]))
    pr = F[-1]
    # F_i^2 - F_{i-1}^2 and (Pr - F_{i-1})^2 - (Pr - F_i)^2 without cancellation
    w_max = p * (F + F_prev)
    w_min = p * (2.0 * pr - F - F_prev)
    return MomentSet(
        mean=risk.mean,
        variance=math.fsum((p * x * x).tolist()),
        maxiance=math.fsum((x * w_max).tolist()),
        miniance=math.fsum((x * w_min).tolist()),
        total_mass=risk.total_mass,
    )


def dual_moment(lottery: Lottery, n: int) -> float:
    """Expected best of ``n`` independent draws minus the mean.

    ``n = 1`` gives zero and ``n = 2`` gives the maxiance.
    """
    if not isinstance(lottery, Lottery):
        raise TypeError("dual_moment is defined for full-mass lotteries only")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise BadOrder(f"order must be an integer >= 1, got {n!r}")
    n = int(n)
    x = lottery.outcomes - lottery.mean
    F = np.cumsum(lottery.probs)
    F_prev = np.concatenate(([0.0], F[:-1]))
    return math.fsum((x * (F**n - F_prev**n)).tolist())


def gini(lottery: Lottery) -> float:
    """Gini coefficient, the ratio of maxiance to mean.

    Identical to ``E|A1 - A2| / (2 E[A])`` for independent copies ``A1, A2``.
    """
    m = moments(lottery)
    if abs(m.mean) <= 1e-12:
        raise ZeroMeanGini("the Gini coefficient needs a non-zero mean")
    return m.maxiance / m.mean


def risk_to_json(risk: Risk, **extra) -> str:
    """Serialise as ``{"atoms": [[x, p], ...]}`` plus optional extra keys."""
    return json.dumps({**risk.to_dict(), **extra})


def risk_from_json(text: str, kind: str = "auto") -> Risk:
    """Parse ``{"atoms": [[x, p], ...]}``; extra keys are ignored.

    ``kind`` is ``"lottery"``, ``"spread"`` or ``"auto"``; the latter picks a
    lottery when the mass is one (within ``1e-9``) and a spread risk otherwise.
    """
    data = json.loads(text) if isinstance(text, str) else text
    try:
        pairs = [(float(x), float(p)) for x, p in data["atoms"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParamOutOfRange(f"malformed risk JSON: {exc}") from None
    if kind == "auto":
        total = math.fsum(p for _, p in pairs)
        kind = "lottery" if abs(total - 1.0) <= MASS_TOL else "spread"
    if kind == "lottery":
        return build_lottery(pairs)
    if kind == "spread":
        return build_spread_risk(pairs)
    raise ParamOutOfRange(f"unknown risk kind {kind!r}")
