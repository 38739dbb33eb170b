"""Brute-force and Monte Carlo validators.

Nothing here reuses the analytic code paths of the library: maxiance is
enumerated over pairs of outcomes, sampled by inverse CDF, derivatives are
taken by central differences and indifference equations are solved by a
hand-rolled bisection.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .errors import BadOrder, BadSampleCount, DomainViolation, NoBracket, ParamOutOfRange, ZeroMeanGini
from .preferences import UtilityFunction
from .risk_model import Lottery, SpreadRisk

__all__ = [
    "McEstimate",
    "maxiance_pairs",
    "gini_pairs",
    "maxiance_mc",
    "fd_derivative",
    "indifference_bisect",
]

MIN_SAMPLES = 100
CHUNK = 1 << 16


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    stderr: float
    n_samples: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def _centre(risk: Lottery | SpreadRisk) -> float:
    return 0.0 if isinstance(risk, SpreadRisk) else risk.mean


def maxiance_pairs(risk: Lottery | SpreadRisk) -> float:
    """``sum_i sum_j p_i p_j max(x_i - m, x_j - m)`` by explicit double loop."""
    m = _centre(risk)
    xs = [float(x) - m for x in risk.outcomes]
    ps = [float(p) for p in risk.probs]
    terms = []
    for xi, pi in zip(xs, ps):
        for xj, pj in zip(xs, ps):
            terms.append(pi * pj * max(xi, xj))
    return math.fsum(terms)


def gini_pairs(lottery: Lottery) -> float:
    """Half the mean absolute difference of two copies, over the mean."""
    m = lottery.mean
    if abs(m) <= 1e-12:
        raise ZeroMeanGini("Gini coefficient undefined for zero mean")
    xs, ps = lottery.outcomes.tolist(), lottery.probs.tolist()
    total = math.fsum(pi * pj * abs(xi - xj) for xi, pi in zip(xs, ps) for xj, pj in zip(xs, ps))
    return 0.5 * total / m


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DUALRISK_THREADS", "1")))
    except ValueError:
        return 1


def maxiance_mc(lottery: Lottery, n_samples: int, seed: int) -> McEstimate:
    """Monte Carlo estimate of ``E[max(X1, X2)] - E[X]``.

    Pairs are drawn by inverse CDF. Samples are produced in fixed-size chunks,
    each from its own Philox substream spawned from ``seed``, so the result
    is bit-identical whatever ``DUALRISK_THREADS`` is set to.
    """
    if not isinstance(lottery, Lottery):
        raise TypeError("maxiance_mc requires a full-mass Lottery")
    n_samples = int(n_samples)
    if n_samples < MIN_SAMPLES:
        raise BadSampleCount(f"need at least {MIN_SAMPLES} samples, got {n_samples}")
    seed = int(seed)
    xs = lottery.outcomes
    cdf = np.cumsum(lottery.probs)
    cdf[-1] = 1.0
    sizes = [min(CHUNK, n_samples - s) for s in range(0, n_samples, CHUNK)]
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def draw(k: int) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(streams[k]))
        u = rng.random((2, sizes[k]))
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), xs.size - 1)
        return np.maximum(xs[idx[0]], xs[idx[1]])

    n_threads = min(_threads(), len(sizes))
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            parts = list(pool.map(draw, range(len(sizes))))
    else:
        parts = [draw(k) for k in range(len(sizes))]
    best = np.concatenate(parts)
    return McEstimate(
        estimate=float(best.mean() - lottery.mean),
        stderr=float(best.std(ddof=1) / math.sqrt(n_samples)),
        n_samples=n_samples,
        seed=seed,
    )


def fd_derivative(f: Callable[[float], float], x: float, order: int) -> float:
    """Central finite-difference derivative of order 1, 2 or 3.

    Steps: ``max(1e-6, 1e-6*|x|)`` for order 1, ``max(1e-4, 1e-4*|x|)`` for
    orders 2 and 3. Order 3 uses the five-point stencil.
    """
    if order not in (1, 2, 3):
        raise BadOrder(f"order must be 1, 2 or 3, got {order}")
    x = float(x)
    scale = max(1.0, abs(x))
    h = (1e-6 if order == 1 else 1e-4) * scale

    def ev(t: float) -> float:
        v = float(f(t))
        if not math.isfinite(v):
            raise DomainViolation(f"function not finite at {t!r}")
        return v

    if order == 1:
        return (ev(x + h) - ev(x - h)) / (2 * h)
    if order == 2:
        return (ev(x + h) - 2 * ev(x) + ev(x - h)) / (h * h)
    return (ev(x + 2 * h) - 2 * ev(x + h) + 2 * ev(x - h) - ev(x - 2 * h)) / (2 * h**3)


def indifference_bisect(
    lhs_weight: float,
    rhs_value: float,
    U: UtilityFunction,
    w0: float,
    bracket: tuple[float, float],
    max_iter: int = 200,
) -> float:
    """Solve ``lhs_weight * U(w0 - lam) = rhs_value`` for ``lam`` by bisection."""
    if not lhs_weight > 0:
        raise ParamOutOfRange(f"lhs_weight must be positive, got {lhs_weight}")
    target = rhs_value / lhs_weight

    def g(lam: float) -> float:
        return float(U.value(w0 - lam)) - target

    lo, hi = float(bracket[0]), float(bracket[1])
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise NoBracket(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
