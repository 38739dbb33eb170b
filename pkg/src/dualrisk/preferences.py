"""Utility and probability weighting families with analytic derivatives.

Each family exposes ``value``, ``d1``, ``d2`` and ``local_index`` (the
Arrow-Pratt style ratio ``-f''/f'``). All methods accept scalars or numpy
arrays and return the same shape.

Weighting functions always distort *cumulative* probabilities. Use
:func:`decumulative_transform` to move to the decumulative convention.
Prelec and Tversky-Kahneman derivatives are singular at the endpoints, so
derivative evaluations for those families clamp ``p`` into
``[1e-9, 1 - 1e-9]``; values at exactly 0 and 1 are returned exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DomainViolation, ParamOutOfRange, RangeViolation

__all__ = [
    "UtilityFunction",
    "LinearUtility",
    "PowerUtility",
    "ExponentialUtility",
    "QuadraticUtility",
    "WeightingFunction",
    "IdentityWeighting",
    "PowerWeighting",
    "QuadraticWeighting",
    "PrelecWeighting",
    "TKWeighting",
    "DecumulativeWeighting",
    "utility_eval",
    "weighting_eval",
    "invert_utility",
    "decumulative_transform",
    "parse_utility",
    "parse_weighting",
]

CLAMP = 1e-9


def _ret(x: np.ndarray, like):
    return float(x) if np.ndim(like) == 0 else x


# ---------------------------------------------------------------------------
# utilities
# ---------------------------------------------------------------------------


class UtilityFunction:
    """Increasing, twice differentiable utility of wealth.

    Subclasses implement ``_v``, ``_d1``, ``_d2`` on validated arrays and may
    override :meth:`inverse`. ``domain`` is the open interval on which the
    function is defined and increasing.
    """

    domain: tuple[float, float] = (-math.inf, math.inf)

    def _check(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        lo, hi = self.domain
        if np.any(~np.isfinite(w)) or np.any(w <= lo) or np.any(w >= hi):
            raise DomainViolation(f"{self.spec}: wealth outside ({lo}, {hi})")
        return w

    def value(self, w):
        return _ret(self._v(self._check(w)), w)

    def d1(self, w):
        return _ret(self._d1(self._check(w)), w)

    def d2(self, w):
        return _ret(self._d2(self._check(w)), w)

    def local_index(self, w):
        """Absolute risk aversion ``-U''/U'``."""
        w = self._check(w)
        return _ret(-self._d2(w) / self._d1(w), w)

    def inverse(self, v):
        raise NotImplementedError

    @property
    def is_concave(self) -> bool:
        return False

    @property
    def spec(self) -> str:
        raise NotImplementedError

    def __call__(self, w):
        return self.value(w)


@dataclass(frozen=True)
class LinearUtility(UtilityFunction):
    def _v(self, w):
        return w

    def _d1(self, w):
        return np.ones_like(w)

    def _d2(self, w):
        return np.zeros_like(w)

    def inverse(self, v):
        v = np.asarray(v, dtype=float)
        return _ret(v.copy(), v)

    @property
    def spec(self) -> str:
        return "linear"


@dataclass(frozen=True)
class PowerUtility(UtilityFunction):
    """``U(w) = w**gamma`` on ``w > 0`` with ``0 < gamma <= 1``."""

    gamma: float
    domain = (0.0, math.inf)

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ParamOutOfRange(f"power utility needs 0 < gamma <= 1, got {self.gamma}")

    def _v(self, w):
        return w**self.gamma

    def _d1(self, w):
        return self.gamma * w ** (self.gamma - 1.0)

    def _d2(self, w):
        g = self.gamma
        return g * (g - 1.0) * w ** (g - 2.0)

    def local_index(self, w):
        w = self._check(w)
        return _ret((1.0 - self.gamma) / w, w)

    def inverse(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v <= 0.0):
            raise RangeViolation(f"{self.spec}: utility level must be positive")
        return _ret(v ** (1.0 / self.gamma), v)

    @property
    def is_concave(self) -> bool:
        return self.gamma < 1.0

    @property
    def spec(self) -> str:
        return f"power:{self.gamma!r}"


@dataclass(frozen=True)
class ExponentialUtility(UtilityFunction):
    """CARA utility ``U(w) = -exp(-a w) / a`` with constant index ``a``."""

    a: float

    def __post_init__(self):
        if self.a == 0.0 or not math.isfinite(self.a):
            raise ParamOutOfRange("exponential utility needs a finite a != 0; use linear")

    def _v(self, w):
        return -np.exp(-self.a * w) / self.a

    def _d1(self, w):
        return np.exp(-self.a * w)

    def _d2(self, w):
        return -self.a * np.exp(-self.a * w)

    def local_index(self, w):
        w = self._check(w)
        return _ret(np.full_like(w, self.a), w)

    def inverse(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(-self.a * v <= 0.0):
            raise RangeViolation(f"{self.spec}: utility level outside the range")
        return _ret(-np.log(-self.a * v) / self.a, v)

    @property
    def is_concave(self) -> bool:
        return self.a > 0.0

    @property
    def spec(self) -> str:
        return f"exp:{self.a!r}"


@dataclass(frozen=True)
class QuadraticUtility(UtilityFunction):
    """``U(w) = w - b w**2``, increasing for ``w < 1/(2b)``."""

    b: float

    def __post_init__(self):
        if not self.b > 0.0:
            raise ParamOutOfRange(f"quadratic utility needs b > 0, got {self.b}")

    @property
    def domain(self):
        return (-math.inf, 1.0 / (2.0 * self.b))

    def _v(self, w):
        return w - self.b * w * w

    def _d1(self, w):
        return 1.0 - 2.0 * self.b * w

    def _d2(self, w):
        return np.full_like(w, -2.0 * self.b)

    def inverse(self, v):
        v = np.asarray(v, dtype=float)
        disc = 1.0 - 4.0 * self.b * v
        if np.any(disc <= 0.0):
            raise RangeViolation(f"{self.spec}: utility level above the bliss point")
        # root of b w^2 - w + v = 0 on the increasing branch, cancellation-free
        return _ret(2.0 * v / (1.0 + np.sqrt(disc)), v)

    @property
    def is_concave(self) -> bool:
        return True

    @property
    def spec(self) -> str:
        return f"quad:{self.b!r}"


def utility_eval(U: UtilityFunction, w):
    """Return ``(U(w), U'(w), U''(w), -U''(w)/U'(w))``."""
    return U.value(w), U.d1(w), U.d2(w), U.local_index(w)


def invert_utility(U: UtilityFunction, v: float, bracket: tuple[float, float] | None = None) -> float:
    """Wealth level ``w`` with ``U(w) = v``.

    Closed forms are used for the built-in families. For other subclasses a
    ``bracket`` must be supplied and the root is found by bisection.
    """
    try:
        return U.inverse(v)
    except NotImplementedError:
        pass
    if bracket is None:
        raise RangeViolation(f"{type(U).__name__} has no closed-form inverse; pass a bracket")
    lo, hi = bracket
    f_lo, f_hi = U.value(lo) - v, U.value(hi) - v
    if f_lo * f_hi > 0.0:
        raise RangeViolation(f"utility level {v} is outside U({lo}), U({hi})")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = U.value(mid) - v
        if f_mid == 0.0 or hi - lo <= 1e-15 * max(1.0, abs(mid)):
            break
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# probability weighting
# ---------------------------------------------------------------------------


class WeightingFunction:
    """Increasing distortion ``h`` of cumulative probabilities, ``h(0)=0, h(1)=1``.

    Subclasses implement ``_v``, ``_d1``, ``_d2`` on arrays. Families with
    endpoint singularities set ``clamp_low``/``clamp_high`` and their
    derivatives are evaluated at the clamped point.
    """

    clamp_low: bool = False
    clamp_high: bool = False

    def _validate(self):
        grid = np.linspace(0.0, 1.0, 1002)[1:-1]
        d1 = self.d1(grid)
        if not np.all(np.isfinite(d1)) or np.any(d1 <= 0.0):
            raise ParamOutOfRange(f"{self.spec} is not increasing on (0, 1)")

    @staticmethod
    def _check(p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
            raise DomainViolation("probability outside [0, 1]")
        return p

    def _clamped(self, p) -> np.ndarray:
        p = self._check(p)
        lo = CLAMP if self.clamp_low else 0.0
        hi = 1.0 - CLAMP if self.clamp_high else 1.0
        return np.clip(p, lo, hi)

    def value(self, p):
        p = self._check(p)
        return _ret(self._v(p), p)

    def d1(self, p):
        q = self._clamped(p)
        return _ret(self._d1(q), q)

    def d2(self, p):
        q = self._clamped(p)
        return _ret(self._d2(q), q)

    def local_index(self, p):
        """Probability-plane risk aversion ``-h''/h'``."""
        q = self._clamped(p)
        return _ret(-self._d2(q) / self._d1(q), q)

    def step(self, p, d):
        """Increment ``h(p + d) - h(p)``, with ``p + d`` clipped to ``[0, 1]``.

        Families override ``_step`` with forms that avoid the cancellation of
        subtracting two nearby values, which matters for small ``d``.
        """
        p = self._check(p)
        d = np.clip(np.asarray(d, dtype=float), -p, 1.0 - p)
        p, d = np.broadcast_arrays(p, d)
        shape = p.shape
        out = self._step(np.atleast_1d(p).astype(float), np.atleast_1d(d).astype(float))
        return _ret(out.reshape(shape), p)

    def _step(self, p, d):
        return self._v(np.clip(p + d, 0.0, 1.0)) - self._v(p)

    def inverse(self, u):
        """Probability ``p`` with ``h(p) = u`` (root finding unless overridden)."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise RangeViolation("weight outside [0, 1]")

        def one(t):
            if t in (0.0, 1.0):
                return t
            return brentq(lambda p: float(self._v(np.asarray(p))) - t, 0.0, 1.0, xtol=1e-16)

        out = np.vectorize(one, otypes=[float])(u)
        return _ret(out, u)

    @property
    def spec(self) -> str:
        raise NotImplementedError

    def __call__(self, p):
        return self.value(p)


@dataclass(frozen=True)
class IdentityWeighting(WeightingFunction):
    def _v(self, p):
        return p.copy()

    def _d1(self, p):
        return np.ones_like(p)

    def _d2(self, p):
        return np.zeros_like(p)

    def _step(self, p, d):
        return d.copy()

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        return _ret(u.copy(), u)

    @property
    def spec(self) -> str:
        return "identity"


@dataclass(frozen=True)
class PowerWeighting(WeightingFunction):
    """``h(p) = p**k``; convex for ``k > 1`` and concave for ``k < 1``."""

    k: float

    def __post_init__(self):
        if not self.k > 0.0 or not math.isfinite(self.k):
            raise ParamOutOfRange(f"power weighting needs k > 0, got {self.k}")
        self._validate()

    @property
    def clamp_low(self) -> bool:
        return self.k < 2.0

    def _v(self, p):
        return p**self.k

    def _d1(self, p):
        return self.k * p ** (self.k - 1.0)

    def _d2(self, p):
        return self.k * (self.k - 1.0) * p ** (self.k - 2.0)

    def _step(self, p, d):
        out = np.empty_like(p)
        pos = p > 0.0
        pp, dd = p[pos], d[pos]
        with np.errstate(divide="ignore"):
            out[pos] = pp**self.k * np.expm1(self.k * np.log1p(dd / pp))
        out[~pos] = d[~pos] ** self.k
        return out

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise RangeViolation("weight outside [0, 1]")
        return _ret(u ** (1.0 / self.k), u)

    @property
    def spec(self) -> str:
        return f"pow:{self.k!r}"


@dataclass(frozen=True)
class QuadraticWeighting(WeightingFunction):
    """``h(p) = p + c p (1 - p)`` with ``|c| <= 1``; concave for ``c > 0``."""

    c: float

    def __post_init__(self):
        if not abs(self.c) <= 1.0:
            raise ParamOutOfRange(f"quadratic weighting needs |c| <= 1, got {self.c}")
        self._validate()

    def _v(self, p):
        return p + self.c * p * (1.0 - p)

    def _d1(self, p):
        return 1.0 + self.c * (1.0 - 2.0 * p)

    def _d2(self, p):
        return np.full_like(p, -2.0 * self.c)

    def _step(self, p, d):
        return d * (1.0 + self.c * (1.0 - 2.0 * p - d))

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise RangeViolation("weight outside [0, 1]")
        b = 1.0 + self.c
        # root of c p^2 - (1 + c) p + u = 0 in [0, 1]
        return _ret(2.0 * u / (b + np.sqrt(b * b - 4.0 * self.c * u)), u)

    @property
    def spec(self) -> str:
        return f"quad:{self.c!r}"


@dataclass(frozen=True)
class PrelecWeighting(WeightingFunction):
    """Prelec's function in the cumulative convention.

    ``h(p) = 1 - exp(-(-log(1 - p))**alpha)`` for ``0 < alpha < 1``. It is
    inverse-S shaped with its inflection and fixed point at ``1 - 1/e``.
    """

    alpha: float
    clamp_low = True
    clamp_high = True

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParamOutOfRange(f"Prelec weighting needs 0 < alpha < 1, got {self.alpha}")
        self._validate()

    def _v(self, p):
        out = np.empty_like(p)
        inner = (p > 0.0) & (p < 1.0)
        L = -np.log1p(-p[inner])
        out[inner] = -np.expm1(-(L**self.alpha))
        out[p <= 0.0] = 0.0
        out[p >= 1.0] = 1.0
        return out

    def _d1(self, p):
        a = self.alpha
        L = -np.log1p(-p)
        return a * L ** (a - 1.0) * np.exp(-(L**a)) / (1.0 - p)

    def _step(self, p, d):
        # h(p+d) - h(p) = exp(-L1**a) * -expm1(L1**a - L2**a), L2 - L1 = -log1p(-d / (1 - p))
        a = self.alpha
        out = self._v(np.clip(p + d, 0.0, 1.0)) - self._v(p)
        ok = (p > 0.0) & (p < 1.0) & (p + d > 0.0) & (p + d < 1.0)
        pp, dd = p[ok], d[ok]
        L1 = -np.log1p(-pp)
        gap = -np.log1p(-dd / (1.0 - pp))
        La = L1**a
        out[ok] = np.exp(-La) * -np.expm1(-La * np.expm1(a * np.log1p(gap / L1)))
        return out

    def _index(self, p):
        a = self.alpha
        L = -np.log1p(-p)
        return ((1.0 - a) / L + a * L ** (a - 1.0) - 1.0) / (1.0 - p)

    def _d2(self, p):
        return -self._index(p) * self._d1(p)

    def local_index(self, p):
        q = self._clamped(p)
        return _ret(self._index(q), q)

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise RangeViolation("weight outside [0, 1]")
        with np.errstate(divide="ignore"):
            L = (-np.log1p(-u)) ** (1.0 / self.alpha)
        return _ret(-np.expm1(-L), u)

    @property
    def spec(self) -> str:
        return f"prelec:{self.alpha!r}"


@dataclass(frozen=True)
class TKWeighting(WeightingFunction):
    """Tversky-Kahneman function in the cumulative convention.

    ``h(p) = 1 - w(1 - p)`` with ``w(q) = q**b / (q**b + (1-q)**b)**(1/b)``.
    ``beta`` is restricted to ``[0.28, 1]``; below roughly 0.279 the
    function stops being monotone. ``beta = 1`` is the identity.
    """

    beta: float
    clamp_low = True
    clamp_high = True

    def __post_init__(self):
        if not 0.28 <= self.beta <= 1.0:
            raise ParamOutOfRange(f"TK weighting needs 0.28 <= beta <= 1, got {self.beta}")
        self._validate()

    def _w_parts(self, p):
        b = self.beta
        q = 1.0 - p
        S = q**b + p**b
        w = q**b * S ** (-1.0 / b)
        T = q ** (b - 1.0) - p ** (b - 1.0)
        A = b / q - T / S
        T1 = (b - 1.0) * (q ** (b - 2.0) + p ** (b - 2.0))
        A1 = -b / q**2 - (T1 * S - b * T * T) / S**2
        return w, A, A1

    def _v(self, p):
        b = self.beta
        q = 1.0 - p
        return 1.0 - q**b / (q**b + p**b) ** (1.0 / b)

    def _step(self, p, d):
        # h(p+d) - h(p) = w(q) - w(q-d) with w = exp(g), g = b log q - log(S)/b
        b = self.beta
        out = self._v(np.clip(p + d, 0.0, 1.0)) - self._v(p)
        ok = (p > 0.0) & (p < 1.0) & (p + d > 0.0) & (p + d < 1.0)
        pp, dd = p[ok], d[ok]
        q = 1.0 - pp
        gq = np.expm1(b * np.log1p(-dd / q))
        gp = np.expm1(b * np.log1p(dd / pp))
        S = q**b + pp**b
        dg = b * np.log1p(-dd / q) - np.log1p((q**b * gq + pp**b * gp) / S) / b
        out[ok] = -(q**b * S ** (-1.0 / b)) * np.expm1(dg)
        return out

    def _d1(self, p):
        w, A, _ = self._w_parts(p)
        return w * A

    def _d2(self, p):
        w, A, A1 = self._w_parts(p)
        return -w * (A * A + A1)

    def local_index(self, p):
        q = self._clamped(p)
        _, A, A1 = self._w_parts(q)
        return _ret((A * A + A1) / A, q)

    @property
    def spec(self) -> str:
        return f"tk:{self.beta!r}"


@dataclass(frozen=True)
class DecumulativeWeighting(WeightingFunction):
    """``hbar(p) = 1 - h(1 - p)`` for a cumulative-convention ``h``."""

    base: WeightingFunction

    @property
    def clamp_low(self) -> bool:
        return self.base.clamp_high

    @property
    def clamp_high(self) -> bool:
        return self.base.clamp_low

    def _v(self, p):
        return 1.0 - self.base._v(1.0 - p)

    def _d1(self, p):
        return self.base._d1(1.0 - p)

    def _d2(self, p):
        return -self.base._d2(1.0 - p)

    def _step(self, p, d):
        return -self.base._step(1.0 - p, -d)

    @property
    def spec(self) -> str:
        return f"decumulative({self.base.spec})"


def weighting_eval(h: WeightingFunction, p):
    """Return ``(h(p), h'(p), h''(p), -h''(p)/h'(p))``."""
    return h.value(p), h.d1(p), h.d2(p), h.local_index(p)


def decumulative_transform(h: WeightingFunction) -> WeightingFunction:
    """Map ``h`` to ``p -> 1 - h(1 - p)``. The map is an involution."""
    if isinstance(h, IdentityWeighting):
        return h
    if isinstance(h, DecumulativeWeighting):
        return h.base
    return DecumulativeWeighting(h)


# ---------------------------------------------------------------------------
# textual specs, e.g. "power:0.5" or "prelec:0.65"
# ---------------------------------------------------------------------------

_UTILITIES: dict[str, Callable[..., UtilityFunction]] = {
    "linear": LinearUtility,
    "power": PowerUtility,
    "pow": PowerUtility,
    "exp": ExponentialUtility,
    "exponential": ExponentialUtility,
    "quad": QuadraticUtility,
    "quadratic": QuadraticUtility,
}

_WEIGHTINGS: dict[str, Callable[..., WeightingFunction]] = {
    "identity": IdentityWeighting,
    "pow": PowerWeighting,
    "power": PowerWeighting,
    "quad": QuadraticWeighting,
    "quadratic": QuadraticWeighting,
    "prelec": PrelecWeighting,
    "tk": TKWeighting,
}


def _parse(text: str, table: dict, what: str):
    name, _, arg = text.strip().partition(":")
    name = name.strip().lower()
    if name not in table:
        raise ParamOutOfRange(f"unknown {what} family {name!r}")
    factory = table[name]
    nullary = name in ("linear", "identity")
    if nullary:
        if arg:
            raise ParamOutOfRange(f"{name} takes no parameter")
        return factory()
    if not arg:
        raise ParamOutOfRange(f"{what} family {name!r} needs a parameter, e.g. {name}:0.5")
    try:
        value = float(arg)
    except ValueError:
        raise ParamOutOfRange(f"bad {what} parameter {arg!r}") from None
    return factory(value)


def parse_utility(text: str) -> UtilityFunction:
    """Parse ``linear``, ``power:g``, ``exp:a`` or ``quad:b``."""
    return _parse(text, _UTILITIES, "utility")


def parse_weighting(text: str) -> WeightingFunction:
    """Parse ``identity``, ``pow:k``, ``quad:c``, ``prelec:alpha`` or ``tk:beta``."""
    return _parse(text, _WEIGHTINGS, "weighting")
