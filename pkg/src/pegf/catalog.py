"""Parametric lifetime families with closed-form past entropy generating functions.

Each family is a frozen dataclass that validates its parameters on
construction, so an invalid parameter set never reaches the numerics.
Module-level functions (``pdf``, ``cdf``, ``reversed_hazard`` ...) take any
family instance and are the public API; the methods they dispatch to work on
numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields
from typing import Callable, ClassVar

import numpy as np
from scipy import integrate, optimize

from .errors import NotIntegrable, OutOfSupport, Unsupported
from .samples import SampleData

__all__ = [
    "Distribution",
    "Uniform",
    "Power",
    "Exponential",
    "GeneralizedPower",
    "LeftExponential",
    "Custom",
    "pdf",
    "cdf",
    "quantile",
    "reversed_hazard",
    "mean_inactivity",
    "closed_form_pegf",
    "sample",
    "parse_spec",
    "format_spec",
    "affine_image",
    "check_past_point",
]


def _scalar_or_array(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


class Distribution:
    """Common interface. Subclasses implement the ``_pdf``/``_cdf`` kernels."""

    family: ClassVar[str] = ""

    @property
    def low(self) -> float:
        raise NotImplementedError

    @property
    def high(self) -> float:
        raise NotImplementedError

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _quantile(self, u: np.ndarray) -> np.ndarray:
        raise Unsupported(f"no closed-form quantile for {self.family}")

    def _pegf(self, s: float, t: float) -> float:
        raise Unsupported(f"no closed-form PEGF for {self.family}")

    def _mean_inactivity(self, t: float) -> float | None:
        return None

    def lower_exponent(self) -> float | None:
        """Exponent alpha with f(x) ~ C (x - low)**alpha near a finite lower end.

        ``None`` means the lower end is infinite or the behaviour is unknown.
        """
        return None

    def params(self) -> dict[str, float]:
        raise NotImplementedError

    def pdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        inside = (x_arr >= self.low) & (x_arr <= self.high)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.where(inside, self._pdf(np.where(inside, x_arr, self._mid())), 0.0)
        return _scalar_or_array(out, x)

    def cdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inner = self._cdf(np.clip(x_arr, self._clip_low(), self._clip_high()))
        out = np.where(x_arr <= self.low, 0.0, np.where(x_arr >= self.high, 1.0, inner))
        return _scalar_or_array(np.clip(out, 0.0, 1.0), x)

    def quantile(self, u):
        u_arr = np.asarray(u, dtype=float)
        if np.any((u_arr < 0) | (u_arr > 1)):
            raise ValueError("quantile levels must lie in [0, 1]")
        with np.errstate(divide="ignore"):
            out = self._quantile(u_arr)
        return _scalar_or_array(out, u)

    def _mid(self) -> float:
        lo, hi = self.low, self.high
        if math.isfinite(lo) and math.isfinite(hi):
            return 0.5 * (lo + hi)
        if math.isfinite(lo):
            return lo + 1.0
        if math.isfinite(hi):
            return hi - 1.0
        return 0.0

    def _clip_low(self) -> float:
        return self.low if math.isfinite(self.low) else -np.inf

    def _clip_high(self) -> float:
        return self.high if math.isfinite(self.high) else np.inf


@dataclass(frozen=True)
class Uniform(Distribution):
    a: float
    b: float
    family: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ValueError(f"uniform needs finite a < b, got a={self.a}, b={self.b}")

    @property
    def low(self):
        return float(self.a)

    @property
    def high(self):
        return float(self.b)

    def params(self):
        return {"a": self.a, "b": self.b}

    def _pdf(self, x):
        return np.full_like(x, 1.0 / (self.b - self.a))

    def _cdf(self, x):
        return (x - self.a) / (self.b - self.a)

    def _quantile(self, u):
        return self.a + (self.b - self.a) * u

    def _pegf(self, s, t):
        return (t - self.a) ** (1.0 - s)

    def _mean_inactivity(self, t):
        return 0.5 * (t - self.a)

    def lower_exponent(self):
        return 0.0


@dataclass(frozen=True)
class Power(Distribution):
    """F(x) = x**c on (0, 1)."""

    c: float
    family: ClassVar[str] = "power"

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError(f"power needs c > 0, got c={self.c}")

    @property
    def low(self):
        return 0.0

    @property
    def high(self):
        return 1.0

    def params(self):
        return {"c": self.c}

    def _pdf(self, x):
        return self.c * x ** (self.c - 1.0)

    def _cdf(self, x):
        return x**self.c

    def _quantile(self, u):
        return u ** (1.0 / self.c)

    def _pegf(self, s, t):
        denom = s * (self.c - 1.0) + 1.0
        if denom <= 0:
            raise NotIntegrable(f"power(c={self.c}) density is not {s}-integrable at 0")
        return self.c**s * t ** (1.0 - s) / denom

    def _mean_inactivity(self, t):
        return t / (self.c + 1.0)

    def lower_exponent(self):
        return self.c - 1.0


@dataclass(frozen=True)
class Exponential(Distribution):
    mu: float
    family: ClassVar[str] = "exponential"

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"exponential needs mu > 0, got mu={self.mu}")

    @property
    def low(self):
        return 0.0

    @property
    def high(self):
        return math.inf

    def params(self):
        return {"mu": self.mu}

    def _pdf(self, x):
        return np.exp(-x / self.mu) / self.mu

    def _cdf(self, x):
        return -np.expm1(-x / self.mu)

    def _quantile(self, u):
        return -self.mu * np.log1p(-u)

    def _pegf(self, s, t):
        mu = self.mu
        num = -math.expm1(-s * t / mu)
        return mu ** (1.0 - s) * num / (s * (-math.expm1(-t / mu)) ** s)

    def _mean_inactivity(self, t):
        big_f = -math.expm1(-t / self.mu)
        return (t - self.mu * big_f) / big_f

    def lower_exponent(self):
        return 0.0


@dataclass(frozen=True)
class GeneralizedPower(Distribution):
    """F(x) = ((c x + d) / (c b + d)) ** ((1 - c) / c) on (-d/c, b)."""

    c: float
    d: float
    b: float
    family: ClassVar[str] = "genpower"

    def __post_init__(self):
        if not (0.0 < self.c < 1.0):
            raise ValueError(f"genpower needs 0 < c < 1, got c={self.c}")
        if not (math.isfinite(self.d) and math.isfinite(self.b)):
            raise ValueError("genpower needs finite d and b")
        if not self.c * self.b + self.d > 0:
            raise ValueError(f"genpower needs c*b + d > 0, got {self.c * self.b + self.d}")

    @property
    def low(self):
        return -self.d / self.c

    @property
    def high(self):
        return float(self.b)

    @property
    def shape(self) -> float:
        return (1.0 - self.c) / self.c

    def params(self):
        return {"c": self.c, "d": self.d, "b": self.b}

    def _pdf(self, x):
        scale = self.c * self.b + self.d
        return (1.0 - self.c) * np.maximum(self.c * x + self.d, 0.0) ** (self.shape - 1.0) / scale**self.shape

    def _cdf(self, x):
        scale = self.c * self.b + self.d
        return (np.maximum(self.c * x + self.d, 0.0) / scale) ** self.shape

    def _quantile(self, u):
        scale = self.c * self.b + self.d
        return (scale * u ** (1.0 / self.shape) - self.d) / self.c

    def _pegf(self, s, t):
        denom = s * (1.0 - 2.0 * self.c) + self.c
        if denom <= 0:
            raise NotIntegrable(f"genpower(c={self.c}) density is not {s}-integrable at its lower end")
        return (1.0 - self.c) ** s * (self.c * t + self.d) ** (1.0 - s) / denom

    def _mean_inactivity(self, t):
        return self.c * t + self.d

    def lower_exponent(self):
        return self.shape - 1.0


@dataclass(frozen=True)
class LeftExponential(Distribution):
    """F(x) = exp(a (x - b)) on (-inf, b]; constant reversed hazard a."""

    a: float
    b: float
    family: ClassVar[str] = "leftexp"

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"leftexp needs a > 0, got a={self.a}")
        if not math.isfinite(self.b):
            raise ValueError("leftexp needs finite b")

    @property
    def low(self):
        return -math.inf

    @property
    def high(self):
        return float(self.b)

    def params(self):
        return {"a": self.a, "b": self.b}

    def _pdf(self, x):
        return self.a * np.exp(self.a * (x - self.b))

    def _cdf(self, x):
        return np.exp(self.a * (x - self.b))

    def _quantile(self, u):
        return self.b + np.log(u) / self.a

    def _pegf(self, s, t):
        return self.a ** (s - 1.0) / s

    def _mean_inactivity(self, t):
        return 1.0 / self.a


def _anchor_points(low: float, high: float) -> np.ndarray:
    if math.isfinite(low) and math.isfinite(high):
        inner = np.linspace(low, high, 33)[1:-1]
    elif math.isfinite(low):
        inner = low + 2.0 ** np.arange(-4, 7)
    elif math.isfinite(high):
        inner = high - 2.0 ** np.arange(6, -5, -1)
    else:
        pos = 2.0 ** np.arange(-4, 7)
        inner = np.concatenate([-pos[::-1], [0.0], pos])
    return np.concatenate([[low], inner, [high]])


@dataclass(frozen=True)
class Custom(Distribution):
    """User-supplied density on ``(low, high)``; either end may be infinite.

    The CDF is built by adaptive quadrature between fixed anchor points; the
    cumulative masses at the anchors are computed once at construction.
    """

    density: Callable[[float], float]
    support: tuple[float, float]
    name: str = "custom"
    family: ClassVar[str] = "custom"
    _anchors: np.ndarray = field(init=False, repr=False, compare=False)
    _masses: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        low, high = (float(v) for v in self.support)
        object.__setattr__(self, "support", (low, high))
        if not low < high:
            raise ValueError(f"custom support needs low < high, got ({low}, {high})")
        if math.isinf(low) and low > 0 or math.isinf(high) and high < 0:
            raise ValueError("custom support endpoints are reversed infinities")
        anchors = _anchor_points(low, high)
        pieces = [0.0]
        for lo, hi in zip(anchors[:-1], anchors[1:]):
            val, _ = integrate.quad(self.density, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
            if val < -1e-12:
                raise ValueError("custom density integrates to a negative mass")
            pieces.append(max(val, 0.0))
        masses = np.cumsum(pieces)
        if abs(masses[-1] - 1.0) > 1e-6:
            raise ValueError(f"custom density must integrate to 1, got {masses[-1]!r}")
        masses = masses / masses[-1]
        probe = anchors[1:-1]
        if np.any(np.array([self.density(float(x)) for x in probe]) < 0):
            raise ValueError("custom density must be nonnegative")
        anchors.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "_anchors", anchors)
        object.__setattr__(self, "_masses", masses)

    @property
    def low(self):
        return self.support[0]

    @property
    def high(self):
        return self.support[1]

    def params(self):
        return {"low": self.low, "high": self.high}

    def _pdf(self, x):
        flat = np.array([self.density(float(v)) for v in np.ravel(x)], dtype=float)
        return flat.reshape(np.shape(x))

    def _cdf_scalar(self, x: float) -> float:
        k = int(np.searchsorted(self._anchors, x, side="right")) - 1
        k = min(max(k, 0), len(self._anchors) - 2)
        start = self._anchors[k]
        if x == start:
            return float(self._masses[k])
        extra, _ = integrate.quad(self.density, start, x, epsabs=1e-14, epsrel=1e-12, limit=200)
        return float(min(max(self._masses[k] + extra, 0.0), 1.0))

    def _cdf(self, x):
        flat = np.array([self._cdf_scalar(float(v)) for v in np.ravel(x)], dtype=float)
        return flat.reshape(np.shape(x))

    def _quantile(self, u):
        def one(level: float) -> float:
            if level <= 0:
                return self.low
            if level >= 1:
                return self.high
            k = int(np.searchsorted(self._masses, level, side="left"))
            lo, hi = self._anchors[max(k - 1, 0)], self._anchors[min(k, len(self._anchors) - 1)]
            if math.isinf(lo):
                lo = hi - 1.0
                while self._cdf_scalar(lo) > level:
                    lo = hi - 2.0 * (hi - lo)
            if math.isinf(hi):
                hi = lo + 1.0
                while self._cdf_scalar(hi) < level:
                    hi = lo + 2.0 * (hi - lo)
            return optimize.brentq(lambda x: self._cdf_scalar(x) - level, lo, hi, xtol=1e-14, rtol=1e-14)

        flat = np.array([one(float(v)) for v in np.ravel(u)], dtype=float)
        return flat.reshape(np.shape(u))

    def _mean_inactivity(self, t):
        lower = self.low
        val, _ = integrate.quad(lambda x: self._cdf_scalar(x), lower, t, epsabs=1e-12, epsrel=1e-10, limit=200)
        return val / self._cdf_scalar(t)


_FAMILIES: dict[str, type[Distribution]] = {
    cls.family: cls for cls in (Uniform, Power, Exponential, GeneralizedPower, LeftExponential)
}


def pdf(spec: Distribution, x):
    """Density at ``x``; zero outside the support."""
    return spec.pdf(x)


def cdf(spec: Distribution, x):
    """Distribution function, clamped to 0 below and 1 above the support."""
    return spec.cdf(x)


def quantile(spec: Distribution, u):
    return spec.quantile(u)


def check_past_point(spec: Distribution, t: float) -> float:
    """Return F(t) if ``t`` is a valid inspection time, else raise ``OutOfSupport``.

    Valid means low < t <= high with F(t) > 0; the upper endpoint itself is
    allowed because the past lifetime at t = high is the whole distribution.
    """
    t = float(t)
    if not math.isfinite(t) or not (spec.low < t <= spec.high):
        raise OutOfSupport(f"t={t!r} outside support ({spec.low}, {spec.high}] of {format_spec(spec, strict=False)}")
    big_f = float(spec.cdf(t))
    if big_f <= 0.0:
        raise OutOfSupport(f"F(t)=0 at t={t!r}")
    return big_f


def reversed_hazard(spec: Distribution, t: float) -> float:
    """Reversed hazard rate f(t) / F(t)."""
    big_f = check_past_point(spec, t)
    return float(spec.pdf(float(t))) / big_f


def mean_inactivity(spec: Distribution, t: float) -> float:
    """Mean inactivity time E(t - X | X <= t)."""
    big_f = check_past_point(spec, t)
    closed = spec._mean_inactivity(float(t))
    if closed is not None:
        return float(closed)
    val, _ = integrate.quad(lambda x: float(spec.cdf(x)), spec.low, float(t), epsabs=1e-12, epsrel=1e-10, limit=200)
    return val / big_f


def closed_form_pegf(spec: Distribution, s: float, t: float) -> float:
    """Exact past entropy generating function of order ``s`` at ``t``.

    Raises
    ------
    Unsupported
        For ``Custom`` densities.
    NotIntegrable
        When f**s diverges non-integrably at the lower endpoint.
    OutOfSupport
        When ``t`` is not an inspection time of ``spec``.
    """
    s = float(getattr(s, "value", s))
    if not s >= 1.0:
        raise ValueError(f"order s must be >= 1, got {s}")
    if isinstance(spec, Custom):
        raise Unsupported("closed-form PEGF is not available for custom densities")
    check_past_point(spec, t)
    return float(spec._pegf(s, float(t)))


def _uniform_stream(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    # strictly inside (0, 1) so every quantile is finite
    return (rng.integers(0, 2**53, size=n, dtype=np.int64) + 0.5) / 2.0**53


def sample(spec: Distribution, n: int, seed: int) -> SampleData:
    """``n`` sorted inverse-CDF draws; identical for identical ``seed``."""
    if isinstance(spec, Custom):
        raise Unsupported("sampling needs a closed-form quantile; custom densities have none")
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    values = spec.quantile(_uniform_stream(n, seed))
    return SampleData(values, origin=f"{format_spec(spec)} n={n} seed={int(seed)}")


_SPEC_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*\((.*)\)\s*$")


def parse_spec(text: str) -> Distribution:
    """Parse ``family(p1=...,p2=...)`` such as ``genpower(c=0.25,d=0,b=1)``."""
    m = _SPEC_RE.match(text)
    if m is None:
        raise ValueError(f"cannot parse distribution {text!r}; expected family(p=v,...)")
    name, body = m.group(1).lower(), m.group(2)
    cls = _FAMILIES.get(name)
    if cls is None:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(_FAMILIES)}")
    params: dict[str, float] = {}
    for item in filter(None, (p.strip() for p in body.split(","))):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ValueError(f"malformed parameter {item!r} in {text!r}")
        if key in params:
            raise ValueError(f"duplicate parameter {key!r}")
        params[key] = float(val)
    expected = [f.name for f in fields(cls)]
    if sorted(params) != sorted(expected):
        raise ValueError(f"{name} takes parameters {expected}, got {sorted(params)}")
    return cls(**params)


def format_spec(spec: Distribution, strict: bool = True) -> str:
    if isinstance(spec, Custom):
        if strict:
            raise Unsupported("custom densities have no text form")
        return f"custom[{spec.name}]({spec.low!r},{spec.high!r})"
    body = ",".join(f"{k}={float(v)!r}" for k, v in spec.params().items())
    return f"{spec.family}({body})"


def affine_image(spec: Distribution, a: float, b: float) -> Distribution:
    """Distribution of ``a X + b`` (a > 0), staying in the catalog when possible."""
    if not a > 0:
        raise ValueError("scale a must be positive")
    if isinstance(spec, Uniform):
        return Uniform(a * spec.a + b, a * spec.b + b)
    if isinstance(spec, Power):
        c = 1.0 / (spec.c + 1.0)
        return GeneralizedPower(c, -c * b, a + b)
    if isinstance(spec, GeneralizedPower):
        return GeneralizedPower(spec.c, a * spec.d - spec.c * b, a * spec.b + b)
    if isinstance(spec, LeftExponential):
        return LeftExponential(spec.a / a, a * spec.b + b)
    base = spec
    return Custom(
        lambda z: float(base.pdf((z - b) / a)) / a,
        (a * base.low + b, a * base.high + b),
        name=f"{a!r}*X+{b!r}",
    )
