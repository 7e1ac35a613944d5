"""Recover a distribution from a tabulated past entropy generating function.

Differentiating B_s(F; t) in t gives, pointwise,

    g(lam) = lam**s - s * B_s * lam - B_s' = 0,

so every grid point yields the reversed hazard rate ``lam`` as a positive
root of ``g``. ``g`` is convex on lam > 0 with its minimum at
``lam* = B_s ** (1 / (s - 1))``; when ``B_s' < 0`` there are two positive
roots and the data alone do not say which one is the reversed hazard.
Branches are therefore tracked along the grid starting from a configurable
seed. The CDF follows from log F(t) = -integral of lam from t to the upper
support end, where F = 1.
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .catalog import LeftExponential
from .egf_core import EgfCurve
from .errors import ConvergenceFailure, GridTooCoarse, NoPositiveRoot

__all__ = [
    "RootSolveConfig",
    "ReconstructionResult",
    "solve_lambda",
    "lambda_roots",
    "reconstruct_cdf",
    "detect_constant_pegf",
    "parse_branch",
    "parse_reconstruction",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RootSolveConfig:
    """Settings for the pointwise reversed-hazard solve.

    ``init_branch`` is ``"larger"``, ``"smaller"`` or a float hint (the root
    nearest the hint wins). ``tangent_tol`` decides when ``g`` merely touches
    zero: if ``|min g| <= tangent_tol * max(1, |B_s'|)`` the minimiser is
    accepted as a double root.
    """

    tol: float = 1e-13
    max_iter: int = 200
    init_branch: str | float = "larger"
    tangent_tol: float = 1e-6

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tangent_tol >= 0:
            raise ValueError("tangent_tol must be nonnegative")
        branch = self.init_branch
        if isinstance(branch, str):
            if branch not in ("larger", "smaller"):
                raise ValueError(f"init_branch must be 'larger', 'smaller' or a number, got {branch!r}")
        elif not (math.isfinite(float(branch)) and float(branch) > 0):
            raise ValueError("a branch hint must be a positive number")


def parse_branch(text: str) -> str | float:
    """CLI form: ``larger``, ``smaller`` or ``hint=V``."""
    text = text.strip()
    if text in ("larger", "smaller"):
        return text
    if text.startswith("hint="):
        return float(text[5:])
    raise ValueError(f"branch must be larger, smaller or hint=V, got {text!r}")


def _g(lam: float, bs: float, bs_prime: float, s: float) -> float:
    return lam**s - s * bs * lam - bs_prime


def _safeguarded_newton(bs, bs_prime, s, lo, hi, cfg: RootSolveConfig, start: float | None = None) -> float:
    """Newton iteration kept inside a sign-change bracket, bisecting on bad steps."""
    g_lo = _g(lo, bs, bs_prime, s)
    if g_lo == 0.0:
        return lo
    x = 0.5 * (lo + hi) if start is None else start
    for _ in range(cfg.max_iter):
        gx = _g(x, bs, bs_prime, s)
        if gx == 0.0:
            return x
        if (gx > 0) == (g_lo > 0):
            lo, g_lo = x, gx
        else:
            hi = x
        slope = s * (x ** (s - 1.0) - bs)
        step_ok = slope != 0.0
        if step_ok:
            nxt = x - gx / slope
            step_ok = lo < nxt < hi
        if not step_ok:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) <= cfg.tol * max(abs(nxt), 1e-300) or hi - lo <= cfg.tol * hi:
            return nxt
        x = nxt
    raise ConvergenceFailure(f"no convergence after {cfg.max_iter} iterations (bracket [{lo}, {hi}])")


def lambda_roots(bs: float, bs_prime: float, s: float, cfg: RootSolveConfig | None = None) -> tuple[tuple[float, ...], bool]:
    """All positive roots of ``g`` in ascending order, plus a tangency flag.

    Raises ``NoPositiveRoot`` when ``g`` stays clearly above zero.
    """
    cfg = cfg or RootSolveConfig()
    bs, bs_prime, s = float(bs), float(bs_prime), float(s)
    if not s > 1:
        raise ValueError("root solving needs s > 1")
    if not (bs > 0 and math.isfinite(bs) and math.isfinite(bs_prime)):
        raise ValueError("B_s must be positive and B_s' finite")
    lam_star = bs ** (1.0 / (s - 1.0))
    g_min = _g(lam_star, bs, bs_prime, s)
    if abs(g_min) <= cfg.tangent_tol * max(1.0, abs(bs_prime)):
        return (lam_star,), True
    if g_min > 0:
        raise NoPositiveRoot(
            f"g(lambda) = lambda^{s} - {s}*{bs}*lambda - ({bs_prime}) has no positive root (min {g_min:.6g})"
        )
    if s == 2.0:
        root = math.sqrt(bs * bs + bs_prime)
        larger = bs + root
        if bs_prime >= 0:
            return (larger,), False
        # product of the roots is -bs_prime; avoids cancellation in bs - root
        return (-bs_prime / larger, larger), False
    hi = 2.0 * lam_star
    while _g(hi, bs, bs_prime, s) <= 0:
        hi *= 2.0
    larger = _safeguarded_newton(bs, bs_prime, s, lam_star, hi, cfg)
    if bs_prime >= 0:
        return (larger,), False
    # g(x0) = x0**s > 0 at the linearised root, so x0 is a valid lower bound
    x0 = -bs_prime / (s * bs)
    lo = x0 if x0 < lam_star else 0.0
    if lo > 0 and _g(lo, bs, bs_prime, s) <= 0.0:
        # x0**s is below rounding of the other terms: x0 is the root
        return (lo, larger), False
    smaller = _safeguarded_newton(bs, bs_prime, s, lo, lam_star, cfg, start=lo if lo > 0 else None)
    return (smaller, larger), False


def _pick(roots: tuple[float, ...], branch: str | float) -> float:
    if len(roots) == 1:
        return roots[0]
    if branch == "smaller":
        return roots[0]
    if branch == "larger":
        return roots[-1]
    hint = float(branch)
    return min(roots, key=lambda r: abs(r - hint))


def solve_lambda(
    bs: float,
    bs_prime: float,
    s: float,
    prev_lambda: float | None = None,
    cfg: RootSolveConfig | None = None,
) -> float:
    """Reversed hazard rate from a PEGF value and its t-derivative.

    With two positive roots, the one nearest ``prev_lambda`` is returned if
    given, otherwise the branch named by ``cfg.init_branch``.
    """
    cfg = cfg or RootSolveConfig()
    roots, _ = lambda_roots(bs, bs_prime, s, cfg)
    if prev_lambda is not None:
        return _pick(roots, float(prev_lambda))
    return _pick(roots, cfg.init_branch)


@dataclass(frozen=True)
class ReconstructionResult:
    t_grid: np.ndarray
    lam: np.ndarray
    cdf: np.ndarray
    max_eq8_residual: float
    root_branch_log: tuple[str, ...]
    residuals: np.ndarray
    bs_prime: np.ndarray
    notes: tuple[str, ...] = ()

    def write_csv(self, fh: TextIO) -> None:
        fh.write("t,lambda,cdf\n")
        for t, lam, big_f in zip(self.t_grid, self.lam, self.cdf):
            fh.write(f"{float(t)!r},{float(lam)!r},{float(big_f)!r}\n")
        fh.write(f"# max_eq8_residual={float(self.max_eq8_residual)!r}\n")

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def parse_reconstruction(lines: Iterable[str]) -> dict[str, np.ndarray | float]:
    """Read the ``t,lambda,cdf`` CSV back into arrays."""
    rows, residual = [], math.nan
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key.strip() == "max_eq8_residual":
                residual = float(val)
            continue
        if line.startswith("t,"):
            continue
        rows.append([float(v) for v in line.split(",")])
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    return {"t": arr[:, 0], "lambda": arr[:, 1], "cdf": arr[:, 2], "max_eq8_residual": residual}


def _pegf_derivative(t: np.ndarray, values: np.ndarray, s: float) -> np.ndarray:
    # Differentiate y = B_s**(-1/(s-1)) rather than B_s: near a lower support
    # endpoint B_s ~ k (t - low)**(1 - s), so y is close to linear there while
    # B_s blows up and defeats three-point stencils.
    y = values ** (-1.0 / (s - 1.0))
    dy = np.gradient(y, t, edge_order=2)
    return -(s - 1.0) * y ** (-s) * dy


def _label(roots: tuple[float, ...], lam: float) -> str:
    return "smaller" if lam == roots[0] else "larger"


def reconstruct_cdf(curve: EgfCurve, cfg: RootSolveConfig | None = None) -> ReconstructionResult:
    """Reversed hazard and CDF on ``curve.t_grid`` from a tabulated PEGF.

    Steps: t-derivative by second-order finite differences, pointwise root
    solve with branch tracking, then trapezoidal integration of ``lam``
    down from ``curve.support_high`` where F = 1.
    """
    cfg = cfg or RootSolveConfig()
    s = curve.s
    if not s > 1:
        raise ValueError("reconstruction needs s > 1 (B_1 is identically 1)")
    t = curve.t_grid
    n = t.size
    if n < 3:
        raise GridTooCoarse(f"need at least 3 grid points, got {n}")
    bs = curve.values
    bs_prime = _pegf_derivative(t, bs, s)

    notes: list[str] = []
    if np.any(np.diff(bs) < 0):
        msg = "curve is not increasing in t; root branch chosen by continuity tracking"
        notes.append(msg)
        logger.warning(msg)

    lam = np.empty(n)
    log: list[str] = []
    branch: str | None = None  # branch in force while two roots persist
    for i in range(n):
        try:
            roots, tangent = lambda_roots(bs[i], bs_prime[i], s, cfg)
        except (NoPositiveRoot, ConvergenceFailure) as err:
            raise type(err)(f"at grid point t={float(t[i])!r}: {err}") from err
        if len(roots) == 1:
            lam[i] = roots[0]
            log.append("tangent" if tangent else "single")
            branch = None
            continue
        if i == 0:
            lam[i] = _pick(roots, cfg.init_branch)
            branch = _label(roots, lam[i])
            log.append(f"{branch}:init")
        elif branch is not None:
            lam[i] = _pick(roots, branch)
            log.append(f"{branch}:tracked")
        else:
            # leaving a tangent/single stretch: follow the local trend
            guess = lam[i - 1] if i < 2 else max(2.0 * lam[i - 1] - lam[i - 2], 0.0)
            lam[i] = _pick(roots, guess if guess > 0 else lam[i - 1])
            branch = _label(roots, lam[i])
            log.append(f"{branch}:extrapolated")

    residuals = np.abs(lam**s - s * bs * lam - bs_prime)

    high = curve.support_high
    tail = 0.0
    if math.isinf(high):
        notes.append(f"support_high is infinite; F anchored to 1 at the last grid point t={float(t[-1])!r}")
    elif high > t[-1]:
        slope = (lam[-1] - lam[-2]) / (t[-1] - t[-2])
        lam_end = max(lam[-1] + slope * (high - t[-1]), 0.0)
        tail = 0.5 * (lam[-1] + lam_end) * (high - t[-1])
        notes.append(f"lambda extrapolated linearly over ({float(t[-1])!r}, {high!r}); tail mass term {float(tail)!r}")
    else:
        notes.append(f"F anchored to 1 at support_high={high!r}; mass beyond it is a truncation error")

    pieces = 0.5 * (lam[1:] + lam[:-1]) * np.diff(t)
    upper_integral = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]]) + tail
    cdf = np.exp(-upper_integral)
    cdf = np.maximum.accumulate(cdf)

    for arr in (lam, cdf, residuals, bs_prime):
        arr.setflags(write=False)
    return ReconstructionResult(
        t_grid=t,
        lam=lam,
        cdf=cdf,
        max_eq8_residual=float(residuals.max()),
        root_branch_log=tuple(log),
        residuals=residuals,
        bs_prime=bs_prime,
        notes=tuple(notes),
    )


def detect_constant_pegf(curve: EgfCurve, rel_tol: float = 1e-8) -> LeftExponential | None:
    """Return the constant-reversed-hazard law if the curve is flat in t.

    A flat PEGF at level k forces lam = (s k)**(1/(s-1)), i.e.
    F(x) = exp(a (x - b)) with b = ``curve.support_high``. Returns ``None``
    for non-flat curves and for curves without a finite upper end.
    """
    s = curve.s
    if not s > 1:
        raise ValueError("constancy test needs s > 1")
    mean = float(np.mean(curve.values))
    spread = float(np.max(np.abs(curve.values - mean))) / mean
    if spread > rel_tol or math.isinf(curve.support_high):
        return None
    a = (s * mean) ** (1.0 / (s - 1.0))
    return LeftExponential(a, curve.support_high)
