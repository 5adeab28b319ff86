"""Time-varying coefficients and the measures of their stability sets.

A coefficient signal is a :class:`PiecewiseFunction` built from parsed
expression segments.  A :class:`CoefficientPair` bundles the decay
coefficient ``a`` and delay-gain coefficient ``b`` with certified bounds.
Every instant is classified by the margin ``a(t) - |b(t)|`` into one of
three sets: strongly stable (margin > eta), unstable (margin < 0), and the
weak band in between; :func:`partition_measures` estimates the Lebesgue
measure of each over an interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .expressions import Expr, parse_expr

__all__ = [
    "PiecewiseFunction",
    "CoefficientPair",
    "MeasureTriple",
    "classify",
    "partition_measures",
    "bound_estimates",
    "ConfigError",
]

LABEL_ETA = "eta"
LABEL_MINUS = "-"
LABEL_PLUS = "+"

#: bisection tolerance is resolution / _BISECT_FACTOR
_BISECT_FACTOR = 1024.0

#: margins within this band of zero count as nonnegative; expressions like
#: sin(pi*t)^2 - abs(sin(pi*t))^3 touch zero only up to rounding noise
_NOISE_FLOOR = 1e-12


class ConfigError(ValueError):
    """Invalid declarative input (segments, bounds, config files)."""


@dataclass(frozen=True)
class PiecewiseFunction:
    """Expression segments over half-open intervals [l, r), with a default.

    ``period``, if set, reduces the evaluation time modulo the period before
    segment lookup; all segments must then lie inside ``[0, period)``.
    """

    segments: tuple = ()  # tuple of (l, r, Expr)
    default: Expr = field(default_factory=lambda: parse_expr("0"))
    period: float | None = None

    def __post_init__(self):
        segs = []
        for l, r, e in self.segments:
            if not isinstance(e, Expr):
                e = parse_expr(e)
            segs.append((float(l), float(r), e))
        segs.sort(key=lambda s: s[0])
        for (l, r, _) in segs:
            if not r > l:
                raise ConfigError(f"empty segment [{l}, {r})")
        for (_, r1, _), (l2, _, _) in zip(segs, segs[1:]):
            if l2 < r1:
                raise ConfigError(f"overlapping segments at {l2}")
        if self.period is not None:
            if self.period <= 0:
                raise ConfigError("period must be positive")
            for l, r, _ in segs:
                if l < 0 or r > self.period:
                    raise ConfigError("segments must lie within [0, period)")
        object.__setattr__(self, "segments", tuple(segs))
        default = self.default
        if not isinstance(default, Expr):
            object.__setattr__(self, "default", parse_expr(default))

    @classmethod
    def constant(cls, value):
        return cls(default=parse_expr(repr(float(value))))

    @classmethod
    def from_expr(cls, source, period=None):
        return cls(default=parse_expr(source) if isinstance(source, str) else source,
                   period=period)

    def _reduce(self, t):
        if self.period is None:
            return t
        return t % self.period

    def __call__(self, t):
        if isinstance(t, np.ndarray):
            return self._eval_array(t)
        tr = self._reduce(t)
        for l, r, e in self.segments:
            if l <= tr < r:
                return float(e(tr))
        return float(self.default(tr))

    def _eval_array(self, t):
        tr = self._reduce(np.asarray(t, dtype=float))
        out = np.empty(tr.shape)
        covered = np.zeros(tr.shape, dtype=bool)
        for l, r, e in self.segments:
            mask = (tr >= l) & (tr < r) & ~covered
            if mask.any():
                out[mask] = e(tr[mask])
                covered[mask] = True
        rest = ~covered
        if rest.any():
            out[rest] = self.default(tr[rest])
        return out

    def breakpoints_in(self, t1, t2):
        """Segment endpoints falling inside (t1, t2), period-unfolded."""
        edges = sorted({x for l, r, _ in self.segments for x in (l, r)})
        if not edges:
            return []
        points = []
        if self.period is None:
            points = [x for x in edges if t1 < x < t2]
        else:
            k0 = math.floor(t1 / self.period)
            k1 = math.ceil(t2 / self.period)
            for k in range(k0, k1 + 1):
                base = k * self.period
                for x in edges:
                    y = base + x
                    if t1 < y < t2:
                        points.append(y)
        return points


@dataclass(frozen=True)
class CoefficientPair:
    """Decay/gain coefficient pair with certified uniform bounds."""

    a: Callable[[float], float]
    b: Callable[[float], float]
    M_a: float
    M_b: float
    tau_max: float

    def __post_init__(self):
        if self.M_a <= 0:
            raise ConfigError("M_a must be positive")
        if self.M_b < 0:
            raise ConfigError("M_b must be nonnegative")
        if self.tau_max <= 0:
            raise ConfigError("tau_max must be positive")

    def margin(self, t):
        return self.a(t) - np.abs(self.b(t))

    def breakpoints_in(self, t1, t2):
        pts = []
        for f in (self.a, self.b):
            finder = getattr(f, "breakpoints_in", None)
            if finder is not None:
                pts.extend(finder(t1, t2))
        return pts

    def validate_bounds(self, t1, t2, resolution):
        """Check 0 < a <= M_a and |b| <= M_b on a grid over [t1, t2]."""
        grid = _grid(t1, t2, resolution)
        a = np.asarray(self.a(grid))
        b = np.asarray(self.b(grid))
        tol = 1e-9 * max(1.0, self.M_a, self.M_b)
        if a.min() <= 0:
            raise ConfigError(f"a(t) must be positive; min {a.min()} on [{t1}, {t2}]")
        if a.max() > self.M_a + tol:
            raise ConfigError(f"a(t) exceeds M_a={self.M_a}: max {a.max()}")
        if np.abs(b).max() > self.M_b + tol:
            raise ConfigError(f"|b(t)| exceeds M_b={self.M_b}: max {np.abs(b).max()}")


@dataclass(frozen=True)
class MeasureTriple:
    """Measures of the three classification sets over ``interval``."""

    mu_eta: float
    mu_minus: float
    mu_plus: float
    interval: tuple

    @property
    def total(self):
        return self.mu_eta + self.mu_minus + self.mu_plus


def _margin_label(margin, eta, eta_closed=False):
    if margin < -_NOISE_FLOOR:
        return LABEL_MINUS
    if margin > eta or (eta_closed and margin == eta):
        return LABEL_ETA
    return LABEL_PLUS


def classify(pair, eta, t):
    """Label instant ``t``: strongly stable, unstable, or the weak band.

    Boundary margin == eta goes to the weak band (strict inequality).
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    return _margin_label(float(pair.margin(t)), eta)


def _grid(t1, t2, resolution):
    n = max(2, int(math.ceil((t2 - t1) / resolution)) + 1)
    return np.linspace(t1, t2, n)


def _measure_partition(margin_fn, eta, t1, t2, resolution,
                       breakpoints=(), eta_closed=False):
    """Grid classification with bisection refinement at label changes.

    ``margin_fn`` must accept an ndarray.  Returns a MeasureTriple.
    Segment breakpoints are inserted into the grid so piecewise-constant
    inputs are resolved exactly up to the bisection tolerance.
    """
    if t2 <= t1:
        raise ValueError(f"empty interval ({t1}, {t2})")
    nodes = _grid(t1, t2, resolution)
    if breakpoints:
        nodes = np.unique(np.concatenate([nodes, np.asarray(sorted(breakpoints))]))
    margins = np.asarray(margin_fn(nodes))
    labels = [_margin_label(m, eta, eta_closed) for m in margins]

    tol = resolution / _BISECT_FACTOR
    acc = {LABEL_ETA: 0.0, LABEL_MINUS: 0.0, LABEL_PLUS: 0.0}
    for i in range(len(nodes) - 1):
        left, right = nodes[i], nodes[i + 1]
        la, lb = labels[i], labels[i + 1]
        if la == lb:
            acc[la] += right - left
            continue
        # change exactly at the right node (breakpoint on the grid): cut there
        if _margin_label(float(margin_fn(right - tol)), eta, eta_closed) == la:
            acc[la] += right - left
            continue
        # locate the first point where the label departs from la
        lo, hi = left, right
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _margin_label(float(margin_fn(mid)), eta, eta_closed) == la:
                lo = mid
            else:
                hi = mid
        cut = 0.5 * (lo + hi)
        acc[la] += cut - left
        acc[lb] += right - cut
    return MeasureTriple(float(acc[LABEL_ETA]), float(acc[LABEL_MINUS]),
                         float(acc[LABEL_PLUS]), (t1, t2))


def partition_measures(pair, eta, t1, t2, resolution=None):
    """Measures of the three classification sets of ``pair`` over (t1, t2)."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    if resolution is None:
        resolution = 1e-3 * pair.tau_max
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    return _measure_partition(
        lambda t: pair.a(t) - np.abs(pair.b(t)),
        eta, t1, t2, resolution,
        breakpoints=pair.breakpoints_in(t1, t2),
    )


def bound_estimates(f, t1, t2, resolution=1e-4):
    """Grid-based (inf, sup) estimate of ``f`` over [t1, t2].

    These are sampled estimates, accurate to O(resolution * |f'|); segment
    breakpoints of piecewise inputs are included in the sample.
    """
    if t2 <= t1:
        raise ValueError(f"empty interval ({t1}, {t2})")
    nodes = _grid(t1, t2, resolution)
    if isinstance(f, PiecewiseFunction):
        pts = f.breakpoints_in(t1, t2)
        if pts:
            nodes = np.unique(np.concatenate([nodes, np.asarray(pts)]))
    vals = np.asarray(f(nodes))
    return float(vals.min()), float(vals.max())
