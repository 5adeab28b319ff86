"""Stability certificates for time-varying delay coefficient pairs.

The certified condition partitions time into windows of length
``(N+1)*tau_max`` and requires (i) a divergent cumulative measure of the
strongly stable set and (ii) a small-enough tail of the per-window growth
ratio.  A passing check yields explicit constants: a contraction factor
per window, and from it a guaranteed exponential decay rate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coeff import (
    CoefficientPair,
    ConfigError,
    MeasureTriple,
    _measure_partition,
    partition_measures,
)

__all__ = [
    "WindowStats",
    "EtaCertificate",
    "PeriodicCheck",
    "window_ratio",
    "ratio_from_measures",
    "check_eta_condition",
    "common_pair",
    "check_periodic_condition",
    "settling_index",
    "theorem1_constants",
    "HorizonError",
]

CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"

#: tail ratios within this relative band of eta/2 are treated as undecidable
_TAIL_BAND = 0.01
_MIN_WINDOWS = 8


class HorizonError(ValueError):
    """Horizon too short to evaluate the windowed condition."""


@dataclass(frozen=True)
class WindowStats:
    k: int
    t_k: float
    t_k_minus: float
    mu_eta: float     # over (t_k, t_{k+1} - tau_max)
    mu_minus: float   # over (t_k, t_{k+1})
    mu_plus: float
    ratio: float      # inf when the denominator vanishes with mu_minus > 0

    def as_dict(self):
        return {
            "k": self.k,
            "mu_eta": self.mu_eta,
            "mu_minus": self.mu_minus,
            "mu_plus": self.mu_plus,
            "ratio": self.ratio,
        }


@dataclass(frozen=True)
class EtaCertificate:
    eta: float
    t0: float
    N: int
    tau_max: float
    M_a: float
    M_b: float
    delta: float
    windows: tuple
    C_star_est: float
    sum_mu_eta: float
    verdict: str
    epsilon: float | None = None
    C: float | None = None
    lambda0: float | None = None
    alpha: float | None = None
    K: float | None = None

    @property
    def window_span(self):
        return (self.N + 1) * self.tau_max

    def window_times(self):
        return [self.t0 + k * self.window_span for k in range(len(self.windows) + 1)]

    def as_dict(self):
        return {
            "eta": self.eta,
            "t0": self.t0,
            "N": self.N,
            "tau_max": self.tau_max,
            "M_a": self.M_a,
            "M_b": self.M_b,
            "delta": self.delta,
            "windows": [w.as_dict() for w in self.windows],
            "C_star_est": self.C_star_est,
            "verdict": self.verdict,
            "epsilon": self.epsilon,
            "C": self.C,
            "lambda0": self.lambda0,
            "alpha": self.alpha,
            "K": self.K,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.as_dict(), **kwargs)


def ratio_from_measures(mu_minus, mu_eta, M_a, M_b, N, tau_max):
    """Per-window growth ratio from precomputed measures.

    Returns 0 for mu_minus == 0 (the 0/0 convention) and inf when the
    denominator vanishes while mu_minus > 0.
    """
    if mu_minus <= 0:
        return 0.0
    denom = min(1.0 / M_a, mu_eta)
    if denom <= 0:
        return math.inf
    return (math.expm1(M_b * mu_minus) * math.exp(M_a * (N + 1) * tau_max)) / denom


def window_ratio(pair, eta, t0, N, k, resolution=None):
    """Measures and growth ratio for window ``k``."""
    if N < 1:
        raise ValueError("N must be a positive integer")
    span = (N + 1) * pair.tau_max
    t_k = t0 + k * span
    t_next = t_k + span
    t_next_minus = t_next - pair.tau_max
    full = partition_measures(pair, eta, t_k, t_next, resolution)
    head = partition_measures(pair, eta, t_k, t_next_minus, resolution)
    ratio = ratio_from_measures(full.mu_minus, head.mu_eta,
                                pair.M_a, pair.M_b, N, pair.tau_max)
    return WindowStats(k, t_k, t_k - pair.tau_max, head.mu_eta,
                       full.mu_minus, full.mu_plus, ratio)


def check_eta_condition(pair, eta, t0, N, horizon, resolution=None,
                        divergence_threshold=None):
    """Windowed stability check over ``[t0, t0 + horizon]``.

    Returns an :class:`EtaCertificate` with a tri-state verdict: the
    asymptotic condition is approximated by the max tail ratio over the
    last half of the windows and a partial-sum divergence threshold.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if eta >= 2 * pair.M_a:
        raise ConfigError(f"eta={eta} must be < 2*M_a={2 * pair.M_a}")
    span = (N + 1) * pair.tau_max
    n_windows = int(math.floor(horizon / span))
    if n_windows < _MIN_WINDOWS:
        raise HorizonError(
            f"horizon {horizon} covers only {n_windows} windows; need >= {_MIN_WINDOWS}")
    if divergence_threshold is None:
        divergence_threshold = 10.0 * max(1.0 / pair.M_a, pair.tau_max)
    if resolution is None:
        resolution = 1e-3 * pair.tau_max
    pair.validate_bounds(t0, t0 + n_windows * span, max(resolution, 1e-4 * span))

    windows = tuple(window_ratio(pair, eta, t0, N, k, resolution)
                    for k in range(n_windows))
    tail = windows[n_windows // 2:]
    ratios_tail = [w.ratio for w in tail]
    c_star = max(ratios_tail)
    sum_mu_eta = sum(w.mu_eta for w in windows)
    half_eta = eta / 2.0

    if any(math.isinf(r) for r in ratios_tail):
        verdict = REFUTED
    elif c_star < half_eta:
        verdict = CERTIFIED if sum_mu_eta >= divergence_threshold else INCONCLUSIVE
    elif all(r >= half_eta for r in ratios_tail):
        # persistently failing tail; near-threshold hovering stays undecided
        verdict = REFUTED if min(ratios_tail) >= half_eta * (1 + _TAIL_BAND) \
            else INCONCLUSIVE
    else:
        verdict = INCONCLUSIVE

    delta = 1.0 - eta / (2.0 * pair.M_a)
    epsilon = C = lambda0 = alpha = None
    min_mu_eta = min(w.mu_eta for w in windows)
    if verdict == CERTIFIED and min_mu_eta > 0:
        epsilon = min_mu_eta
        C = 0.5 * (c_star + half_eta)
        lambda0 = 1.0 - (half_eta - C) * min(1.0 / pair.M_a, epsilon) \
            * math.exp(-pair.M_a * span)
        alpha = -math.log(lambda0) / span

    return EtaCertificate(
        eta=eta, t0=t0, N=N, tau_max=pair.tau_max, M_a=pair.M_a, M_b=pair.M_b,
        delta=delta, windows=windows, C_star_est=c_star, sum_mu_eta=sum_mu_eta,
        verdict=verdict, epsilon=epsilon, C=C, lambda0=lambda0, alpha=alpha,
    )


class _ArgminComponent:
    """Evaluates component ``which`` of the minimum-margin pair at each t."""

    def __init__(self, pairs, which):
        self._pairs = pairs
        self._which = which

    def __call__(self, t):
        scalar = not isinstance(t, np.ndarray)
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        margins = np.stack([np.asarray(p.a(ts)) - np.abs(np.asarray(p.b(ts)))
                            for p in self._pairs])
        idx = np.argmin(margins, axis=0)  # ties resolve to the lowest index
        vals = np.stack([
            np.asarray(getattr(p, self._which)(ts)) for p in self._pairs])
        out = vals[idx, np.arange(ts.size)]
        return float(out[0]) if scalar else out

    def breakpoints_in(self, t1, t2):
        pts = []
        for p in self._pairs:
            pts.extend(p.breakpoints_in(t1, t2))
        return pts


def common_pair(pairs):
    """Pointwise worst pair: at each t, the pair attaining the minimum margin."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one coefficient pair")
    tau = pairs[0].tau_max
    for p in pairs[1:]:
        if p.tau_max != tau:
            raise ConfigError("all pairs must share tau_max")
    if len(pairs) == 1:
        return pairs[0]
    return CoefficientPair(
        a=_ArgminComponent(pairs, "a"),
        b=_ArgminComponent(pairs, "b"),
        M_a=max(p.M_a for p in pairs),
        M_b=max(p.M_b for p in pairs),
        tau_max=tau,
    )


@dataclass(frozen=True)
class PeriodicCheck:
    omega: float
    p: int
    mu_bar_eta: float
    mu_bar_minus: float
    lhs: float
    verdict: bool
    diagnostic: str = ""

    def as_dict(self):
        return {
            "omega": self.omega,
            "p": self.p,
            "mu_bar_eta": self.mu_bar_eta,
            "mu_bar_minus": self.mu_bar_minus,
            "lhs": self.lhs,
            "verdict": self.verdict,
            "diagnostic": self.diagnostic,
        }


def check_periodic_condition(network, eta, N, resolution=None):
    """Periodic-orbit existence check for a periodic delayed network.

    Over one period, measures the set where every per-component margin is
    >= eta and the set where some margin is negative, then evaluates the
    windowed growth bound.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if N < 1:
        raise ValueError("N must be a positive integer")
    omega = network.omega
    if omega is None or omega <= 0:
        raise ConfigError("network must carry a positive period")
    if resolution is None:
        resolution = 1e-3 * omega
    p = max(1, int(math.ceil(network.tau_max / omega)))

    # min over components: >= eta for the strongly stable set, < 0 for the
    # unstable set; both reduce to labels of the pointwise min margin.
    tri = _measure_partition(network.min_margin, eta, 0.0, omega, resolution,
                             breakpoints=network.margin_breakpoints(0.0, omega),
                             eta_closed=True)
    mu_eta, mu_minus = tri.mu_eta, tri.mu_minus
    M_a, M_b = network.M_a, network.M_b
    denom = min(1.0 / M_a, p * N * mu_eta)
    if mu_minus <= 0:
        lhs = 0.0
    elif denom <= 0:
        return PeriodicCheck(omega, p, mu_eta, mu_minus, math.inf, False,
                             diagnostic="ratio infinite")
    else:
        lhs = math.expm1(M_b * p * (N + 1) * mu_minus) \
            * math.exp(M_a * p * (N + 1) * omega) / denom
    verdict = mu_eta > 0 and lhs < eta / 2.0
    diag = "" if mu_eta > 0 else "mu_bar_eta = 0"
    return PeriodicCheck(omega, p, mu_eta, mu_minus, lhs, verdict, diag)


def settling_index(cert):
    """First window index from which every later ratio stays <= C."""
    if cert.C is None:
        raise ValueError("certificate carries no contraction constant C")
    ratios = [w.ratio for w in cert.windows]
    for k in range(len(ratios)):
        if all(r <= cert.C for r in ratios[k:]):
            return k
    return len(ratios)


def theorem1_constants(cert, m0_at_windows, x_over_m0_sup=1.0):
    """Uniform and exponential envelope constants from a certificate.

    ``m0_at_windows`` are sampled values of the trailing-window maximum at
    the window boundaries t_0, t_1, ..., covering at least the settling
    index k* (the first window from which all ratios stay <= C).
    Returns (K_prime, K, K_tilde); K_tilde is None when no decay rate is
    certified.
    """
    if cert.verdict != CERTIFIED:
        raise ValueError("certificate is not certified")
    m0 = [float(v) for v in m0_at_windows]
    if not m0:
        raise ValueError("need at least M0(t_0)")
    if m0[0] == 0.0:
        # zero trajectory: all later M0 are zero too
        k_prime = 1.0
    else:
        k_prime = max(1.0, max(v / m0[0] for v in m0))
    K = k_prime * math.exp(cert.M_b * cert.N * cert.tau_max)

    k_tilde = None
    if cert.alpha is not None:
        k_star = settling_index(cert)
        span = cert.window_span
        k_tilde = max(
            x_over_m0_sup,
            k_prime * math.exp(cert.M_b * (cert.N + 1) * cert.tau_max)
            * cert.lambda0 ** (-(k_star + 1)),
        ) * math.exp(cert.alpha * k_star * span)
    return k_prime, K, k_tilde
