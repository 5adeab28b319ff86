"""Fixed-step integration of delay systems and derived time series.

Integration is classic 4th-order Runge-Kutta on a uniform grid; the
delayed state is reconstructed by cubic Hermite interpolation on the
already-computed grid (linear interpolation inside the history segment).
Coefficient signals are pre-evaluated on the half-step grid so the hot
loop is pure array arithmetic; the loop itself is JIT-compiled when
numba is available.

Delays are clamped below at four grid steps so the delayed argument never
lands inside the step being computed; the clamp count is reported.  A
"floor" delay mode evaluates the delayed argument at floor(t) exactly,
for sawtooth delays of the form t - floor(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .coeff import CoefficientPair, ConfigError, PiecewiseFunction

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

__all__ = [
    "DelaySpec",
    "ScalarDDE",
    "NetworkSpec",
    "HistorySegment",
    "Trajectory",
    "IntegrationOverflow",
    "integrate",
    "maximal_function",
    "sync_error",
    "periodic_residual",
    "fit_decay_rate",
    "INNER_FUNCTIONS",
]

# inner coupling nonlinearities with known Lipschitz constant 1
INNER_FUNCTIONS = {"identity": 0, "tanh": 1, "arctan": 2, "sin": 3}

DELAY_CLAMP = "clamp"
DELAY_FLOOR = "floor"


class IntegrationOverflow(RuntimeError):
    def __init__(self, t_last):
        super().__init__(f"state became non-finite; last valid time {t_last}")
        self.t_last = t_last


@dataclass(frozen=True)
class DelaySpec:
    """Time-varying delay with its upper bound and evaluation mode."""

    tau: Callable[[float], float]
    tau_max: float
    mode: str = DELAY_CLAMP

    def __post_init__(self):
        if self.tau_max <= 0:
            raise ConfigError("tau_max must be positive")
        if self.mode not in (DELAY_CLAMP, DELAY_FLOOR):
            raise ConfigError(f"unknown delay mode {self.mode!r}")

    def delayed_times(self, ts, h):
        """Delayed argument t - tau(t) on grid ``ts``; returns (times, clamps)."""
        ts = np.asarray(ts, dtype=float)
        if self.mode == DELAY_FLOOR:
            return np.floor(ts), 0
        tau = np.asarray(self.tau(ts), dtype=float)
        if tau.ndim == 0:
            tau = np.full(ts.shape, float(tau))
        if tau.max() > self.tau_max + 1e-12:
            raise ConfigError(
                f"delay exceeds tau_max={self.tau_max}: max {tau.max()}")
        floor = 4.0 * h
        clamps = int(np.count_nonzero(tau < floor))
        tau = np.maximum(tau, floor)
        return ts - tau, clamps


@dataclass(frozen=True)
class ScalarDDE:
    """x' = -a(t) x + b(t) x(t - tau(t))."""

    pair: CoefficientPair
    delay: DelaySpec

    @property
    def n(self):
        return 1

    @property
    def tau_max(self):
        return self.delay.tau_max


@dataclass(frozen=True)
class NetworkSpec:
    """Coupled delayed network

        x_i' = -d_i(t) x_i + sum_j A_ij(t) g_j(x_j)
               + sum_j B_ij(t) f_j(x_j(t - tau_ij(t))) + I_i(t)

    with inner functions drawn from INNER_FUNCTIONS (Lipschitz constants
    G_j, F_j <= 1 for the built-ins).  ``omega`` marks an all-coefficient
    common period when set.
    """

    n: int
    d: tuple
    A: tuple          # n x n of callables
    B: tuple
    g_names: tuple
    f_names: tuple
    I: tuple
    tau: tuple        # n x n of DelaySpec-compatible callables
    tau_max: float
    G: tuple
    F: tuple
    M_a: float
    M_b: float
    omega: float | None = None
    delay_mode: str = DELAY_CLAMP

    def __post_init__(self):
        for name in list(self.g_names) + list(self.f_names):
            if name not in INNER_FUNCTIONS:
                raise ConfigError(f"unknown inner function {name!r}")
        if self.tau_max <= 0:
            raise ConfigError("tau_max must be positive")

    def margins(self, t):
        """Per-component margin d_i - sum_j (G_j |A_ij| + F_j |B_ij|)."""
        t = np.asarray(t, dtype=float)
        out = []
        for i in range(self.n):
            m = np.asarray(self.d[i](t), dtype=float) + np.zeros(t.shape)
            for j in range(self.n):
                m = m - self.G[j] * np.abs(self.A[i][j](t)) \
                      - self.F[j] * np.abs(self.B[i][j](t))
            out.append(m)
        return np.stack(out)

    def min_margin(self, t):
        scalar = np.isscalar(t) or (isinstance(t, float))
        m = self.margins(np.atleast_1d(np.asarray(t, dtype=float)))
        mn = m.min(axis=0)
        return float(mn[0]) if scalar else mn

    def margin_breakpoints(self, t1, t2):
        pts = []
        for f in list(self.d) + [x for row in self.A for x in row] \
                + [x for row in self.B for x in row]:
            if isinstance(f, PiecewiseFunction):
                pts.extend(f.breakpoints_in(t1, t2))
        return pts


@dataclass(frozen=True)
class HistorySegment:
    """Initial data on [-tau_max, 0], one callable per component."""

    components: tuple

    @classmethod
    def constant(cls, values):
        vals = [float(v) for v in np.atleast_1d(values)]
        return cls(tuple((lambda t, v=v: v + 0.0 * np.asarray(t)) for v in vals))

    @classmethod
    def piecewise_constant(cls, knot_times, knot_values):
        """Right-continuous step history; knot_times must start at -tau_max."""
        kt = np.asarray(knot_times, dtype=float)
        kv = np.asarray(knot_values, dtype=float)
        if kv.ndim == 1:
            kv = kv[:, None]

        def make(col):
            def phi(t):
                idx = np.clip(np.searchsorted(kt, np.asarray(t), side="right") - 1,
                              0, len(kt) - 1)
                return kv[idx, col]
            return phi

        return cls(tuple(make(c) for c in range(kv.shape[1])))

    @property
    def n(self):
        return len(self.components)

    def sample(self, tau_max, h):
        """Values on the uniform grid -tau_max, -tau_max + h, ..., 0."""
        nh = int(round(tau_max / h)) + 1
        ts = -tau_max + h * np.arange(nh)
        ts[-1] = 0.0
        out = np.empty((nh, self.n))
        for c, phi in enumerate(self.components):
            out[:, c] = np.asarray(phi(ts), dtype=float) + np.zeros(nh)
        if not np.all(np.isfinite(out)):
            raise ConfigError("history segment is not finite on its domain")
        return out

    def max_abs(self, tau_max, h):
        return float(np.abs(self.sample(tau_max, h)).max())


@dataclass(frozen=True)
class Trajectory:
    grid: np.ndarray
    states: np.ndarray    # (M+1, n)
    derivs: np.ndarray
    history: HistorySegment
    system: object
    h: float
    clamp_count: int = 0

    @property
    def n(self):
        return self.states.shape[1]

    def state_at(self, t):
        """Cubic Hermite interpolation on the computed grid."""
        j = min(int(t / self.h), len(self.grid) - 2)
        s = (t - self.grid[j]) / self.h
        y0, y1 = self.states[j], self.states[j + 1]
        m0, m1 = self.derivs[j] * self.h, self.derivs[j + 1] * self.h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s ** 2 * (3 - 2 * s)
        h11 = s ** 2 * (s - 1)
        return h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1


@njit(cache=True)
def _lookup(td, comp, i_max, states, derivs, h, hist_vals, tau_max):
    # linear interpolation inside the history segment
    if td <= 0.0:
        nh = hist_vals.shape[0]
        s = (td + tau_max) / h
        j = int(s)
        if j < 0:
            j = 0
        if j > nh - 2:
            j = nh - 2
        w = s - j
        return hist_vals[j, comp] * (1.0 - w) + hist_vals[j + 1, comp] * w
    if td >= i_max * h:
        return states[i_max, comp]
    j = int(td / h)
    if j > i_max - 1:
        j = i_max - 1
    s = td / h - j
    y0 = states[j, comp]
    y1 = states[j + 1, comp]
    m0 = derivs[j, comp] * h
    m1 = derivs[j + 1, comp] * h
    h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
    h10 = s * (1.0 - s) ** 2
    h01 = s * s * (3.0 - 2.0 * s)
    h11 = s * s * (s - 1.0)
    return h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1


@njit(cache=True)
def _run_scalar(states, derivs, a_half, b_half, td_half, h, hist_vals, tau_max):
    M = states.shape[0] - 1
    for i in range(M):
        y = states[i, 0]
        j2 = 2 * i
        xd1 = _lookup(td_half[j2], 0, i, states, derivs, h, hist_vals, tau_max)
        k1 = -a_half[j2] * y + b_half[j2] * xd1
        derivs[i, 0] = k1
        xd2 = _lookup(td_half[j2 + 1], 0, i, states, derivs, h, hist_vals, tau_max)
        k2 = -a_half[j2 + 1] * (y + 0.5 * h * k1) + b_half[j2 + 1] * xd2
        k3 = -a_half[j2 + 1] * (y + 0.5 * h * k2) + b_half[j2 + 1] * xd2
        xd4 = _lookup(td_half[j2 + 2], 0, i, states, derivs, h, hist_vals, tau_max)
        k4 = -a_half[j2 + 2] * (y + h * k3) + b_half[j2 + 2] * xd4
        ynew = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(ynew):
            return i
        states[i + 1, 0] = ynew
    j2 = 2 * M
    xd = _lookup(td_half[j2], 0, M, states, derivs, h, hist_vals, tau_max)
    derivs[M, 0] = -a_half[j2] * states[M, 0] + b_half[j2] * xd
    return M


@njit(cache=True)
def _act(code, x):
    if code == 1:
        return math.tanh(x)
    if code == 2:
        return math.atan(x)
    if code == 3:
        return math.sin(x)
    return x


@njit(cache=True)
def _network_rhs(y, i_stage, i_done, states, derivs, d_half, A_half, B_half,
                 I_half, td_half, g_codes, f_codes, h, hist_vals, tau_max, out):
    n = y.shape[0]
    for ii in range(n):
        s = -d_half[ii, i_stage] * y[ii] + I_half[ii, i_stage]
        for jj in range(n):
            s += A_half[ii, jj, i_stage] * _act(g_codes[jj], y[jj])
            xd = _lookup(td_half[ii, jj, i_stage], jj, i_done, states, derivs,
                         h, hist_vals, tau_max)
            s += B_half[ii, jj, i_stage] * _act(f_codes[jj], xd)
        out[ii] = s


@njit(cache=True)
def _run_network(states, derivs, d_half, A_half, B_half, I_half, td_half,
                 g_codes, f_codes, h, hist_vals, tau_max):
    M = states.shape[0] - 1
    n = states.shape[1]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    for i in range(M):
        y = states[i]
        j2 = 2 * i
        _network_rhs(y, j2, i, states, derivs, d_half, A_half, B_half, I_half,
                     td_half, g_codes, f_codes, h, hist_vals, tau_max, k1)
        derivs[i] = k1
        _network_rhs(y + 0.5 * h * k1, j2 + 1, i, states, derivs, d_half,
                     A_half, B_half, I_half, td_half, g_codes, f_codes, h,
                     hist_vals, tau_max, k2)
        _network_rhs(y + 0.5 * h * k2, j2 + 1, i, states, derivs, d_half,
                     A_half, B_half, I_half, td_half, g_codes, f_codes, h,
                     hist_vals, tau_max, k3)
        _network_rhs(y + h * k3, j2 + 2, i, states, derivs, d_half, A_half,
                     B_half, I_half, td_half, g_codes, f_codes, h, hist_vals,
                     tau_max, k4)
        ok = True
        for ii in range(n):
            ynew = y[ii] + h / 6.0 * (k1[ii] + 2.0 * k2[ii] + 2.0 * k3[ii] + k4[ii])
            if not np.isfinite(ynew):
                ok = False
            states[i + 1, ii] = ynew
        if not ok:
            return i
    _network_rhs(states[M], 2 * M, M, states, derivs, d_half, A_half, B_half,
                 I_half, td_half, g_codes, f_codes, h, hist_vals, tau_max, k1)
    derivs[M] = k1
    return M


def _eval_on(fn, ts):
    vals = np.asarray(fn(ts), dtype=float)
    if vals.ndim == 0:
        vals = np.full(ts.shape, float(vals))
    return vals


def integrate(system, history, T, h):
    """Integrate ``system`` from ``history`` over [0, T] with step ``h``."""
    if T <= 0 or h <= 0:
        raise ConfigError("T and h must be positive")
    M = int(round(T / h))
    grid = h * np.arange(M + 1)
    half = 0.5 * h * np.arange(2 * M + 1)
    if history.n != system.n:
        raise ConfigError(
            f"history has {history.n} components, system has {system.n}")
    hist_vals = history.sample(system.tau_max, h)
    states = np.zeros((M + 1, system.n))
    derivs = np.zeros((M + 1, system.n))
    states[0] = hist_vals[-1]

    if isinstance(system, ScalarDDE):
        a_half = _eval_on(system.pair.a, half)
        b_half = _eval_on(system.pair.b, half)
        td_half, clamps = system.delay.delayed_times(half, h)
        last = _run_scalar(states, derivs, a_half, b_half, td_half, h,
                           hist_vals, system.tau_max)
    elif isinstance(system, NetworkSpec):
        n = system.n
        d_half = np.stack([_eval_on(system.d[i], half) for i in range(n)])
        I_half = np.stack([_eval_on(system.I[i], half) for i in range(n)])
        A_half = np.stack([[_eval_on(system.A[i][j], half) for j in range(n)]
                           for i in range(n)])
        B_half = np.stack([[_eval_on(system.B[i][j], half) for j in range(n)]
                           for i in range(n)])
        td_half = np.empty((n, n, 2 * M + 1))
        clamps = 0
        for i in range(n):
            for j in range(n):
                spec = DelaySpec(system.tau[i][j], system.tau_max,
                                 system.delay_mode)
                td_half[i, j], c = spec.delayed_times(half, h)
                clamps += c
        g_codes = np.array([INNER_FUNCTIONS[g] for g in system.g_names],
                           dtype=np.int64)
        f_codes = np.array([INNER_FUNCTIONS[f] for f in system.f_names],
                           dtype=np.int64)
        last = _run_network(states, derivs, d_half, A_half, B_half, I_half,
                            td_half, g_codes, f_codes, h, hist_vals,
                            system.tau_max)
    else:
        raise ConfigError(f"unknown system type {type(system).__name__}")

    if last < M:
        raise IntegrationOverflow(grid[last])
    return Trajectory(grid, states, derivs, history, system, h, clamps)


def maximal_function(traj, tau_max):
    """Trailing-window maximum of the max-norm, M0(t), on the trajectory grid.

    Monotone-deque sliding maximum over the window [t - tau_max, t],
    including the history segment for t < tau_max; O(M) total.
    """
    h = traj.h
    hist = np.abs(traj.history.sample(tau_max, h)).max(axis=1)[:-1]
    vals = np.concatenate([hist, np.abs(traj.states).max(axis=1)])
    w = int(round(tau_max / h)) + 1
    offset = len(hist)
    out = np.empty(len(traj.grid))
    from collections import deque
    dq = deque()
    for i in range(len(vals)):
        while dq and vals[dq[-1]] <= vals[i]:
            dq.pop()
        dq.append(i)
        while dq[0] <= i - w:
            dq.popleft()
        if i >= offset:
            out[i - offset] = vals[dq[0]]
    return traj.grid, out


def sync_error(traj_a, traj_b):
    """Per-time max-norm of the difference of two same-grid trajectories."""
    if len(traj_a.grid) != len(traj_b.grid) or traj_a.h != traj_b.h:
        raise ValueError("trajectories are on different grids")
    z = np.abs(traj_a.states - traj_b.states).max(axis=1)
    return traj_a.grid, z


def periodic_residual(traj, omega):
    """max-norm of u(t) - u(t - omega) for grid times t >= omega."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    if traj.grid[-1] < omega:
        raise ValueError("trajectory shorter than one period")
    mask = traj.grid >= omega - 1e-12
    ts = traj.grid[mask]
    shifted = np.stack([traj.state_at(t - omega) for t in ts])
    v = np.abs(traj.states[mask] - shifted).max(axis=1)
    return ts, v


def fit_decay_rate(times, samples, t_start=0.0):
    """Negated log-linear least-squares slope of ``samples`` beyond t_start."""
    times = np.asarray(times, dtype=float)
    samples = np.clip(np.abs(np.asarray(samples, dtype=float)), 1e-15, None)
    mask = times >= t_start
    if mask.sum() < 10:
        raise ValueError("need at least 10 samples beyond t_start")
    slope = np.polyfit(times[mask], np.log(samples[mask]), 1)[0]
    return -float(slope)
