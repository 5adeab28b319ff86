"""Executable checks of the lemma-level estimates along trajectories.

Each check replays one of the analytical growth/decay estimates on a
simulated trajectory and records every violation with its witness
(interval, lhs, rhs, slack) so it can be re-evaluated independently.
Checks use the integrated inequality forms only; Dini derivatives are
never approximated by difference quotients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coeff import LABEL_ETA, LABEL_MINUS, LABEL_PLUS, partition_measures
from .ddesim import fit_decay_rate, maximal_function
from .certifier import settling_index, theorem1_constants

__all__ = [
    "OracleReport",
    "check_lemma1",
    "check_lemma2",
    "check_lemma3",
    "check_lemma4",
    "check_theorem1_envelope",
    "oracle_battery",
]

REL_TOL = 1e-3
ABS_TOL = 1e-9


@dataclass
class OracleReport:
    name: str
    checks: int = 0
    violations: list = field(default_factory=list)
    tolerance: float = REL_TOL

    @property
    def passed(self):
        return not self.violations

    def record(self, where, lhs, rhs):
        self.checks += 1
        slack = rhs - lhs
        if lhs > rhs + max(ABS_TOL, self.tolerance * max(abs(lhs), abs(rhs))):
            self.violations.append(
                {"where": where, "lhs": float(lhs), "rhs": float(rhs),
                 "slack": float(slack)})

    def as_dict(self):
        return {
            "name": self.name,
            "checks": self.checks,
            "violations": self.violations,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _labels_on_grid(traj, pair, eta):
    margins = np.asarray(pair.margin(traj.grid))
    labels = np.full(len(margins), LABEL_PLUS, dtype=object)
    labels[margins < 0] = LABEL_MINUS
    labels[margins > eta] = LABEL_ETA
    return labels


def check_lemma1(traj, pair, eta, tolerance=REL_TOL):
    """M0 is nonincreasing wherever the margin is nonnegative.

    Checked step-to-step at grid instants outside the unstable set; the
    additive tolerance absorbs interpolation error in M0.
    """
    rep = OracleReport("lemma1_m0_nonincreasing", tolerance=tolerance)
    grid, m0 = maximal_function(traj, pair.tau_max)
    labels = _labels_on_grid(traj, pair, eta)
    tol = 10.0 * traj.h * pair.M_b * float(m0.max())
    # within each maximal run of nonnegative margin, M0 must stay below its
    # running minimum; endpoint-only checks would miss slow internal growth
    run_min = None
    for i in range(len(grid)):
        if labels[i] == LABEL_MINUS:
            run_min = None
            continue
        if run_min is None:
            run_min = m0[i]
            continue
        rep.checks += 1
        if m0[i] > run_min + tol:
            rep.violations.append(
                {"where": float(grid[i]), "lhs": float(m0[i]),
                 "rhs": float(run_min + tol),
                 "slack": float(run_min + tol - m0[i])})
        run_min = min(run_min, m0[i])
    return rep


def _sample_pairs(traj, pair, eta, count, rng, stratify=True):
    """Random (t1 < t2) pairs; when the unstable set is nonempty, at least
    a quarter of them straddle one of its intervals."""
    grid = traj.grid
    labels = _labels_on_grid(traj, pair, eta)
    minus_idx = np.flatnonzero(labels == LABEL_MINUS)
    pairs = []
    n_strat = count // 4 if (stratify and len(minus_idx)) else 0
    for _ in range(n_strat):
        m = int(rng.choice(minus_idx))
        i = int(rng.integers(0, max(1, m)))
        j = int(rng.integers(min(m + 1, len(grid) - 1), len(grid)))
        pairs.append((grid[i], grid[j]))
    for _ in range(count - n_strat):
        i, j = sorted(rng.integers(0, len(grid), size=2))
        if i == j:
            j = min(j + 1, len(grid) - 1)
            i = max(0, i - 1)
        pairs.append((grid[i], grid[j]))
    return pairs


def check_lemma2(traj, pair, resolution=None, sample_pairs=100, seed=0,
                 tolerance=REL_TOL):
    """M0(t2) <= M0(t1) * exp(M_b * mu_minus(t1, t2)) on random pairs."""
    rep = OracleReport("lemma2_growth_bound", tolerance=tolerance)
    rng = np.random.default_rng(seed)
    grid, m0 = maximal_function(traj, pair.tau_max)
    # eta is irrelevant for this bound; any positive value labels the sets
    for t1, t2 in _sample_pairs(traj, pair, 1e-6, sample_pairs, rng):
        if t2 <= t1:
            continue
        tri = partition_measures(pair, 1e-6, t1, t2, resolution)
        i1 = int(round(t1 / traj.h))
        i2 = int(round(t2 / traj.h))
        rep.record((float(t1), float(t2)), m0[i2],
                   m0[i1] * math.exp(pair.M_b * tri.mu_minus))
    return rep


def _runs(labels):
    """Maximal runs of a constant label: list of (start, end, label)."""
    out = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            out.append((start, i - 1, labels[start]))
            start = i
    return out


def check_lemma3(traj, pair, eta, min_run=3, tolerance=REL_TOL):
    """Single-region case bounds on maximal constant-label runs."""
    rep = OracleReport("lemma3_case_bounds", tolerance=tolerance)
    grid, m0 = maximal_function(traj, pair.tau_max)
    absx = np.abs(traj.states).max(axis=1)
    labels = _labels_on_grid(traj, pair, eta)
    delta = 1.0 - eta / (2.0 * pair.M_a)
    for i1, i2, label in _runs(list(labels)):
        if i2 - i1 < min_run:
            continue
        t1, t2 = grid[i1], grid[i2]
        span = t2 - t1
        if label == LABEL_PLUS:
            rhs = m0[i1] - (m0[i1] - absx[i1]) * math.exp(-pair.M_a * span)
        elif label == LABEL_ETA:
            # the whole run is strongly stable, so mu_eta = span
            rhs = max(delta * m0[i1], absx[i1] - 0.5 * eta * span * m0[i1])
        else:
            rhs = absx[i1] + m0[i1] * math.expm1(pair.M_b * span)
        rep.record((float(t1), float(t2)), absx[i2], rhs)
    return rep


def check_lemma4(traj, pair, eta, sample_pairs=200, resolution=None, seed=0,
                 tolerance=REL_TOL):
    """Master mixed-region estimate on random (t1, t2) pairs."""
    rep = OracleReport("lemma4_master_inequality", tolerance=tolerance)
    rng = np.random.default_rng(seed)
    grid, m0 = maximal_function(traj, pair.tau_max)
    absx = np.abs(traj.states).max(axis=1)
    delta = 1.0 - eta / (2.0 * pair.M_a)
    for t1, t2 in _sample_pairs(traj, pair, eta, sample_pairs, rng):
        i1 = int(round(t1 / traj.h))
        i2 = int(round(t2 / traj.h))
        if t2 <= t1:
            rep.record((float(t1), float(t2)), absx[i1], m0[i1])
            continue
        tri = partition_measures(pair, eta, t1, t2, resolution)
        inner = max(delta * m0[i1], absx[i1] - 0.5 * eta * tri.mu_eta * m0[i1])
        rhs = m0[i1] * math.exp(pair.M_b * tri.mu_minus) \
            - (m0[i1] - inner) * math.exp(-pair.M_a * tri.mu_plus)
        rep.record((float(t1), float(t2)), absx[i2], rhs)
    return rep


def check_theorem1_envelope(traj, cert, tolerance=REL_TOL):
    """Uniform bound K*max|phi| and, when a rate is certified, the
    exponential envelope, with constants rebuilt from the trajectory."""
    rep = OracleReport("theorem1_envelope", tolerance=tolerance)
    if cert.verdict != "certified":
        raise ValueError("certificate is not certified")
    grid, m0 = maximal_function(traj, cert.tau_max)
    absx = np.abs(traj.states).max(axis=1)
    phi_max = traj.history.max_abs(cert.tau_max, traj.h)
    span = cert.window_span
    m0_at_windows = []
    for tk in cert.window_times():
        if tk > grid[-1] + 1e-12:
            break
        m0_at_windows.append(m0[min(int(round(tk / traj.h)), len(m0) - 1)])
    # the transient constant covers only the windows before settling;
    # beyond k* the certificate itself guarantees contraction
    k_star = settling_index(cert)
    k_prime, K, k_tilde = theorem1_constants(cert, m0_at_windows[:k_star + 1])
    def record_envelope(rhs, tag):
        rep.checks += len(grid)
        tol = np.maximum(ABS_TOL, rep.tolerance * np.maximum(absx, np.abs(rhs)))
        for i in np.flatnonzero(absx > rhs + tol):
            rep.violations.append(
                {"where": (tag, float(grid[i])), "lhs": float(absx[i]),
                 "rhs": float(np.broadcast_to(rhs, absx.shape)[i]),
                 "slack": float(np.broadcast_to(rhs, absx.shape)[i] - absx[i])})

    record_envelope(np.full(len(grid), K * phi_max), "uniform")
    if cert.alpha is not None and k_tilde is not None and phi_max > 0.0:
        record_envelope(k_tilde * phi_max * np.exp(-cert.alpha * grid), "exp")
    return rep


def oracle_battery(traj, pair, eta, cert=None, seed=0, tolerance=REL_TOL):
    """Run every lemma check (and the envelope when certified)."""
    reports = [
        check_lemma1(traj, pair, eta, tolerance=tolerance),
        check_lemma2(traj, pair, seed=seed, tolerance=tolerance),
        check_lemma3(traj, pair, eta, tolerance=tolerance),
        check_lemma4(traj, pair, eta, seed=seed, tolerance=tolerance),
    ]
    if cert is not None and cert.verdict == "certified":
        reports.append(check_theorem1_envelope(traj, cert, tolerance=tolerance))
    return reports
