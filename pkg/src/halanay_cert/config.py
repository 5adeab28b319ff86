"""Declarative run configuration: one JSON file fully determines a run.

Sections: ``system`` (scalar DDE or delayed network), ``certify``,
``simulate``, ``outputs``, ``seed``.  Unknown keys anywhere are rejected
so typos fail closed.  Piecewise signals serialize as a list of
``{from, to, expr}`` segments plus ``{default, period?}``; a bare string
is shorthand for a single default expression.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .coeff import CoefficientPair, ConfigError, PiecewiseFunction
from .ddesim import (
    DELAY_CLAMP,
    DelaySpec,
    HistorySegment,
    INNER_FUNCTIONS,
    NetworkSpec,
    ScalarDDE,
)

__all__ = ["RunConfig", "load_config", "parse_pwf", "network_pairs",
           "make_histories"]

_HISTORY_KNOTS = 8


def _check_keys(obj, allowed, where):
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def parse_pwf(spec, where="piecewise function"):
    """Build a PiecewiseFunction from its JSON form (or an expression string)."""
    if isinstance(spec, str):
        return PiecewiseFunction.from_expr(spec)
    if isinstance(spec, (int, float)):
        return PiecewiseFunction.constant(spec)
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected string or object, got {type(spec).__name__}")
    _check_keys(spec, {"segments", "default", "period"}, where)
    segments = []
    for i, seg in enumerate(spec.get("segments", [])):
        _check_keys(seg, {"from", "to", "expr"}, f"{where}.segments[{i}]")
        try:
            segments.append((seg["from"], seg["to"], seg["expr"]))
        except KeyError as exc:
            raise ConfigError(f"{where}.segments[{i}] missing {exc}") from None
    return PiecewiseFunction(segments=tuple(segments),
                             default=spec.get("default", "0"),
                             period=spec.get("period"))


def _parse_scalar_system(sys_cfg):
    _check_keys(sys_cfg, {"type", "a", "b", "M_a", "M_b", "tau_max", "tau",
                          "delay_mode"}, "system")
    for key in ("a", "b", "M_a", "M_b", "tau_max", "tau"):
        if key not in sys_cfg:
            raise ConfigError(f"system missing required key {key!r}")
    pair = CoefficientPair(
        a=parse_pwf(sys_cfg["a"], "system.a"),
        b=parse_pwf(sys_cfg["b"], "system.b"),
        M_a=float(sys_cfg["M_a"]),
        M_b=float(sys_cfg["M_b"]),
        tau_max=float(sys_cfg["tau_max"]),
    )
    delay = DelaySpec(parse_pwf(sys_cfg["tau"], "system.tau"),
                      pair.tau_max, sys_cfg.get("delay_mode", DELAY_CLAMP))
    return ScalarDDE(pair, delay)


def _parse_network_system(sys_cfg):
    _check_keys(sys_cfg, {"type", "n", "d", "A", "B", "g", "f", "I", "tau",
                          "tau_max", "G", "F", "M_a", "M_b", "omega",
                          "delay_mode"}, "system")
    required = {"n", "d", "A", "B", "g", "f", "I", "tau", "tau_max",
                "G", "F", "M_a", "M_b"}
    for key in required:
        if key not in sys_cfg:
            raise ConfigError(f"system missing required key {key!r}")
    n = int(sys_cfg["n"])

    def vec(name):
        vals = sys_cfg[name]
        if len(vals) != n:
            raise ConfigError(f"system.{name} must have {n} entries")
        return vals

    def mat(name):
        rows = sys_cfg[name]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ConfigError(f"system.{name} must be {n}x{n}")
        return tuple(tuple(parse_pwf(x, f"system.{name}[{i}][{j}]")
                           for j, x in enumerate(row))
                     for i, row in enumerate(rows))

    if sys_cfg["type"] == "periodic_network" and "omega" not in sys_cfg:
        raise ConfigError("periodic_network requires omega")
    return NetworkSpec(
        n=n,
        d=tuple(parse_pwf(x, f"system.d[{i}]") for i, x in enumerate(vec("d"))),
        A=mat("A"),
        B=mat("B"),
        g_names=tuple(vec("g")),
        f_names=tuple(vec("f")),
        I=tuple(parse_pwf(x, f"system.I[{i}]") for i, x in enumerate(vec("I"))),
        tau=mat("tau"),
        tau_max=float(sys_cfg["tau_max"]),
        G=tuple(float(x) for x in vec("G")),
        F=tuple(float(x) for x in vec("F")),
        M_a=float(sys_cfg["M_a"]),
        M_b=float(sys_cfg["M_b"]),
        omega=float(sys_cfg["omega"]) if "omega" in sys_cfg else None,
        delay_mode=sys_cfg.get("delay_mode", DELAY_CLAMP),
    )


@dataclass
class RunConfig:
    system: object
    certify: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def pair(self):
        """The coefficient pair certified for this system: the scalar pair,
        or the pointwise worst row pair of a network."""
        if isinstance(self.system, ScalarDDE):
            return self.system.pair
        from .certifier import common_pair
        return common_pair(network_pairs(self.system))


def load_config(path_or_dict):
    if isinstance(path_or_dict, dict):
        raw = path_or_dict
    else:
        with open(path_or_dict) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path_or_dict}: {exc}") from None
    _check_keys(raw, {"system", "certify", "simulate", "outputs", "seed"},
                "config")
    if "system" not in raw:
        raise ConfigError("config missing 'system'")
    sys_cfg = raw["system"]
    kind = sys_cfg.get("type")
    if kind == "scalar":
        system = _parse_scalar_system(sys_cfg)
    elif kind in ("network", "periodic_network"):
        system = _parse_network_system(sys_cfg)
    else:
        raise ConfigError(f"system.type must be scalar/network/periodic_network, "
                          f"got {kind!r}")

    certify = dict(raw.get("certify", {}))
    _check_keys(certify, {"eta", "eta_grid", "t0", "N", "N_max", "horizon",
                          "resolution", "divergence_threshold"}, "certify")
    simulate = dict(raw.get("simulate", {}))
    _check_keys(simulate, {"T", "h", "histories"}, "simulate")
    outputs = dict(raw.get("outputs", {}))
    _check_keys(outputs, {"dir", "formats"}, "outputs")
    formats = outputs.get("formats", ["csv", "json"])
    bad = set(formats) - {"csv", "svg", "json"}
    if bad:
        raise ConfigError(f"unknown output format(s) {sorted(bad)}")
    return RunConfig(system=system, certify=certify, simulate=simulate,
                     outputs=outputs, seed=int(raw.get("seed", 0)))


class _RowMargin:
    """a or b component of a network row's scalar reduction."""

    def __init__(self, net, i, which):
        self.net = net
        self.i = i
        self.which = which

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        net, i = self.net, self.i
        if self.which == "a":
            out = np.asarray(net.d[i](t_arr), dtype=float) + np.zeros(t_arr.shape)
            for j in range(net.n):
                out = out - net.G[j] * np.abs(net.A[i][j](t_arr))
        else:
            out = np.zeros(t_arr.shape)
            for j in range(net.n):
                out = out + net.F[j] * np.abs(net.B[i][j](t_arr))
        return float(out) if np.isscalar(t) or isinstance(t, float) else out

    def breakpoints_in(self, t1, t2):
        net, i = self.net, self.i
        fns = [net.d[i]] + [net.A[i][j] for j in range(net.n)] \
            + [net.B[i][j] for j in range(net.n)]
        pts = []
        for f in fns:
            if isinstance(f, PiecewiseFunction):
                pts.extend(f.breakpoints_in(t1, t2))
        return pts


def network_pairs(net):
    """Per-row coefficient pairs (d_i - sum G|A_ij|, sum F|B_ij|)."""
    return [
        CoefficientPair(a=_RowMargin(net, i, "a"), b=_RowMargin(net, i, "b"),
                        M_a=net.M_a, M_b=net.M_b, tau_max=net.tau_max)
        for i in range(net.n)
    ]


def make_histories(specs, n_components, tau_max, rng):
    """Expand history specs: numbers, vectors, or ``random:k:amplitude``."""
    out = []
    for spec in specs:
        if isinstance(spec, str):
            parts = spec.split(":")
            if len(parts) != 3 or parts[0] != "random":
                raise ConfigError(f"bad history spec {spec!r}")
            count, amplitude = int(parts[1]), float(parts[2])
            for _ in range(count):
                knot_t = np.concatenate(
                    [np.linspace(-tau_max, 0.0, _HISTORY_KNOTS + 1)[:-1], [0.0]])
                vals = rng.uniform(-amplitude, amplitude,
                                   size=(_HISTORY_KNOTS, n_components))
                vals = np.vstack([vals, vals[-1:]])
                out.append(HistorySegment.piecewise_constant(knot_t, vals))
        elif isinstance(spec, (int, float)):
            out.append(HistorySegment.constant([float(spec)] * n_components))
        elif isinstance(spec, (list, tuple)):
            if len(spec) != n_components:
                raise ConfigError(
                    f"history vector has {len(spec)} entries, need {n_components}")
            out.append(HistorySegment.constant([float(v) for v in spec]))
        else:
            raise ConfigError(f"bad history spec {spec!r}")
    return out
