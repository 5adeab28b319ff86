"""Command-line front end.

    halanay-cert <measure|certify|simulate|sync|periodic>
                 --config <path> [--out <dir>] [--seed <n>] [--tolerance <r>]

Exit codes are a stable contract:
  0 success / certified, 1 refuted, 2 config error, 3 evaluation error,
  4 inconclusive (or horizon too short), 5 integration overflow.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import certifier, ddesim, oracle
from .certifier import CERTIFIED, HorizonError, INCONCLUSIVE, REFUTED
from .coeff import ConfigError
from .config import load_config, make_histories, network_pairs
from .ddesim import IntegrationOverflow, NetworkSpec, ScalarDDE
from .expressions import EvaluationError, ExprError
from .svg import polyline_svg

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_CONFIG = 2
EXIT_EVAL = 3
EXIT_INCONCLUSIVE = 4
EXIT_OVERFLOW = 5

_VERDICT_EXIT = {CERTIFIED: EXIT_OK, REFUTED: EXIT_REFUTED,
                 INCONCLUSIVE: EXIT_INCONCLUSIVE}


def _fmt(x):
    return repr(float(x))


def _write_series_csv(path, times, values, header="t,value"):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for t, v in zip(times, values):
            fh.write(f"{_fmt(t)},{_fmt(v)}\n")


def _write_traj_csv(path, traj):
    n = traj.n
    with open(path, "w") as fh:
        fh.write("t," + ",".join(f"x{i + 1}" for i in range(n)) + "\n")
        for t, row in zip(traj.grid, traj.states):
            fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in row) + "\n")


class _Out:
    def __init__(self, cfg, override):
        d = override or cfg.outputs.get("dir", "out")
        self.dir = Path(d)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.formats = set(cfg.outputs.get("formats", ["csv", "json"]))

    def path(self, name):
        return self.dir / name

    def series(self, name, times, values, title=""):
        if "csv" in self.formats:
            _write_series_csv(self.path(name + ".csv"), times, values)
        if "svg" in self.formats:
            self.path(name + ".svg").write_text(polyline_svg(times, values, title))

    def json(self, name, payload):
        if "json" in self.formats:
            self.path(name + ".json").write_text(json.dumps(payload, indent=2))


def _certify_params(cfg):
    c = cfg.certify
    if not c:
        raise ConfigError("config has no certify block")
    etas = c.get("eta_grid") or [c.get("eta")]
    if etas == [None]:
        raise ConfigError("certify needs eta or eta_grid")
    ns = list(range(1, int(c["N_max"]) + 1)) if "N_max" in c else [int(c.get("N", 1))]
    return ([float(e) for e in etas], ns, float(c.get("t0", 0.0)),
            float(c["horizon"]), c.get("resolution"),
            c.get("divergence_threshold"))


def _best_certificate(cfg):
    """Sweep eta x N; return the passing certificate with the largest decay
    rate, else the last result."""
    etas, ns, t0, horizon, resolution, threshold = _certify_params(cfg)
    pair = cfg.pair
    best = last = None
    for eta in etas:
        for n in ns:
            cert = certifier.check_eta_condition(
                pair, eta, t0, n, horizon, resolution, threshold)
            last = cert
            if cert.verdict == CERTIFIED:
                if best is None or (cert.alpha or 0) > (best.alpha or 0):
                    best = cert
    return best or last


def cmd_measure(cfg, out):
    etas, ns, t0, horizon, resolution, _ = _certify_params(cfg)
    eta, n = etas[0], ns[0]
    pair = cfg.pair
    span = (n + 1) * pair.tau_max
    n_windows = int(math.floor(horizon / span))
    rows = [certifier.window_ratio(pair, eta, t0, n, k, resolution)
            for k in range(n_windows)]
    print(f"{'k':>4} {'mu_eta':>12} {'mu_minus':>12} {'mu_plus':>12} {'ratio':>12}")
    for w in rows:
        print(f"{w.k:>4} {w.mu_eta:>12.6f} {w.mu_minus:>12.6f} "
              f"{w.mu_plus:>12.6f} {w.ratio:>12.6f}")
    if "csv" in out.formats:
        with open(out.path("measures.csv"), "w") as fh:
            fh.write("k,mu_eta,mu_minus,mu_plus,ratio\n")
            for w in rows:
                fh.write(f"{w.k},{_fmt(w.mu_eta)},{_fmt(w.mu_minus)},"
                         f"{_fmt(w.mu_plus)},{_fmt(w.ratio)}\n")
            fh.write(f"total,{_fmt(sum(w.mu_eta for w in rows))},"
                     f"{_fmt(sum(w.mu_minus for w in rows))},"
                     f"{_fmt(sum(w.mu_plus for w in rows))},\n")
    return EXIT_OK


def cmd_certify(cfg, out):
    cert = _best_certificate(cfg)
    out.json("report", cert.as_dict())
    print(f"verdict: {cert.verdict}")
    print(f"eta={cert.eta} N={cert.N} C*~{cert.C_star_est:.6g} "
          f"(threshold eta/2={cert.eta / 2:.6g})")
    if cert.alpha is not None:
        print(f"decay rate alpha={cert.alpha:.6g} (lambda0={cert.lambda0:.6g})")
    return _VERDICT_EXIT[cert.verdict]


def _sim_params(cfg):
    s = cfg.simulate
    if not s:
        raise ConfigError("config has no simulate block")
    T, h = float(s["T"]), float(s["h"])
    rng = np.random.default_rng(cfg.seed)
    histories = make_histories(s.get("histories", ["random:1:1.0"]),
                               cfg.system.n, cfg.system.tau_max, rng)
    return T, h, histories


def cmd_simulate(cfg, out, tolerance):
    T, h, histories = _sim_params(cfg)
    cert = None
    if cfg.certify:
        cert = _best_certificate(cfg)
        out.json("report", cert.as_dict())
    pair = cfg.pair
    eta = cert.eta if cert is not None else None
    reports = []
    finals = []
    for i, hist in enumerate(histories):
        traj = ddesim.integrate(cfg.system, hist, T, h)
        if "csv" in out.formats:
            _write_traj_csv(out.path(f"traj_{i:02d}.csv"), traj)
        grid, m0 = ddesim.maximal_function(traj, cfg.system.tau_max)
        out.series(f"m0_{i:02d}", grid, m0, title=f"M0, run {i}")
        finals.append(float(np.abs(traj.states[-1]).max()))
        if cert is not None and cert.verdict == CERTIFIED \
                and isinstance(cfg.system, ScalarDDE):
            battery = oracle.oracle_battery(traj, pair, eta, cert,
                                            seed=cfg.seed + i,
                                            tolerance=tolerance)
            reports.extend({"run": i, **r.as_dict()} for r in battery)
        print(f"run {i}: |x({T})| = {finals[-1]:.6g}")
    out.json("simulate", {"final_abs": finals, "oracles": reports})
    return EXIT_OK


def cmd_sync(cfg, out, tolerance):
    T, h, histories = _sim_params(cfg)
    if len(histories) < 2:
        raise ConfigError("sync requires at least 2 histories")
    trajs = [ddesim.integrate(cfg.system, hist, T, h) for hist in histories]
    finals = {}
    for i in range(len(trajs)):
        for j in range(i + 1, len(trajs)):
            grid, z = ddesim.sync_error(trajs[i], trajs[j])
            out.series(f"z_{i:02d}_{j:02d}", grid, z,
                       title=f"sync error runs {i},{j}")
            finals[f"{i},{j}"] = float(z[-1])
            print(f"z_{i}{j}({T}) = {z[-1]:.6g}")
    out.json("sync", {"final_z": finals})
    return EXIT_OK


def cmd_periodic(cfg, out, tolerance):
    system = cfg.system
    omega = getattr(system, "omega", None)
    if omega is None:
        raise ConfigError("periodic command requires a system with omega")
    T, h, histories = _sim_params(cfg)
    check = None
    if cfg.certify:
        etas, ns, *_rest = _certify_params(cfg)
        resolution = cfg.certify.get("resolution")
        check = certifier.check_periodic_condition(system, etas[0], ns[0],
                                                   resolution)
        print(f"periodic condition: verdict={check.verdict} "
              f"lhs={check.lhs:.6g} mu_bar_eta={check.mu_bar_eta:.6g} "
              f"mu_bar_minus={check.mu_bar_minus:.6g}")
    traj = ddesim.integrate(system, histories[0], T, h)
    ts, v = ddesim.periodic_residual(traj, omega)
    out.series("residual", ts, v, title="periodicity residual")
    rate = ddesim.fit_decay_rate(ts, v, t_start=omega)
    print(f"fitted residual decay rate: {rate:.6g}")
    # last full period as the extracted orbit
    mask = traj.grid >= traj.grid[-1] - omega - 1e-12
    if "csv" in out.formats:
        with open(out.path("orbit.csv"), "w") as fh:
            fh.write("t," + ",".join(f"x{i + 1}" for i in range(traj.n)) + "\n")
            for t, row in zip(traj.grid[mask], traj.states[mask]):
                fh.write(_fmt(t) + "," + ",".join(_fmt(x) for x in row) + "\n")
    payload = {"fitted_rate": rate,
               "residual_final": float(v[-1])}
    if check is not None:
        payload["condition"] = check.as_dict()
    out.json("periodic", payload)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="halanay-cert",
        description="Stability certification and simulation for delay systems "
                    "with time-varying coefficients and delays.")
    ap.add_argument("command",
                    choices=["measure", "certify", "simulate", "sync", "periodic"])
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--seed", type=int, default=None,
                    help="override the config seed")
    ap.add_argument("--tolerance", type=float, default=oracle.REL_TOL,
                    help="relative tolerance for the trajectory checks")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        out = _Out(cfg, args.out)
        if args.command == "measure":
            return cmd_measure(cfg, out)
        if args.command == "certify":
            return cmd_certify(cfg, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out, args.tolerance)
        if args.command == "sync":
            return cmd_sync(cfg, out, args.tolerance)
        return cmd_periodic(cfg, out, args.tolerance)
    except (ConfigError, ExprError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EvaluationError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL
    except HorizonError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except IntegrationOverflow as exc:
        print(f"integration aborted: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW


if __name__ == "__main__":
    sys.exit(main())
