"""Sweep eta for the switched scalar pair and print the certified rate.

Shows how the certified decay rate alpha trades off against the margin
threshold: larger eta shrinks the strongly stable set but widens the gap
between C* and eta/2.
"""

import numpy as np

from halanay_cert import check_eta_condition
from halanay_cert.config import load_config

CONFIG = "configs/switched_scalar.json"

if __name__ == "__main__":
    cfg = load_config(CONFIG)
    pair = cfg.pair
    print(f"{'eta':>8} {'verdict':>14} {'C*':>10} {'alpha':>12}")
    for eta in np.linspace(0.02, 0.199, 12):
        cert = check_eta_condition(pair, float(eta), 0.0, 1, 40.0, 1e-3)
        alpha = "-" if cert.alpha is None else f"{cert.alpha:.6g}"
        print(f"{eta:>8.4f} {cert.verdict:>14} {cert.C_star_est:>10.6f} {alpha:>12}")
