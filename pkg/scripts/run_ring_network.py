"""End-to-end run of the 3-neuron delayed ring network.

Checks the periodic-orbit condition over one period, integrates the
network from two random histories, and reports the synchronization error
and the periodicity residual decay.
"""

import pathlib
import sys

from halanay_cert.cli import main

CONFIG = pathlib.Path(__file__).resolve().parent.parent / "configs" / "ring3_periodic.json"
OUT = "out/ring3_periodic"

if __name__ == "__main__":
    rc = main(["periodic", "--config", str(CONFIG), "--out", OUT])
    if rc != 0:
        sys.exit(rc)
    sys.exit(main(["sync", "--config", str(CONFIG), "--out", OUT]))
