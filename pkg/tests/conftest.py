import pathlib

import numpy as np
import pytest

from halanay_cert import CoefficientPair, PiecewiseFunction
from halanay_cert.ddesim import DelaySpec, HistorySegment, ScalarDDE

ROOT = pathlib.Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

SWITCHED_SCALAR = CONFIGS / "switched_scalar.json"
RING3_PERIODIC = CONFIGS / "ring3_periodic.json"


def switched_pair():
    """2-periodic switched coefficients: a = 1, b in {0.8, 1.2, 1}.

    Margin 0.2 on [0, 0.5), -0.2 on [1, 1.002), 0 elsewhere (mod 2).
    """
    b = PiecewiseFunction(
        segments=((0.0, 0.5, "0.8"), (1.0, 1.002, "1.2")),
        default="1",
        period=2.0,
    )
    return CoefficientPair(a=PiecewiseFunction.constant(1.0), b=b,
                           M_a=1.0, M_b=1.2, tau_max=1.0)


def constant_pair(a, b, M_a=None, M_b=None, tau_max=1.0):
    return CoefficientPair(
        a=PiecewiseFunction.constant(a),
        b=PiecewiseFunction.constant(b),
        M_a=M_a if M_a is not None else a,
        M_b=M_b if M_b is not None else abs(b),
        tau_max=tau_max,
    )


def scalar_system(pair, tau="1", mode="clamp"):
    return ScalarDDE(pair, DelaySpec(PiecewiseFunction.from_expr(tau),
                                     pair.tau_max, mode))


def random_history(rng, n=1, tau_max=1.0, amplitude=1.0, knots=8):
    kt = np.concatenate([np.linspace(-tau_max, 0.0, knots + 1)[:-1], [0.0]])
    vals = rng.uniform(-amplitude, amplitude, size=(knots, n))
    vals = np.vstack([vals, vals[-1:]])
    return HistorySegment.piecewise_constant(kt, vals)


@pytest.fixture
def pair_41():
    return switched_pair()
