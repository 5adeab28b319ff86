import json
import math

import numpy as np
import pytest

from halanay_cert import (
    CoefficientPair,
    PiecewiseFunction,
    check_eta_condition,
    check_periodic_condition,
    common_pair,
    ratio_from_measures,
    theorem1_constants,
    window_ratio,
)
from halanay_cert.certifier import CERTIFIED, HorizonError, INCONCLUSIVE, REFUTED
from halanay_cert.coeff import ConfigError

from conftest import constant_pair, switched_pair


class TestRatioFormula:
    def test_reference_values(self):
        # frozen regression values for the switched benchmark measures
        assert ratio_from_measures(0.004, 0.5, 1.0, 1.2, 1, 1.0) \
            == pytest.approx(0.0711, abs=5e-4)
        assert ratio_from_measures(0.002, 0.5, 1.0, 1.2, 1, 1.0) \
            == pytest.approx(0.0355, abs=5e-4)

    def test_zero_over_zero_convention(self):
        assert ratio_from_measures(0.0, 0.0, 1.0, 1.0, 1, 1.0) == 0.0

    def test_vanishing_denominator_is_inf(self):
        assert math.isinf(ratio_from_measures(0.1, 0.0, 1.0, 1.0, 1, 1.0))

    def test_denominator_caps_at_inverse_Ma(self):
        r_small = ratio_from_measures(0.01, 0.2, 4.0, 1.0, 1, 1.0)
        r_large = ratio_from_measures(0.01, 5.0, 4.0, 1.0, 1, 1.0)
        # both are capped by 1/M_a = 0.25 once mu_eta exceeds it
        assert r_large == pytest.approx(
            ratio_from_measures(0.01, 0.25, 4.0, 1.0, 1, 1.0))
        assert r_small > r_large


class TestWindowRatio:
    def test_switched_windows_are_periodic(self, pair_41):
        w0 = window_ratio(pair_41, 0.199, 0.0, 1, 0, 1e-3)
        w5 = window_ratio(pair_41, 0.199, 0.0, 1, 5, 1e-3)
        assert w0.mu_eta == pytest.approx(0.5, abs=1e-5)
        assert w0.mu_minus == pytest.approx(0.002, abs=1e-5)
        assert w0.ratio == pytest.approx(w5.ratio, abs=1e-4)
        assert w0.ratio == pytest.approx(0.0355, abs=5e-4)

    def test_requires_positive_N(self, pair_41):
        with pytest.raises(ValueError):
            window_ratio(pair_41, 0.1, 0.0, 0, 0)


class TestCheckEtaCondition:
    def test_switched_certifies(self, pair_41):
        cert = check_eta_condition(pair_41, 0.199, 0.0, 1, 40.0, 1e-3)
        assert cert.verdict == CERTIFIED
        assert cert.C_star_est < cert.eta / 2
        assert cert.alpha is not None and cert.alpha > 0
        assert cert.lambda0 is not None and 0 < cert.lambda0 < 1
        assert cert.delta == pytest.approx(1 - 0.199 / 2)

    def test_constant_stable_certifies_with_empty_minus(self):
        pair = constant_pair(2.0, 1.0)
        cert = check_eta_condition(pair, 0.9, 0.0, 1, 40.0, 1e-3)
        assert cert.verdict == CERTIFIED
        assert all(w.mu_minus == 0.0 for w in cert.windows)
        assert cert.C_star_est == 0.0

    def test_unstable_refuted(self):
        # margin is -0.2 everywhere: mu_eta = 0 in every window
        pair = constant_pair(1.0, 1.2)
        cert = check_eta_condition(pair, 0.1, 0.0, 1, 40.0, 1e-3)
        assert cert.verdict == REFUTED

    def test_short_horizon_raises(self, pair_41):
        with pytest.raises(HorizonError):
            check_eta_condition(pair_41, 0.199, 0.0, 1, 4.0, 1e-3)

    def test_eta_bounds_validated(self, pair_41):
        with pytest.raises(ValueError):
            check_eta_condition(pair_41, -0.1, 0.0, 1, 40.0)
        with pytest.raises(ConfigError):
            check_eta_condition(pair_41, 2.5, 0.0, 1, 40.0)

    def test_divergence_threshold_gates_verdict(self, pair_41):
        cert = check_eta_condition(pair_41, 0.199, 0.0, 1, 40.0, 1e-3,
                                   divergence_threshold=1e6)
        assert cert.verdict == INCONCLUSIVE

    def test_certificate_json_contract(self, pair_41):
        cert = check_eta_condition(pair_41, 0.199, 0.0, 1, 40.0, 1e-3)
        payload = json.loads(cert.to_json())
        assert set(payload) == {
            "eta", "t0", "N", "tau_max", "M_a", "M_b", "delta", "windows",
            "C_star_est", "verdict", "epsilon", "C", "lambda0", "alpha", "K",
        }
        assert set(payload["windows"][0]) == {
            "k", "mu_eta", "mu_minus", "mu_plus", "ratio"}
        assert payload["verdict"] == "certified"


class TestCommonPair:
    def test_single_pair_passthrough(self, pair_41):
        assert common_pair([pair_41]) is pair_41

    def test_pointwise_minimum_margin(self):
        p1 = constant_pair(2.0, 1.0)   # margin 1
        p2 = CoefficientPair(a=PiecewiseFunction.from_expr("2+sin(pi*t)"),
                             b=PiecewiseFunction.constant(1.0),
                             M_a=3.0, M_b=1.0, tau_max=1.0)
        common = common_pair([p1, p2])
        ts = np.linspace(0.0, 4.0, 200)
        m = common.a(ts) - np.abs(common.b(ts))
        expected = np.minimum(2.0 + np.sin(np.pi * ts), 2.0) - 1.0
        np.testing.assert_allclose(m, expected, atol=1e-12)
        assert common.M_a == 3.0

    def test_ties_resolve_to_first(self):
        p1 = constant_pair(2.0, 1.0)
        p2 = constant_pair(3.0, 2.0, M_a=3.0, M_b=2.0)  # same margin 1
        common = common_pair([p1, p2])
        assert common.a(0.0) == 2.0
        assert common.b(0.0) == 1.0

    def test_mismatched_tau_max_rejected(self):
        with pytest.raises(ConfigError):
            common_pair([constant_pair(2.0, 1.0, tau_max=1.0),
                         constant_pair(2.0, 1.0, tau_max=2.0)])


class TestTheorem1Constants:
    def _cert(self):
        return check_eta_condition(switched_pair(), 0.199, 0.0, 1, 40.0, 1e-3)

    def test_nondecreasing_m0_gives_unit_k_prime(self):
        cert = self._cert()
        k_prime, K, k_tilde = theorem1_constants(cert, [1.0, 0.9, 0.8])
        assert k_prime == 1.0
        assert K == pytest.approx(math.exp(cert.M_b * cert.N * cert.tau_max))
        assert k_tilde is not None and k_tilde >= 1.0

    def test_transient_growth_enters_k(self):
        cert = self._cert()
        k_prime, K, _ = theorem1_constants(cert, [1.0, 1.5, 0.8])
        assert k_prime == 1.5
        assert K == pytest.approx(1.5 * math.exp(cert.M_b))

    def test_requires_certified(self):
        pair = constant_pair(1.0, 1.2)
        cert = check_eta_condition(pair, 0.1, 0.0, 1, 40.0, 1e-3)
        with pytest.raises(ValueError):
            theorem1_constants(cert, [1.0])
