import cmath
import math

import numpy as np
import pytest

import oracles
from wigner_tunnel.errors import BranchPointError
from wigner_tunnel.specfun import big_w
from wigner_tunnel.transients import (
    delta_offshell_T,
    delta_transient_J,
    discontinuity_check_delta,
    physical_sqrt_minus,
    sqrt_minus_i_t,
)

# frozen from the 30-digit resolvent contour oracle
# (tests/oracles.py: resolvent_transient_J)
FROZEN_J = {
    (2.0, 1.0, 1.3, 8.0): 0.000955978028609136 - 0.001990159915897224j,
    (2.0, 1.0, 1.3, 40.0): -8.435196750727477e-05 - 0.00019167771937414412j,
}


class TestOffShell:
    def test_on_shell_reduction(self):
        # 1 + v0/(2 sqrt(-eps)) must equal a(kappa) = 1 + i v0 / (2 kappa)
        v0, kappa = 2.0, 1.0
        tau = delta_offshell_T(v0, kappa ** 2)
        a = v0 / (2 * math.pi * tau)
        assert a == pytest.approx(1 + 1j, rel=1e-14)
        # and the S-matrix element assembles to 1/a
        s_pp = 1 - (1j * math.pi / kappa) * tau
        assert s_pp == pytest.approx(1 / (1 + 1j), rel=1e-14)

    def test_high_energy_limit(self):
        tau = delta_offshell_T(2.0, 1e10)
        assert tau == pytest.approx(2.0 / (2 * math.pi), rel=1e-4)

    def test_branch_consistency(self):
        # upper-lip rule against the principal sheet approached from above
        v0, eps = 2.0, 1.0
        by_rule = delta_offshell_T(v0, eps)
        by_limit = delta_offshell_T(v0, complex(eps, 1e-12))
        assert abs(by_rule - by_limit) < 1e-11

    def test_branch_point_raises(self):
        with pytest.raises(BranchPointError):
            delta_offshell_T(2.0, 0.0)

    def test_sqrt_branch_values(self):
        assert physical_sqrt_minus(4.0) == pytest.approx(-2j, abs=1e-15)
        s = physical_sqrt_minus(-4.0 + 0j)
        assert s == pytest.approx(2.0, abs=1e-15)
        root = sqrt_minus_i_t(2.0)
        assert root.real < 0 and root.imag > 0
        assert root ** 2 == pytest.approx(-2j, rel=1e-14)


class TestTransientJ:
    def test_frozen_resolvent_oracle(self):
        for (v0, k, k0, t), ref in FROZEN_J.items():
            res = delta_transient_J(v0, k, k0, t)
            assert res.J == pytest.approx(ref, rel=1e-8)

    def test_live_resolvent_oracle(self):
        # the oracle subtracts two large on-shell terms, costing it a few
        # digits; 5e-9 is its precision floor, not the implementation's
        ref = oracles.resolvent_transient_J(2.0, 1.0, 1.3, 8.0)
        res = delta_transient_J(2.0, 1.0, 1.3, 8.0)
        assert res.J == pytest.approx(ref, rel=5e-9)

    def test_equivalent_groupings(self):
        for (k, k0, t) in ((1.0, 1.3, 8.0), (0.7, 1.9, 30.0)):
            printed = delta_transient_J(2.0, k, k0, t).J
            fraction = delta_transient_J(2.0, k, k0, t, recombined=True).J
            assert abs(printed - fraction) <= 1e-10 * max(1.0, abs(printed))

    def test_degenerate_direction_continuous(self):
        base = delta_transient_J(2.0, 1.0, 1.0, 50.0).J
        near = delta_transient_J(2.0, 1.0, 1.0 + 5e-5, 50.0).J
        assert abs(base - near) < 5e-3 * abs(base)

    def test_time_scaling_exponent(self):
        # |J| ~ t^(-3/2) over a decade of large t (units of 1/v0^2)
        ts = np.geomspace(25.0, 2500.0, 30)
        js = np.array([abs(delta_transient_J(2.0, 1.0, 1.0, t).J) for t in ts])
        slope = np.polyfit(np.log(ts), np.log(js), 1)[0]
        assert slope == pytest.approx(-1.5, abs=0.02)

    def test_ratio_to_leading_term(self):
        res = delta_transient_J(2.0, 1.0, 1.0, 2500.0)
        assert abs(res.ratio - 1.0) < 0.02
        res2 = delta_transient_J(2.0, 0.8, 1.4, 4000.0)
        assert abs(res2.ratio - 1.0) < 0.02

    def test_asymptotic_w_reproduces_leading_term(self):
        # replacing each W by i/sqrt(pi) (1 + 1/(2 z^2)) inside the bracket
        # reproduces the t^(-3/2) leading term algebraically
        v0, k, k0, t = 2.0, 0.9, 1.2, 1.0e5
        isqrtpi = 1.0 / math.sqrt(math.pi)
        sq = sqrt_minus_i_t(t)
        dk, dk0 = k * k + v0 * v0 / 4, k0 * k0 + v0 * v0 / 4

        def w_asym(z):
            return 1j * isqrtpi * (1 + 1 / (2 * z * z))

        zv = 0.5 * v0 * sq
        zk = cmath.sqrt(1j * t * k * k)
        zk0 = cmath.sqrt(1j * t * k0 * k0)
        bracket = (w_asym(zv) / (dk * dk0)
                   + (w_asym(zk) / dk - w_asym(zk0) / dk0) / (k * k - k0 * k0))
        phase = cmath.exp(0.5j * t * (k * k + k0 * k0))
        j_asym = v0 * v0 / (4 * math.pi * sq) * phase * bracket
        lead = delta_transient_J(v0, k, k0, t).leading_term
        assert j_asym == pytest.approx(lead, rel=1e-4)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            delta_transient_J(2.0, 1.0, 1.0, -1.0)
        with pytest.raises(ZeroDivisionError):
            delta_transient_J(2.0, 0.0, 1.0, 5.0)

    def test_wrong_branch_would_not_decay(self):
        # the principal root of -it picks up the Stokes term 2 z e^{-z^2}
        # whose modulus stays of order |z|; this is why the branch with
        # negative real part is forced
        t = 400.0
        z_bad = 0.5 * 2.0 * cmath.sqrt(-1j * t)
        stokes = 2 * z_bad * cmath.exp(-z_bad * z_bad)
        assert abs(stokes) > 10.0
        good = abs(big_w(0.5 * 2.0 * sqrt_minus_i_t(t)) - 1j / math.sqrt(math.pi))
        assert good < 1e-3


class TestDiscontinuity:
    def test_identity_over_kappa_grid(self):
        for kappa in np.linspace(0.2, 6.0, 20):
            lhs, rhs = discontinuity_check_delta(2.0, 0.7, 1.1, float(kappa))
            assert abs(lhs - rhs) < 1e-12

    def test_positive_diagonal(self):
        for kappa in (0.3, 1.0, 4.0):
            tau = delta_offshell_T(2.0, kappa ** 2)
            d_diag = 2.0 * abs(tau) ** 2
            assert d_diag >= 0.0

    def test_large_kappa_decay(self):
        # both sides vanish like 1/kappa at high energy
        lhs10, rhs10 = discontinuity_check_delta(2.0, 0.7, 1.1, 10.0)
        lhs100, rhs100 = discontinuity_check_delta(2.0, 0.7, 1.1, 100.0)
        assert lhs100 / lhs10 == pytest.approx(0.1, rel=0.2)
        assert abs(lhs100 - rhs100) < 1e-14
