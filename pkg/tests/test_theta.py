import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gm2 import scalar_core as sc
from gm2 import theta as th
from gm2.errors import DomainError, InvalidPair

THETA_PAIR = 4.163019258282555  # c = 0.5, h0 = 0.3


def theta_quad_oracle(pair, dps=60):
    """Theta as int dh / h' over [h0, h1], evaluated in extended precision.

    h = mid - half cos(psi) removes the endpoint square roots; Gauss-Legendre
    then converges quickly without sampling the endpoints themselves.
    """
    with mpmath.workdps(dps):
        c, a = mpmath.mpf(pair.c), mpmath.mpf(pair.h0)
        E = mpmath.exp(-a * a / 2) + c * a
        phi = lambda t: mpmath.exp(-t * t / 2) + c * t - E  # noqa: E731
        cr = sc.critical_radii(pair.c)
        b = mpmath.findroot(phi, (mpmath.mpf(cr.m1), mpmath.mpf(cr.m2) + mpmath.mpf(1e-12)),
                            solver="anderson")
        mid, half = (a + b) / 2, (b - a) / 2

        def integrand(psi):
            h = mid - half * mpmath.cos(psi)
            return half * mpmath.sin(psi) / mpmath.sqrt(-2 * mpmath.log(E - c * h) - h * h)

        return float(mpmath.quad(integrand, mpmath.linspace(0, mpmath.pi, 5), method="gauss-legendre"))


def test_example_value():
    res = th.theta_eval(sc.good_pair_from_h0(0.5, 0.3))
    assert res.value == pytest.approx(THETA_PAIR, abs=1e-11)
    assert 0 < res.est_error < 1e-10
    assert not res.divergent


@pytest.mark.parametrize("c,u", [(0.01, 0.2), (0.1, 0.5), (0.3, 0.1), (0.5, 0.7), (0.6, 0.4)])
def test_against_extended_precision(c, u):
    dom = sc.h0_domain(c)
    pair = sc.good_pair_from_h0(c, dom.lower + u * (dom.m1 - dom.lower), dom)
    assert th.theta_eval(pair).value == pytest.approx(theta_quad_oracle(pair), rel=1e-10)


@given(c=st.floats(min_value=1e-3, max_value=0.6), u=st.floats(min_value=0.02, max_value=0.98))
@settings(max_examples=40, deadline=None)
def test_schemes_agree(c, u):
    dom = sc.h0_domain(c)
    pair = sc.good_pair_from_h0(c, dom.lower + u * (dom.m1 - dom.lower), dom)
    a = th.theta_eval(pair, th.QuadratureConfig("trig"))
    b = th.theta_eval(pair, th.QuadratureConfig("de"))
    assert a.value == pytest.approx(b.value, rel=1e-10)
    assert a.value > math.pi


def test_divergent_sentinel():
    dom = sc.h0_domain(0.6)
    res = th.theta_eval(sc.good_pair_from_h0(0.6, dom.lower, dom))
    assert res.divergent and math.isinf(res.value)


def test_invalid_pair_rejected():
    bad = sc.GoodPair(0.5, 0.3, 0.2, sc.phi(0.5, 0.3))
    with pytest.raises(InvalidPair):
        th.theta_eval(bad)


def test_config_validation():
    with pytest.raises((ValueError, DomainError)):
        th.QuadratureConfig(scheme="simpson")
    with pytest.raises((ValueError, DomainError)):
        th.QuadratureConfig(max_levels=0)


@pytest.mark.parametrize("c", [0.1, 0.3, 0.5])
def test_small_r_limit(c):
    m1 = sc.critical_radii(c).m1
    assert th.theta_small_r_limit(c) == pytest.approx(math.pi / math.sqrt(1 - m1 * m1), rel=1e-15)
    dom = sc.h0_domain(c)
    pair = sc.good_pair_from_h0(c, dom.m1 - 1e-5 * (dom.m1 - dom.lower), dom)
    assert th.theta_eval(pair).value == pytest.approx(th.theta_small_r_limit(c), rel=1e-3)


def test_h0_grid():
    dom = sc.h0_domain(0.6)
    grid = th.h0_grid(0.6, 10)
    assert grid[0] == dom.lower
    assert grid[-1] < dom.m1
    assert np.all(np.diff(grid) > 0)


def test_scan_min_theta():
    scan = th.scan_min_theta(0.3, 32)
    assert scan.min - math.pi == pytest.approx(th.theta_small_r_limit(0.3) - math.pi, rel=1e-3)
    assert scan.max_est_error < 1e-10
    d = scan.to_dict()
    assert len(d["theta_values"]) == 32


def test_scan_thread_invariance():
    a = th.scan_min_theta(0.1, 16, workers=1)
    b = th.scan_min_theta(0.1, 16, workers=4)
    assert a.theta_values == b.theta_values


def test_c_r_limit():
    r = 0.4
    assert th.c_r_limit(r) == pytest.approx(sc.mean_g(0.0, r), rel=1e-15)
    assert th.c_r_limit(r) == pytest.approx((1 - math.exp(-r * r / 2)) / r, rel=1e-14)


@pytest.mark.parametrize("mode", [th.InR(0.3), th.InC(0.2, 0.5)])
def test_monotonicity(mode):
    rep = th.monotonicity_scan(mode, n=16)
    assert rep.ok
    assert np.all(np.diff(rep.theta_values) > 0)


def test_monotonicity_domain_errors():
    with pytest.raises(DomainError):
        th.monotonicity_scan(th.InR(1.2))
    with pytest.raises(DomainError):
        th.monotonicity_scan(th.InC(0.6, 0.5))
    with pytest.raises(DomainError):
        th.monotonicity_scan(th.InC(0.2, 0.5, c_star=0.1))


def test_emptiness():
    rep = th.pi_over_k_emptiness(0.3, 32, 8)
    assert rep.certified
    assert rep.distances[1] == pytest.approx(rep.scan.min - math.pi, rel=1e-12)


def test_schemes_within_combined_error():
    dom = sc.h0_domain(0.5)
    for u in (0.05, 0.5, 0.95):
        pair = sc.good_pair_from_h0(0.5, dom.lower + u * (dom.m1 - dom.lower), dom)
        a = th.theta_eval(pair, th.QuadratureConfig("trig"))
        b = th.theta_eval(pair, th.QuadratureConfig("de"))
        assert abs(a.value - b.value) <= a.est_error + b.est_error + 1e-13 * a.value


def test_above_small_r_limit_along_family():
    c = 0.3
    limit = th.theta_small_r_limit(c)
    scan = th.scan_min_theta(c, 24)
    assert all(v >= limit * (1 - 1e-12) for v in scan.theta_values)
