import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import ndtr

from gm2 import gauss_geom as gg
from gm2.errors import ConvexityViolation, DegenerateBody, OriginNotInterior, ParseError

SQUARE = gg.ConvexPolygon(np.array([[1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0]]))
EDGE_WEIGHT = 0.16519087103401667  # scipy quad along one edge of SQUARE


def edge_quad(a, b):
    """(1/2pi) int over the segment [a, b] of e^{-|x|^2/2} ds by adaptive quadrature."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    L = float(np.hypot(*(b - a)))
    f = lambda s: math.exp(-0.5 * float(np.sum((a + s * (b - a)) ** 2)))  # noqa: E731
    val, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return L * val / (2 * math.pi)


def test_polygon_validation():
    with pytest.raises(DegenerateBody):
        gg.ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    with pytest.raises(DegenerateBody):
        gg.ConvexPolygon(SQUARE.vertices[::-1])
    hull = gg.ConvexPolygon.from_points([[1, 0], [0, 0], [0, 1], [1, 1], [0.5, 0.5], [1, 0.5]])
    assert len(hull.vertices) == 4


def test_square_support():
    assert gg.support_eval(SQUARE, 0.0) == pytest.approx(1.0)
    assert gg.support_eval(SQUARE, math.pi / 4) == pytest.approx(math.sqrt(2))
    h = gg.support_samples(SQUARE, 8)
    assert h.is_even()
    assert h.is_convex(strict=False)


def test_square_measure_per_edge():
    m = gg.boundary_measure_polygon(SQUARE)
    angles = sorted(a for a, _ in m.atoms)
    assert angles == pytest.approx([0, math.pi / 2, math.pi, 3 * math.pi / 2], abs=1e-15)
    v = SQUARE.vertices
    for i, (_, w) in enumerate(m.atoms):
        assert abs(w - edge_quad(v[i], v[(i + 1) % 4])) < 1e-12
        assert abs(w - EDGE_WEIGHT) < 1e-12


def test_edge_closed_form():
    # offset d, span [s_a, s_b]: e^{-d^2/2} (Phi(s_b) - Phi(s_a)) / sqrt(2 pi)
    P = gg.ConvexPolygon(np.array([[2.0, -0.5], [2.0, 3.0], [-1.0, 0.0]]))
    m = gg.boundary_measure_polygon(P)
    expected = math.exp(-2.0) * (ndtr(3.0) - ndtr(-0.5)) / math.sqrt(2 * math.pi)
    assert m.atoms[0][1] == pytest.approx(expected, rel=1e-14)


def test_square_gaussian_area():
    val, _ = integrate.dblquad(lambda y, x: math.exp(-(x * x + y * y) / 2) / (2 * math.pi),
                               -1, 1, -1, 1, epsabs=1e-14, epsrel=1e-13)
    assert gg.gaussian_area(SQUARE) == pytest.approx(val, abs=1e-12)
    assert gg.gaussian_area(SQUARE) == pytest.approx((2 * ndtr(1.0) - 1) ** 2, abs=1e-14)


def test_off_center_triangle_area():
    P = gg.ConvexPolygon(np.array([[2.0, -0.5], [2.0, 3.0], [-1.0, 0.0]]))
    a, b, c = P.vertices

    # integrate over x with exact y-limits of the triangle
    def ylims(x):
        ys = []
        for p, q in ((a, b), (b, c), (c, a)):
            if (p[0] - x) * (q[0] - x) <= 0 and p[0] != q[0]:
                ys.append(p[1] + (x - p[0]) * (q[1] - p[1]) / (q[0] - p[0]))
        return min(ys), max(ys)

    val, _ = integrate.dblquad(lambda y, x: math.exp(-(x * x + y * y) / 2) / (2 * math.pi),
                               -1, 2, lambda x: ylims(x)[0], lambda x: ylims(x)[1],
                               epsabs=1e-13, epsrel=1e-12)
    assert gg.gaussian_area(P) == pytest.approx(val, abs=1e-11)


def test_disk_half_measure():
    R = math.sqrt(2 * math.log(2))
    h = gg.SupportSamples(np.full(64, R))
    assert abs(gg.gaussian_area(h) - 0.5) < 1e-12
    assert gg.total_measure_smooth(h) == pytest.approx(R * math.exp(-R * R / 2), rel=1e-14)


def test_wulff_recovers_square():
    P = gg.wulff_shape(gg.support_samples(SQUARE, 16))
    assert len(P.vertices) == 4
    assert P.area == pytest.approx(4.0, rel=1e-12)


def test_wulff_of_constant_is_regular_polygon():
    P = gg.wulff_shape(gg.SupportSamples(np.ones(16)))
    assert len(P.vertices) == 16
    assert np.allclose(gg.support_samples(P, 16).values, 1.0)


def test_regular_polygon_converges_to_disk():
    R = 1.3
    errs = [abs(gg.total_measure(gg.regular_polygon(n, R)) - R * math.exp(-R * R / 2))
            for n in (64, 256)]
    assert errs[1] < errs[0] / 10


def test_smooth_vs_fine_polygon():
    a, b = 1.5, 0.8
    h = gg.ellipse_support(256, a, b)
    t = np.linspace(0, 2 * math.pi, 20000, endpoint=False)
    P = gg.ConvexPolygon(np.column_stack([a * np.cos(t), b * np.sin(t)]))
    assert gg.total_measure(h) == pytest.approx(gg.total_measure(P), rel=1e-8)
    assert gg.gaussian_area(h) == pytest.approx(gg.gaussian_area(P), rel=1e-7)


def test_density_rejects_nonconvex():
    th = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    with pytest.raises(ConvexityViolation):
        gg.density_smooth(gg.SupportSamples(1 + 0.5 * np.cos(4 * th)))


def test_origin_must_be_interior():
    P = gg.ConvexPolygon(np.array([[1.0, 1.0], [2.0, 1.0], [2.0, 2.0]]))
    with pytest.raises(OriginNotInterior):
        gg.gaussian_area(P)


def test_radial_function_square():
    rho = gg.radial_function(SQUARE, np.array([0.0, math.pi / 4, math.pi]))
    assert rho == pytest.approx([1.0, math.sqrt(2), 1.0], rel=1e-14)


def test_json_readers():
    P = gg.polygon_from_json('{"vertices": [[1,-1],[1,1],[-1,1],[-1,-1]]}')
    assert P.area == pytest.approx(4.0)
    with pytest.raises(ParseError):
        gg.polygon_from_json({"verts": []})
    with pytest.raises(ParseError):
        gg.support_from_json({"n": 3, "values": [1, 1]})


def test_isoperimetric_profile_at_half():
    assert gg.gaussian_isoperimetric_profile(0.5) == pytest.approx(1 / math.sqrt(2 * math.pi))


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_isoperimetric_random(seed):
    P = gg.random_symmetric_polygon(np.random.default_rng(seed))
    rep = gg.isoperimetric_check(P)
    assert 0 < rep.gamma < 1
    assert rep.holds
