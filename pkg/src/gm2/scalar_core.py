"""Scalar machinery for the planar Gaussian curvature ODE.

Everything here works with the 2pi-free constant ``c`` of

    e^{-(h'^2 + h^2)/2} (h'' + h) = c,

i.e. ``c = 2*pi*C`` where ``C`` is the prescribed constant density.  The two
scalar functions that govern the problem are

    g(t)   = t e^{-t^2/2}          (maximum e^{-1/2} at t = 1)
    phi(t) = c t + e^{-t^2/2}      (phi' = c - g)

``m1 < 1 < m2`` are the roots of ``g = c``.  A *good pair* ``(h0, h0 + r)`` is
a pair of levels with ``phi(h0) = phi(h0 + r)``, ``phi'(h0) > 0`` and
``phi'(h0 + r) <= 0``: the min/max profile of a nonconstant solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DegenerateConstant, DomainError, InvalidPair

C_MAX = math.exp(-0.5)
MERGE_BAND = 1e-12
Q_BRANCH_BAND = 1e-13
ROOT_MAXITER = 200
_EPS = 2.220446049250313e-16


def g(t: float) -> float:
    """t e^{-t^2/2}."""
    if t < 0:
        raise DomainError(f"g is defined for t >= 0, got {t!r}")
    return t * math.exp(-0.5 * t * t)


def phi(c: float, t: float) -> float:
    return c * t + math.exp(-0.5 * t * t)


def dphi(c: float, t: float) -> float:
    return c - t * math.exp(-0.5 * t * t)


def _root(f, a: float, b: float) -> float:
    # brentq = bisection safeguarding secant/inverse-quadratic steps; the
    # relative tolerance keeps tiny roots (m1 ~ c for small c) accurate.
    return brentq(f, a, b, xtol=1e-300, rtol=4 * _EPS, maxiter=ROOT_MAXITER)


def mean_g(h0: float, r: float) -> float:
    """Mean of g over [h0, h0 + r], computed without cancellation.

    Equals ``(e^{-h0^2/2} - e^{-(h0+r)^2/2}) / r``, the unique ``c`` for which
    ``phi_c(h0) = phi_c(h0 + r)``.
    """
    if r == 0:
        return g(h0)
    return math.exp(-0.5 * h0 * h0) * -math.expm1(-0.5 * r * (2.0 * h0 + r)) / r


def _check_c(c: float) -> None:
    if not (c > 0):
        raise DomainError(f"c must be positive, got {c!r}")
    if abs(c - C_MAX) <= MERGE_BAND:
        raise DegenerateConstant(f"c = {c!r} is the merge point e^(-1/2): m1 = m2 = 1")
    if c > C_MAX:
        raise DomainError(f"c = {c!r} exceeds e^(-1/2); g(t) = c has no root")


@dataclass(frozen=True)
class CriticalRadii:
    c: float
    m1: float
    m2: float


def critical_radii(c: float) -> CriticalRadii:
    """Both roots of g(t) = c for 0 < c < e^{-1/2}."""
    _check_c(c)
    f = lambda t: g(t) - c  # noqa: E731
    m1 = _root(f, 0.0, 1.0)
    top = 2.0
    while g(top) >= c:
        top *= 2.0
    m2 = _root(f, 1.0, top)
    return CriticalRadii(c, m1, m2)


@dataclass(frozen=True)
class ConstantSolutionSet:
    """Radii of the centred disks solving the constant-data equation.

    ``radii`` is empty, ``(1.0,)`` at the threshold, or ``(r2, r1)`` with
    ``r2 < 1 < r1``.
    """

    c: float
    radii: tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.radii)

    @property
    def kind(self) -> str:
        return ("none", "one", "two")[self.count]

    def to_dict(self) -> dict:
        d = {"c": self.c, "count": self.count, "kind": self.kind}
        if self.count == 1:
            d["t"] = self.radii[0]
        elif self.count == 2:
            d["r2"], d["r1"] = self.radii
        return d


def constant_solutions(
    c_raw: float, normalized: bool = True, band: float = MERGE_BAND
) -> ConstantSolutionSet:
    """Classify the constant solutions for the given constant.

    With ``normalized=False`` the input is the density constant ``C`` and is
    multiplied by 2pi first.
    """
    if not (c_raw > 0):
        raise DomainError(f"constant must be positive, got {c_raw!r}")
    c = c_raw if normalized else 2.0 * math.pi * c_raw
    if abs(c - C_MAX) <= band:
        return ConstantSolutionSet(c, (1.0,))
    if c > C_MAX:
        return ConstantSolutionSet(c, ())
    cr = critical_radii(c)
    return ConstantSolutionSet(c, (cr.m1, cr.m2))


@dataclass(frozen=True)
class GoodPair:
    c: float
    h0: float
    r: float
    E: float

    @property
    def h1(self) -> float:
        return self.h0 + self.r

    def to_dict(self) -> dict:
        return {"c": self.c, "h0": self.h0, "r": self.r, "h1": self.h1, "E": self.E}


def validate_pair(pair: GoodPair, rel_tol: float = 1e-9) -> None:
    """Raise InvalidPair unless ``pair`` satisfies the good-pair definition."""
    c, h0, r = pair.c, pair.h0, pair.r
    if not (0 < c < C_MAX):
        raise InvalidPair(f"c = {c!r} outside (0, e^(-1/2))")
    if not (h0 >= 0 and r > 0):
        raise InvalidPair(f"need h0 >= 0 and r > 0, got h0={h0!r}, r={r!r}")
    if not dphi(c, h0) > 0:
        raise InvalidPair("phi'(h0) must be positive")
    if dphi(c, pair.h1) > 8 * _EPS * c:
        raise InvalidPair("phi'(h0 + r) must be nonpositive")
    # level equality, measured through the mean of g
    if abs(mean_g(h0, r) - c) > rel_tol * c:
        raise InvalidPair("phi(h0) != phi(h0 + r)")


@dataclass(frozen=True)
class H0Domain:
    lower: float
    m1: float
    r_c: float
    m2: float
    q_branch: bool


def _q_branch(c: float, m2: float) -> bool:
    return phi(c, m2) > 1.0 + Q_BRANCH_BAND


def h0_domain(c: float) -> H0Domain:
    """Admissible minima ``[lower, m1)`` for good pairs w.r.t. ``c``.

    ``lower`` is 0 when phi(m2) <= phi(0) = 1, otherwise the root q in
    (0, m1) of phi(q) = phi(m2).  ``r_c`` is the gap at ``lower``.
    """
    cr = critical_radii(c)
    if _q_branch(c, cr.m2):
        target = phi(c, cr.m2)
        lower = _root(lambda t: phi(c, t) - target, 0.0, cr.m1)
        return H0Domain(lower, cr.m1, cr.m2 - lower, cr.m2, True)
    r_c = _solve_gap(c, 0.0, cr.m1, cr.m2)
    return H0Domain(0.0, cr.m1, r_c, cr.m2, False)


def _solve_gap(c: float, h0: float, m1: float, m2: float) -> float | None:
    lo, hi = m1 - h0, m2 - h0
    f = lambda r: mean_g(h0, r) - c  # noqa: E731
    f_hi = f(hi)
    if f_hi < 0:
        # h0 == q up to rounding: the partner is m2 itself
        return hi if -f_hi <= 16 * _EPS * c else None
    if f_hi == 0:
        return hi
    return _root(f, lo, hi)


def good_pair_from_h0(c: float, h0: float, domain: H0Domain | None = None) -> GoodPair | None:
    """The unique good pair with minimum ``h0``, or None when ``h0`` is not admissible."""
    _check_c(c)
    dom = domain if domain is not None else h0_domain(c)
    if not (dom.lower <= h0 < dom.m1):
        return None
    if dom.q_branch and h0 - dom.lower <= 4 * _EPS * max(1.0, h0):
        # partner is m2 exactly; root-finding there is only sqrt(eps) accurate
        return GoodPair(c, h0, dom.m2 - h0, phi(c, h0))
    r = _solve_gap(c, h0, dom.m1, dom.m2)
    if r is None or r <= 0:
        return None
    return GoodPair(c, h0, r, phi(c, h0))


def c_from_pair(h0: float, r: float) -> float:
    """The constant making ``(h0, h0 + r)`` a good pair; raises InvalidPair otherwise."""
    if not (h0 >= 0 and r > 0):
        raise InvalidPair(f"need h0 >= 0 and r > 0, got h0={h0!r}, r={r!r}")
    c = mean_g(h0, r)
    if not (0 < c < C_MAX):
        raise InvalidPair(f"c = {c!r} outside (0, e^(-1/2))")
    if not dphi(c, h0) > 0:
        raise InvalidPair(f"phi'(h0) = {dphi(c, h0)!r} is not positive")
    if dphi(c, h0 + r) > 8 * _EPS * c:
        raise InvalidPair(
            f"phi'(h0 + r) = {dphi(c, h0 + r)!r} > 0: h0 + r lies beyond m2(c) (r exceeds r_h0)"
        )
    return c


def pair_from_h0_r(h0: float, r: float) -> GoodPair:
    c = c_from_pair(h0, r)
    return GoodPair(c, h0, r, phi(c, h0))


def r_max_for_h0(h0: float) -> float:
    """Supremum ``r_h0`` of gaps for which ``(h0, h0 + r)`` is good w.r.t. ``c(r)``.

    At ``r_h0`` the partner reaches ``m2(c(r))``: g(h0 + r) = mean_g(h0, r).
    """
    if not (0 <= h0 < 1):
        raise DomainError(f"h0 must lie in [0, 1), got {h0!r}")
    f = lambda r: g(h0 + r) - mean_g(h0, r)  # noqa: E731
    lo = max(1.0 - h0, 1e-12)
    hi = lo + 1.0
    while f(hi) > 0:
        hi *= 2.0
    return _root(f, lo, hi)
