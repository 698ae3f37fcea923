"""The half-period integral Theta(c, h0, r) and scans over good pairs.

For a good pair ``(h0, h1 = h0 + r)`` the angular distance between a minimum
and the next maximum of a solution is

    Theta = int_0^1 r / sqrt(F(t)) dt,
    F(t)  = -(t r + h0)^2 - 2 log(e^{-h0^2/2} - c t r),

with F(0) = F(1) = 0 and simple zeros at both ends (``phi'(h0) > 0`` and
``phi'(h1) < 0``).  Writing ``t = sin^2(psi/2)`` gives
``dt / sqrt(F) = dpsi / sqrt(F / (t (1 - t)))``, a smooth, even and
2pi-periodic integrand in psi, so the trapezoid rule converges
geometrically.  A tanh-sinh rule in t is kept as an independent second
scheme.

``F`` is evaluated in two halves, each expanded around its own endpoint, so
the ratio ``F / (t (1 - t))`` stays accurate even when ``r`` is tiny and ``F``
is the difference of two nearly equal O(r) terms.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import scalar_core as sc
from .errors import DomainError, GM2Error, InvalidPair, QuadratureFailure

DIVERGENCE_BAND = 1e-12
M1_COLLAR = 1e-6
_SERIES_CUTOFF = 0.25
_SERIES_TERMS = 32
_DE_TMAX = 4.5
_ROUNDOFF = 16 * 2.220446049250313e-16


@dataclass(frozen=True)
class QuadratureConfig:
    scheme: str = "trig"  # "trig" | "de"
    max_levels: int = 14
    rel_tol: float = 1e-12

    def __post_init__(self):
        if self.scheme not in ("trig", "de"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if not (0 < self.rel_tol <= 1e-2):
            raise ValueError("rel_tol must lie in (0, 1e-2]")
        if not (1 <= self.max_levels <= 14):
            raise ValueError("max_levels must lie in [1, 14]")


DEFAULT_CFG = QuadratureConfig()


@dataclass(frozen=True)
class ThetaResult:
    value: float
    est_error: float | None
    endpoint_flags: tuple[bool, bool] = (False, False)
    n_evals: int = 0

    @property
    def divergent(self) -> bool:
        return any(self.endpoint_flags)


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    try:
        return max(1, int(os.environ.get("GM2_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items, workers):
    items = list(items)
    n = _worker_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# -- integrand -------------------------------------------------------------

def _f_over_x_left(x, k, delta, h):
    """F / x on the half anchored at the minimum, x = t r."""
    out = np.empty_like(x)
    small = k * x <= _SERIES_CUTOFF
    xs = x[small]
    if xs.size:
        # 2 delta + (k^2 - 1) x + 2 sum_{j>=3} k^j x^{j-1} / j
        kx = k * xs
        acc = np.zeros_like(xs)
        for j in range(_SERIES_TERMS, 2, -1):
            acc = kx * (1.0 / j + acc)
        out[small] = 2.0 * delta + (k * k - 1.0) * xs + 2.0 * k * kx * acc
    xb = x[~small]
    if xb.size:
        out[~small] = -2.0 * (xb * h + 0.5 * xb * xb + np.log1p(-k * xb)) / xb
    return out


def _f_over_y_right(y, k, delta, h):
    """F / y on the half anchored at the maximum, y = (1 - t) r."""
    out = np.empty_like(y)
    small = k * y <= _SERIES_CUTOFF
    ys = y[small]
    if ys.size:
        # 2 delta + (k^2 - 1) y + 2 sum_{j>=3} (-1)^j k^j y^{j-1} / j
        ky = -k * ys
        acc = np.zeros_like(ys)
        for j in range(_SERIES_TERMS, 2, -1):
            acc = ky * (1.0 / j + acc)
        out[small] = 2.0 * delta + (k * k - 1.0) * ys - 2.0 * k * ky * acc
    yb = y[~small]
    if yb.size:
        out[~small] = 2.0 * (yb * h - 0.5 * yb * yb - np.log1p(k * yb)) / yb
    return out


class _Integrand:
    """G(t, s) = F / (t s) for a fixed pair, with s = 1 - t supplied separately."""

    def __init__(self, c: float, h0: float, r: float):
        h1 = h0 + r
        self.r = r
        self.h0, self.h1 = h0, h1
        e0 = math.exp(0.5 * h0 * h0)
        e1 = math.exp(0.5 * h1 * h1)
        self.k0 = c * e0
        self.d0 = e0 * (c - sc.g(h0))
        self.k1 = c * e1
        self.d1 = max(e1 * (sc.g(h1) - c), 0.0)

    def G(self, t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        out = np.empty_like(t)
        left = t <= s
        r = self.r
        tl, sl = t[left], s[left]
        out[left] = _f_over_x_left(tl * r, self.k0, self.d0, self.h0) * r / sl
        tr, sr = t[~left], s[~left]
        out[~left] = _f_over_y_right(sr * r, self.k1, self.d1, self.h1) * r / tr
        return out


# -- quadrature schemes ----------------------------------------------------

_TRIG_BASE = 16


def _trig_nodes(n, odd_only):
    j = np.arange(1, n, 2) if odd_only else np.arange(0, n + 1)
    psi = j * (math.pi / n)
    half = 0.5 * psi
    return np.sin(half) ** 2, np.cos(half) ** 2, j, n


def _theta_trig(f: _Integrand, cfg: QuadratureConfig):
    r = f.r
    n = _TRIG_BASE
    t, s, j, _ = _trig_nodes(n, False)
    vals = r / np.sqrt(f.G(t, s))
    w = np.ones_like(vals)
    w[0] = w[-1] = 0.5
    total = float(np.dot(w, vals))
    est = math.pi / n * total
    evals = vals.size
    for level in range(1, cfg.max_levels + 1):
        n *= 2
        t, s, _, _ = _trig_nodes(n, True)
        new = r / np.sqrt(f.G(t, s))
        evals += new.size
        total += float(new.sum())
        prev, est = est, math.pi / n * total
        err = max(abs(est - prev), _ROUNDOFF * abs(est))
        if not math.isfinite(est):
            raise QuadratureFailure("non-finite integrand", est, None)
        if level >= 2 and err <= cfg.rel_tol * abs(est):
            return est, err, evals
    raise QuadratureFailure(
        f"trapezoid rule did not reach rel_tol={cfg.rel_tol} in {cfg.max_levels} levels",
        est, err,
    )


def _de_nodes(h, odd_only):
    m = int(math.ceil(_DE_TMAX / h))
    j = np.arange(-m, m + 1)
    if odd_only:
        j = j[j % 2 != 0]
    tau = j * h
    u = math.pi * np.sinh(tau)
    # t = 1/(1+e^{-u}), s = 1 - t = 1/(1+e^{u}); sqrt(t s) = 1/(2 cosh(u/2))
    t = 0.5 * (1.0 + np.tanh(0.5 * u))
    s = 0.5 * (1.0 - np.tanh(0.5 * u))
    big = u > 0
    t[~big] = 1.0 / (1.0 + np.exp(-u[~big]))
    s[big] = 1.0 / (1.0 + np.exp(u[big]))
    weight = math.pi * np.cosh(tau) / (2.0 * np.cosh(0.5 * u))
    return t, s, weight


def _de_sum(f: _Integrand, h, odd_only):
    t, s, w = _de_nodes(h, odd_only)
    keep = (t > 0) & (s > 0) & (w > 0)
    t, s, w = t[keep], s[keep], w[keep]
    return float(np.sum(w * f.r / np.sqrt(f.G(t, s)))), t.size


def _theta_de(f: _Integrand, cfg: QuadratureConfig):
    h = 0.5
    total, evals = _de_sum(f, h, False)
    est = h * total
    for level in range(1, cfg.max_levels + 1):
        h *= 0.5
        add, k = _de_sum(f, h, True)
        evals += k
        total += add
        prev, est = est, h * total
        err = max(abs(est - prev), _ROUNDOFF * abs(est))
        if not math.isfinite(est):
            raise QuadratureFailure("non-finite integrand", est, None)
        if level >= 2 and err <= cfg.rel_tol * abs(est):
            return est, err, evals
    raise QuadratureFailure(
        f"tanh-sinh rule did not reach rel_tol={cfg.rel_tol} in {cfg.max_levels} levels",
        est, err,
    )


def theta_eval(pair: sc.GoodPair, cfg: QuadratureConfig = DEFAULT_CFG) -> ThetaResult:
    """Theta(c, h0, r) for a good pair.

    Returns an infinite value (``est_error=None``) when ``h0 + r`` coincides
    with ``m2(c)``: the endpoint zero of F becomes double there and the
    integral diverges.
    """
    sc.validate_pair(pair)
    m2 = sc.critical_radii(pair.c).m2
    if abs(pair.h1 - m2) <= DIVERGENCE_BAND:
        return ThetaResult(math.inf, None, (False, True))
    f = _Integrand(pair.c, pair.h0, pair.r)
    if not (f.d0 > 0 and f.d1 > 0):
        raise InvalidPair("pair has a degenerate endpoint")
    fn = _theta_trig if cfg.scheme == "trig" else _theta_de
    value, err, evals = fn(f, cfg)
    return ThetaResult(value, err, (False, False), evals)


def theta_small_r_limit(c: float) -> float:
    """pi / sqrt(1 - m1(c)^2): the linearised half-period at the inner disk."""
    m1 = sc.critical_radii(c).m1
    return math.pi / math.sqrt((1.0 - m1) * (1.0 + m1))


# -- scans over good pairs -------------------------------------------------

def h0_grid(c: float, n: int, collar: float = M1_COLLAR) -> np.ndarray:
    """``n`` minima spanning the admissible set, stopping short of m1."""
    dom = sc.h0_domain(c)
    top = dom.m1 - collar * (dom.m1 - dom.lower)
    if n == 1:
        return np.array([top])
    return np.linspace(dom.lower, top, n)


@dataclass
class ThetaScan:
    c: float
    grid: list
    pairs: list
    theta_values: list
    est_errors: list
    failures: list = field(default_factory=list)

    def _finite(self):
        return [(i, v) for i, v in enumerate(self.theta_values) if v is not None]

    @property
    def min(self) -> float:
        fin = self._finite()
        return min(v for _, v in fin) if fin else math.nan

    @property
    def argmin(self) -> sc.GoodPair | None:
        fin = self._finite()
        if not fin:
            return None
        i = min(fin, key=lambda iv: iv[1])[0]
        return self.pairs[i]

    @property
    def margin(self) -> float:
        return self.min - math.pi

    @property
    def max_est_error(self) -> float:
        errs = [e for e in self.est_errors if e is not None]
        return max(errs) if errs else 0.0

    def to_dict(self) -> dict:
        am = self.argmin
        return {
            "c": self.c,
            "grid": list(self.grid),
            "r_values": [p.r if p else None for p in self.pairs],
            "theta_values": [None if (v is None or math.isinf(v)) else v for v in self.theta_values],
            "divergent": [v is not None and math.isinf(v) for v in self.theta_values],
            "est_errors": list(self.est_errors),
            "min": self.min,
            "argmin": am.to_dict() if am else None,
            "margins": {"min_minus_pi": self.margin},
            "failures": list(self.failures),
        }


def _eval_point(args):
    c, h0, dom, cfg = args
    pair = sc.good_pair_from_h0(c, float(h0), dom)
    if pair is None:
        return None, None, None, f"h0={h0!r} not admissible"
    try:
        res = theta_eval(pair, cfg)
    except GM2Error as exc:
        return pair, None, None, f"h0={h0!r}: {type(exc).__name__}: {exc}"
    return pair, res.value, res.est_error, None


def scan_min_theta(
    c: float,
    n_h0: int = 64,
    cfg: QuadratureConfig = DEFAULT_CFG,
    h0_values=None,
    workers: int | None = None,
) -> ThetaScan:
    """Evaluate Theta over a grid of minima in the admissible set.

    The left end of the set gives a divergent pair when phi(m2) > 1 (its
    partner is m2 itself); those points are kept with an infinite value.
    Per-point failures are collected in ``failures`` rather than raised.
    """
    dom = sc.h0_domain(c)
    grid = np.asarray(h0_values, dtype=float) if h0_values is not None else h0_grid(c, n_h0)
    rows = _pmap(_eval_point, [(c, h, dom, cfg) for h in grid], workers)
    scan = ThetaScan(c, [float(h) for h in grid], [], [], [])
    for pair, val, err, fail in rows:
        scan.pairs.append(pair)
        scan.theta_values.append(val)
        scan.est_errors.append(err)
        if fail:
            scan.failures.append(fail)
    return scan


# -- monotonicity along the two one-parameter families ---------------------

@dataclass(frozen=True)
class InR:
    """r -> Theta(c(r), h0, r) at fixed minimum h0, for r in (0, r_h0)."""

    h0: float
    r_lo: float | None = None
    r_hi: float | None = None


@dataclass(frozen=True)
class InC:
    """c -> Theta(c, h0(c), r) at fixed gap r, for c in (c_r, c_star]."""

    r: float
    h_star: float
    c_star: float | None = None
    c_lo: float | None = None


@dataclass
class MonotonicityReport:
    mode: str
    params: dict
    family: list
    pairs: list
    theta_values: list
    est_errors: list
    max_decrease: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.max_decrease <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "params": self.params,
            "family": list(self.family),
            "pairs": [p.to_dict() for p in self.pairs],
            "theta_values": list(self.theta_values),
            "est_errors": list(self.est_errors),
            "max_decrease": self.max_decrease,
            "tolerance": self.tolerance,
            "ok": self.ok,
        }


def c_r_limit(r: float) -> float:
    """Limit of c(h0) = mean_g(h0, r) as h0 -> 0, i.e. (1 - e^{-r^2/2}) / r."""
    return -math.expm1(-0.5 * r * r) / r


def h0_for_c(c: float, r: float, h_star: float) -> float:
    """Invert c = mean_g(h0, r) on (0, h_star]."""
    f = lambda h: sc.mean_g(h, r) - c  # noqa: E731
    f_top = f(h_star)
    if f_top <= 0:
        return h_star
    if f(0.0) >= 0:
        return 0.0
    return sc._root(f, 0.0, h_star)


def monotonicity_scan(mode, n: int = 32, cfg: QuadratureConfig = DEFAULT_CFG,
                      workers: int | None = None) -> MonotonicityReport:
    if n < 2:
        raise DomainError("need at least two family members")
    if isinstance(mode, InR):
        h0 = mode.h0
        if not (0 <= h0 < 1):
            raise DomainError(f"in_r needs h0 in [0, 1), got {h0!r}")
        r_top = sc.r_max_for_h0(h0)
        lo = mode.r_lo if mode.r_lo is not None else 1e-3 * r_top
        hi = mode.r_hi if mode.r_hi is not None else 0.98 * r_top
        if not (0 < lo <= hi < r_top):
            raise DomainError(f"r range [{lo}, {hi}] must lie inside (0, r_h0={r_top})")
        family = np.linspace(lo, hi, n)
        pairs = [sc.pair_from_h0_r(h0, float(r)) for r in family]
        params = {"h0": h0, "r_h0": r_top}
        name = "in_r"
    elif isinstance(mode, InC):
        r, hs = mode.r, mode.h_star
        if not (0 < r < 1 and 0 < hs < 1 and hs + r < 1):
            raise DomainError("in_c needs r, h_star in (0, 1) with h_star + r < 1")
        c_star = sc.mean_g(hs, r)
        if mode.c_star is not None and abs(mode.c_star - c_star) > 1e-10 * c_star:
            raise DomainError(
                f"(h_star, h_star + r) is not a good pair w.r.t. c_star={mode.c_star!r}"
                f" (expected {c_star!r})"
            )
        c_r = c_r_limit(r)
        lo = mode.c_lo if mode.c_lo is not None else c_r + 1e-3 * (c_star - c_r)
        if not (c_r < lo <= c_star):
            raise DomainError(f"c range must lie inside (c_r={c_r}, c_star={c_star}]")
        family = np.linspace(lo, c_star, n)
        pairs = []
        for c in family:
            h0 = h0_for_c(float(c), r, hs)
            pairs.append(sc.GoodPair(float(c), h0, r, sc.phi(float(c), h0)))
        params = {"r": r, "h_star": hs, "c_star": c_star, "c_r": c_r}
        name = "in_c"
    else:
        raise DomainError(f"unknown monotonicity mode {mode!r}")

    results = _pmap(lambda p: theta_eval(p, cfg), pairs, workers)
    vals = [res.value for res in results]
    errs = [res.est_error or 0.0 for res in results]
    max_dec = 0.0
    tol = 0.0
    for i in range(len(vals) - 1):
        dec = vals[i] - vals[i + 1]
        if dec > max_dec:
            max_dec = dec
        # absolute floor: pairs are reconstructed to ~1e-15 relative
        tol = max(tol, errs[i] + errs[i + 1] + 1e-12 * abs(vals[i]))
    return MonotonicityReport(name, params, [float(x) for x in family], pairs, vals, errs,
                              max_dec, tol)


# -- emptiness of {Theta = pi/k} -------------------------------------------

@dataclass
class EmptinessReport:
    c: float
    k_max: int
    scan: ThetaScan
    distances: dict
    crossings: list

    @property
    def margin(self) -> float:
        return self.scan.margin

    @property
    def certified(self) -> bool:
        return not self.crossings and self.margin > self.scan.max_est_error

    def to_dict(self) -> dict:
        d = self.scan.to_dict()
        d.update({
            "k_max": self.k_max,
            "distance_to_pi_over_k": {str(k): v for k, v in self.distances.items()},
            "crossings": self.crossings,
            "certified_empty": self.certified,
        })
        return d


def pi_over_k_emptiness(c: float, n_h0: int = 64, k_max: int = 8,
                        cfg: QuadratureConfig = DEFAULT_CFG,
                        workers: int | None = None) -> EmptinessReport:
    """Check that Theta never hits pi/k (1 <= k <= k_max) on the good-pair grid.

    A sign change of Theta - pi/k between neighbouring grid points is recorded
    as a crossing; its absence together with min Theta > pi certifies the set
    empty on the grid.
    """
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    scan = scan_min_theta(c, n_h0, cfg, workers=workers)
    vals = scan.theta_values
    distances = {}
    crossings = []
    for k in range(1, k_max + 1):
        target = math.pi / k
        fin = [v for v in vals if v is not None]
        distances[k] = min(abs(v - target) for v in fin) if fin else math.nan
        for i in range(len(vals) - 1):
            a, b = vals[i], vals[i + 1]
            if a is None or b is None:
                continue
            if (a - target) * (b - target) <= 0:
                crossings.append({"k": k, "h0_bracket": [scan.grid[i], scan.grid[i + 1]]})
    return EmptinessReport(c, k_max, scan, distances, crossings)
