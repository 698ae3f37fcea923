"""Phase-plane integration of h'' = c e^{(h'^2 + h^2)/2} - h.

The first integral ``E = e^{-(h'^2 + h^2)/2} + c h`` is conserved along every
solution and is tracked as an accuracy diagnostic.  Shooting from a minimum
``(h0, 0)`` to the next critical point measures the half-period directly,
independently of the quadrature in :mod:`gm2.theta`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import scalar_core as sc
from . import theta as th
from .errors import DomainError, EventMiss, GM2Error, StepUnderflow

LAUNCH_STEP = 1e-4
ANGLE_CAP = 4.0 * math.pi
MIN_STEP = 1e-12
_BLOWUP = 1400.0  # h^2 + h'^2 beyond this overflows e^{(h'^2+h^2)/2}


def first_integral(c, h, hp):
    return np.exp(-0.5 * (np.square(hp) + np.square(h))) + c * np.asarray(h)


@dataclass(frozen=True)
class OdeState:
    theta: float
    h: float
    hp: float


@dataclass
class Trajectory:
    theta: np.ndarray
    h: np.ndarray
    hp: np.ndarray
    c: float
    E0: float
    drift: np.ndarray = field(repr=False)

    @property
    def max_drift(self) -> float:
        return float(np.max(np.abs(self.drift))) if self.drift.size else 0.0

    @property
    def samples(self) -> list[OdeState]:
        return [OdeState(float(a), float(b), float(d)) for a, b, d in zip(self.theta, self.h, self.hp)]

    @property
    def final(self) -> OdeState:
        return OdeState(float(self.theta[-1]), float(self.h[-1]), float(self.hp[-1]))


def _rhs(c):
    def f(_, y):
        h, hp = y
        return [hp, c * math.exp(0.5 * (hp * hp + h * h)) - h]
    return f


def _blowup(_, y):
    return _BLOWUP - (y[0] * y[0] + y[1] * y[1])


_blowup.terminal = True


def _check_tol(tol):
    if not (1e-14 < tol < 1e-4):
        raise DomainError(f"tol must lie in (1e-14, 1e-4), got {tol!r}")


def integrate(c: float, init: OdeState, theta_span: float, tol: float = 1e-10,
              atol: float | None = None) -> Trajectory:
    """Adaptive integration over ``[init.theta, init.theta + theta_span]``.

    Raises StepUnderflow (carrying the last valid state) when the solution
    blows up or the step size collapses below 1e-12.
    """
    if not c > 0:
        raise DomainError("c must be positive")
    if not theta_span > 0:
        raise DomainError("theta_span must be positive")
    _check_tol(tol)
    E0 = float(first_integral(c, init.h, init.hp))
    sol = solve_ivp(
        _rhs(c), (init.theta, init.theta + theta_span), [init.h, init.hp],
        method="DOP853", rtol=tol, atol=tol if atol is None else atol, events=_blowup,
    )
    t, h, hp = sol.t, sol.y[0], sol.y[1]
    traj = Trajectory(t, h, hp, c, E0, first_integral(c, h, hp) - E0)
    steps = np.diff(t)
    if sol.status == -1 or sol.status == 1 or (steps.size > 1 and steps[:-1].min() < MIN_STEP):
        raise StepUnderflow(
            f"integration stopped at theta={t[-1]!r}: {sol.message if sol.status == -1 else 'solution blew up'}",
            last_state=traj.final,
        )
    return traj


def _launch(c, h0):
    """Taylor step off the minimum: h' = 0, h''' = 0 there."""
    a = c * math.exp(0.5 * h0 * h0) - h0
    b = c * math.exp(0.5 * h0 * h0) * a * (a + h0) - a
    d = LAUNCH_STEP
    return h0 + a * d * d / 2 + b * d ** 4 / 24, a * d + b * d ** 3 / 6


@dataclass(frozen=True)
class ShootResult:
    half_period: float
    h_arrival: float
    max_drift: float


def shoot(pair: sc.GoodPair, tol: float = 1e-12) -> ShootResult:
    _check_tol(tol)
    c, h0 = pair.c, pair.h0
    h_start, hp_start = _launch(c, h0)

    def crit(_, y):
        return y[1]

    crit.terminal = True
    crit.direction = -1
    scale = min(1.0, pair.r)
    sol = solve_ivp(
        _rhs(c), (0.0, ANGLE_CAP), [h_start, hp_start], method="DOP853",
        rtol=tol, atol=tol * scale, events=[crit, _blowup],
    )
    E0 = float(first_integral(c, h0, 0.0))
    drift = float(np.max(np.abs(first_integral(c, sol.y[0], sol.y[1]) - E0)))
    if sol.status == -1 or not len(sol.t_events[0]):
        raise EventMiss(f"no maximum of h within angle {ANGLE_CAP:.6g} (degenerate or divergent pair)")
    theta1 = float(sol.t_events[0][0]) + LAUNCH_STEP
    h_arr = float(sol.y_events[0][0][0])
    if abs(h_arr - pair.h1) > 10 * tol * max(1.0, pair.h1) + 1e-9 * pair.r:
        raise EventMiss(f"arrived at h={h_arr!r}, expected h0 + r = {pair.h1!r}")
    return ShootResult(theta1, h_arr, drift)


def half_period_shoot(pair: sc.GoodPair, tol: float = 1e-12) -> float:
    """Angular distance from a minimum h0 to the following maximum."""
    return shoot(pair, tol).half_period


def full_period_drift(pair: sc.GoodPair, tol: float = 1e-12) -> tuple[Trajectory, float]:
    """Integrate one full period from (h0, 0); returns the trajectory and its return error."""
    period = 2.0 * half_period_shoot(pair, tol)
    traj = integrate(pair.c, OdeState(0.0, pair.h0, 0.0), period, tol,
                     atol=tol * min(1.0, pair.r))
    end = traj.final
    return traj, math.hypot(end.h - pair.h0, end.hp)


def _hermite_extremum(t0, t1, h0, h1, d0, d1):
    """Zero of the derivative of the cubic Hermite interpolant on [t0, t1]."""
    dt = t1 - t0
    m0, m1 = d0 * dt, d1 * dt
    # p'(s) = a s^2 + b s + m0 for the cubic p on s in [0, 1]
    a = 6 * (h0 - h1) + 3 * (m0 + m1)
    b = 6 * (h1 - h0) - 4 * m0 - 2 * m1
    roots = np.roots([a, b, m0]) if abs(a) > 1e-300 else np.array([-m0 / b])
    real = [r.real for r in np.atleast_1d(roots) if abs(r.imag) < 1e-12 and -1e-12 <= r.real <= 1 + 1e-12]
    s = min(real, key=lambda r: abs(r - m0 / (m0 - m1))) if real else m0 / (m0 - m1)
    s = min(max(s, 0.0), 1.0)
    h = ((2 * s**3 - 3 * s**2 + 1) * h0 + (s**3 - 2 * s**2 + s) * m0
         + (-2 * s**3 + 3 * s**2) * h1 + (s**3 - s**2) * m1)
    return t0 + s * dt, h


def critical_points(traj: Trajectory) -> list[tuple[float, float]]:
    """(theta, h) at sign changes of h', located on the cubic Hermite interpolant."""
    out = []
    t, h, hp = traj.theta, traj.h, traj.hp
    for i in range(len(hp) - 1):
        if hp[i] == 0 and i > 0:
            out.append((float(t[i]), float(h[i])))
        elif hp[i] * hp[i + 1] < 0:
            th_, h_ = _hermite_extremum(t[i], t[i + 1], h[i], h[i + 1], hp[i], hp[i + 1])
            out.append((float(th_), float(h_)))
    return out


# -- search for nonconstant 2pi-periodic solutions -------------------------

@dataclass
class CSearch:
    c: float
    classification: str  # "scanned" | "constant-only"
    grid: list = field(default_factory=list)
    theta_quad: list = field(default_factory=list)
    theta_shoot: list = field(default_factory=list)
    max_oracle_gap: float = 0.0
    margin: float = math.nan
    min_theta_minus_pi: float = math.nan
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        clean = lambda v: None if v is None or math.isinf(v) else v  # noqa: E731
        return {
            "c": self.c,
            "classification": self.classification,
            "grid": self.grid,
            "theta_quad": [clean(v) for v in self.theta_quad],
            "theta_shoot": [clean(v) for v in self.theta_shoot],
            "max_oracle_gap": self.max_oracle_gap,
            "margin": None if math.isnan(self.margin) else self.margin,
            "min_theta_minus_pi": None if math.isnan(self.min_theta_minus_pi) else self.min_theta_minus_pi,
            "failures": self.failures,
        }


@dataclass
class PeriodicSearchReport:
    c_grid: list
    per_c: list
    found_nonconstant: list
    k_max: int

    @property
    def per_c_margin(self) -> list:
        return [s.margin for s in self.per_c]

    def to_dict(self) -> dict:
        return {
            "c_grid": self.c_grid,
            "k_max": self.k_max,
            "found_nonconstant": self.found_nonconstant,
            "per_c_margin": [None if math.isnan(m) else m for m in self.per_c_margin],
            "per_c": [s.to_dict() for s in self.per_c],
        }


def _search_one(c, n_h0, k_max, cfg, shoot_tol, found):
    if c >= sc.C_MAX - sc.MERGE_BAND:
        # phi_c is monotone: every solution is constant
        return CSearch(c, "constant-only")
    rec = CSearch(c, "scanned")
    scan = th.scan_min_theta(c, n_h0, cfg)
    rec.grid = scan.grid
    rec.theta_quad = scan.theta_values
    rec.failures.extend(scan.failures)
    gaps = []
    for pair, val in zip(scan.pairs, scan.theta_values):
        if pair is None or val is None or math.isinf(val) or val >= ANGLE_CAP:
            rec.theta_shoot.append(None)
            continue
        try:
            s = half_period_shoot(pair, shoot_tol)
        except GM2Error as exc:
            rec.theta_shoot.append(None)
            rec.failures.append(f"shoot h0={pair.h0!r}: {type(exc).__name__}: {exc}")
            continue
        rec.theta_shoot.append(s)
        gaps.append(abs(s - val))
    rec.max_oracle_gap = max(gaps) if gaps else math.nan
    targets = [math.pi / k for k in range(1, k_max + 1)]
    vals = [v for v in scan.theta_values if v is not None and math.isfinite(v)]
    if vals:
        rec.margin = min(abs(v - t) for v in vals for t in targets)
        rec.min_theta_minus_pi = min(vals) - math.pi
    # an exact hit pi/k, or a crossing between neighbours, is a nonconstant solution
    for i, (pair, v) in enumerate(zip(scan.pairs, scan.theta_values)):
        if v is None or not math.isfinite(v):
            continue
        err = scan.est_errors[i] or 0.0
        for k, t in enumerate(targets, 1):
            hit = abs(v - t) <= max(err, 1e-12)
            nxt = scan.theta_values[i + 1] if i + 1 < len(scan.theta_values) else None
            cross = nxt is not None and math.isfinite(nxt) and (v - t) * (nxt - t) < 0
            if hit or cross:
                found.append({
                    "c": c, "k": k, "h0": pair.h0,
                    "h0_next": scan.grid[i + 1] if cross else None,
                    "initial_condition": {"theta": 0.0, "h": pair.h0, "hp": 0.0},
                })
    return rec


def search_periodic(c_grid, n_h0: int = 32, k_max: int = 8,
                    cfg: th.QuadratureConfig = th.DEFAULT_CFG,
                    shoot_tol: float = 1e-12, workers: int | None = None) -> PeriodicSearchReport:
    """Look for good pairs with Theta = pi/k at each c, using both oracles."""
    c_list = [float(c) for c in c_grid]
    for c in c_list:
        if not c > 0:
            raise DomainError(f"c must be positive, got {c!r}")
    founds = [[] for _ in c_list]
    per_c = th._pmap(
        lambda ic: _search_one(ic[1], n_h0, k_max, cfg, shoot_tol, founds[ic[0]]),
        list(enumerate(c_list)), workers,
    )
    found = [f for group in founds for f in group]
    return PeriodicSearchReport(c_list, per_c, found, k_max)
