"""Even solutions of (1/2pi) e^{-(h'^2+h^2)/2} (h'' + h) = f on the circle.

Newton's method on the spectral discretisation of

    F(h) = h'' + h - 2 pi e^{(h'^2 + h^2)/2} f,

continued along f_t = (1 - t) c0 + t f from a constant solution.  Starting
at the inner disk radius r2 < 1 gives the small branch (gamma_2 < 1/2);
starting at the outer radius r1 > 1 gives the large one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import gauss_geom as gg
from . import scalar_core as sc
from . import spectral
from .errors import (BoundViolation, ContinuationFailed, ConvexityLost, DomainError,
                     L1TooLarge, NotEven, NotPositive, ParseError)

L1_BOUND = 1.0 / math.sqrt(2.0 * math.pi)
EVEN_TOL = 1e-12
SMALL, LARGE = "small", "large"


@dataclass(frozen=True, eq=False)
class PrescribedData:
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def l1_norm(self) -> float:
        return float(2.0 * math.pi / self.n * np.sum(self.values))

    def at(self, t: float, c0: float) -> np.ndarray:
        return (1.0 - t) * c0 + t * self.values

    def to_dict(self) -> dict:
        return {"n": self.n, "values": self.values.tolist()}


def validate_f(raw, mollify: float | None = None) -> PrescribedData:
    """Check positivity, evenness and the L1 bound; symmetrise exactly.

    ``mollify`` (a bandwidth in radians) applies circular Gaussian smoothing
    first, for rough data.
    """
    v = np.asarray(raw, dtype=float)
    if v.ndim != 1:
        raise ParseError("f must be a flat list of samples")
    n = v.size
    if n < 16 or n % 2:
        raise ParseError(f"need an even number n >= 16 of samples, got {n}")
    if mollify:
        v = spectral.mollify(v, mollify)
    bad = np.flatnonzero(~(v > 0))
    if bad.size:
        j = int(bad[0])
        raise NotPositive(f"f[{j}] = {v[j]!r} is not positive")
    gap = np.abs(v - np.roll(v, -(n // 2)))
    if gap.max() > EVEN_TOL * max(1.0, float(np.max(v))):
        j = int(np.argmax(gap))
        raise NotEven(f"f[{j}] and f[{(j + n // 2) % n}] differ by {gap[j]!r}")
    data = PrescribedData(spectral.even_part(v))
    if not data.l1_norm < L1_BOUND:
        raise L1TooLarge(f"||f||_L1 = {data.l1_norm!r} >= 1/sqrt(2 pi) = {L1_BOUND!r}")
    return data


def samples_from_fourier(coeffs, n: int) -> np.ndarray:
    """f(theta) = sum_j a_{2j} cos(2 j theta) on the n-point grid.

    ``coeffs`` is either the list [a0, a2, a4, ...] or a mapping from mode
    number to coefficient; odd modes are rejected.
    """
    if isinstance(coeffs, dict):
        modes = {}
        for key, val in coeffs.items():
            k = int(key)
            if k % 2:
                raise ParseError(f"fourier_cos: odd mode {k} is not allowed (f must be even)")
            modes[k] = float(val)
    else:
        modes = {2 * j: float(a) for j, a in enumerate(coeffs)}
    th = spectral.grid(n)
    out = np.zeros(n)
    for k, a in modes.items():
        out += a * np.cos(k * th)
    return out


def f_from_json(obj, n: int | None = None) -> np.ndarray:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise ParseError("f JSON must be an object")
    if "values" in obj:
        vals = obj["values"]
        if "n" in obj and len(vals) != obj["n"]:
            raise ParseError(f"field 'values' has {len(vals)} entries, 'n' says {obj['n']}")
        return np.asarray(vals, dtype=float)
    if "fourier_cos" in obj:
        size = n or obj.get("n")
        if not size:
            raise ParseError("fourier_cos input needs a grid size 'n'")
        return samples_from_fourier(obj["fourier_cos"], int(size))
    raise ParseError("f JSON needs 'values' or 'fourier_cos'")


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-11
    max_newton: int = 25
    t_step_init: float = 0.25
    t_step_min: float = 1e-4
    damping: float = 1.0

    def __post_init__(self):
        if not self.newton_tol >= 1e-13:
            raise ValueError("newton_tol must be >= 1e-13")
        if not (0 < self.t_step_min < self.t_step_init <= 1):
            raise ValueError("need 0 < t_step_min < t_step_init <= 1")
        if not (0 < self.damping <= 1):
            raise ValueError("damping must lie in (0, 1]")


def residual_map(h, f) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    fv = f.values if isinstance(f, PrescribedData) else np.asarray(f, dtype=float)
    d1 = spectral.diff(h, 1)
    d2 = spectral.diff(h, 2)
    return d2 + h - 2.0 * math.pi * np.exp(0.5 * (d1 * d1 + h * h)) * fv


def linearization(h, f) -> np.ndarray:
    """Jacobian of :func:`residual_map` at ``h``."""
    h = np.asarray(h, dtype=float)
    fv = f.values if isinstance(f, PrescribedData) else np.asarray(f, dtype=float)
    n = h.size
    D1 = spectral.diff_matrix(n, 1)
    D2 = spectral.diff_matrix(n, 2)
    d1 = D1 @ h
    w = 2.0 * math.pi * np.exp(0.5 * (d1 * d1 + h * h)) * fv
    return D2 + np.eye(n) - w[:, None] * (d1[:, None] * D1 + np.diag(h))


@dataclass
class SolveResult:
    branch: str
    h: np.ndarray
    residual_inf: float
    gamma2: float
    c0_used: float
    t_reached: float = 1.0
    newton_steps: int = 0
    history: list = field(default_factory=list, repr=False)

    @property
    def support(self) -> gg.SupportSamples:
        return gg.SupportSamples(self.h)

    @property
    def n(self) -> int:
        return self.h.size

    @property
    def perimeter(self) -> float:
        return gg.total_measure_smooth(self.support)

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "n": self.n,
            "h_values": self.h.tolist(),
            "residual_inf": self.residual_inf,
            "gamma2": self.gamma2,
            "perimeter": self.perimeter,
            "c0_used": self.c0_used,
            "t_reached": self.t_reached,
        }


def choose_c0(f: PrescribedData) -> float:
    """Starting constant density: half of min(min f, e^{-1}/(2 pi))."""
    return 0.5 * min(float(np.min(f.values)), math.exp(-1.0) / (2.0 * math.pi))


def _curvature(h):
    return spectral.diff(h, 2) + h


class _NewtonFailed(Exception):
    def __init__(self, reason):
        self.reason = reason


def _newton(h, ft, cfg: SolverConfig):
    """Converge F(h; t) = 0 from ``h``; returns (h, residual, iterations)."""
    res = residual_map(h, ft)
    norm = float(np.max(np.abs(res)))
    for it in range(1, cfg.max_newton + 1):
        if norm < cfg.newton_tol:
            return h, norm, it - 1
        step = np.linalg.solve(linearization(h, ft), res)
        lam = cfg.damping
        for _ in range(8):
            trial = spectral.even_part(h - lam * step)
            if np.all(trial > 0) and np.all(_curvature(trial) > 0):
                tres = residual_map(trial, ft)
                tnorm = float(np.max(np.abs(tres)))
                if math.isfinite(tnorm) and (tnorm < norm or tnorm < cfg.newton_tol):
                    break
            lam *= 0.5
        else:
            convex = np.all(trial > 0) and np.all(_curvature(trial) > 0)
            raise _NewtonFailed("convexity" if not convex else "stalled")
        h, res, norm = trial, tres, tnorm
    if norm < cfg.newton_tol:
        return h, norm, cfg.max_newton
    raise _NewtonFailed("no convergence")


def solve_branch(f: PrescribedData, branch: str = SMALL,
                 cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Continue from the constant solution of the chosen branch to t = 1."""
    if branch not in (SMALL, LARGE):
        raise DomainError(f"branch must be {SMALL!r} or {LARGE!r}")
    c0 = choose_c0(f)
    radii = sc.critical_radii(2.0 * math.pi * c0)
    h = np.full(f.n, radii.m1 if branch == SMALL else radii.m2)
    t, dt = 0.0, cfg.t_step_init
    total_steps = 0
    history = [(0.0, float(h[0]))]
    h, norm, k = _newton(h, f.at(0.0, c0), cfg)
    total_steps += k
    last_reason = None
    while t < 1.0:
        t_try = min(1.0, t + dt)
        try:
            h_new, norm, k = _newton(h, f.at(t_try, c0), cfg)
        except _NewtonFailed as exc:
            last_reason = exc.reason
            dt *= 0.5
            if dt < cfg.t_step_min:
                if last_reason == "convexity":
                    raise ConvexityLost(f"iterates lost h'' + h > 0 near t={t!r}") from None
                raise ContinuationFailed(
                    f"continuation step fell below {cfg.t_step_min} at t={t!r}", t_reached=t
                ) from None
            continue
        total_steps += k
        h, t = h_new, t_try
        history.append((t, float(np.max(h))))
        dt = min(2.0 * dt, cfg.t_step_init)
    res = residual_map(h, f)
    return SolveResult(
        branch, h, float(np.max(np.abs(res))), gg.gaussian_area(gg.SupportSamples(h)),
        c0, 1.0, total_steps, history,
    )


@dataclass(frozen=True)
class AprioriReport:
    bounds: dict  # quantity -> (min, max)
    tau_prime: float
    tau: float

    def to_dict(self) -> dict:
        return {"tau": self.tau, "tau_prime": self.tau_prime,
                "bounds": {k: list(v) for k, v in self.bounds.items()}}


def apriori_check(result, f: PrescribedData, tau: float,
                  tau_prime_max: float | None = None) -> AprioriReport:
    """Evaluate the two-sided bounds on h, h'' + h and |grad h| = sqrt(h'^2 + h^2).

    The realised constant tau' is the largest of max q and 1/min q over the
    three quantities.
    """
    if not (np.all(f.values > 1.0 / tau) and np.all(f.values < tau)):
        raise DomainError(f"data does not satisfy 1/tau < f < tau for tau={tau!r}")
    h = np.asarray(result.h if isinstance(result, SolveResult) else result, dtype=float)
    quantities = {
        "h": h,
        "h_pp_plus_h": _curvature(h),
        "grad_norm": np.sqrt(spectral.diff(h, 1) ** 2 + h * h),
    }
    bounds = {}
    tp = 0.0
    for name, q in quantities.items():
        if not np.all(np.isfinite(q)) or np.any(q <= 0):
            j = int(np.argmin(np.where(np.isfinite(q), q, -np.inf)))
            raise BoundViolation(f"{name} is not positive at node {j}", quantity=name)
        lo, hi = float(q.min()), float(q.max())
        bounds[name] = (lo, hi)
        tp = max(tp, hi, 1.0 / lo)
    if tau_prime_max is not None and tp >= tau_prime_max:
        raise BoundViolation(f"tau' = {tp!r} exceeds {tau_prime_max!r}", quantity="tau_prime")
    return AprioriReport(bounds, tp, tau)
