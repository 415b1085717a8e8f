"""Energies, rate fits and convergence metrics along trajectories.

Everything here is pure post-processing: the trajectory provides exact
state and reconstructed velocity at each sample, and these routines evaluate
the anchored energy, its unanchored companion, the scaled two-index energy,
and the observable bundle that feeds the CSV contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InsufficientDataError, ParameterDomainError, ValidationError
from .objectives import Objective, prox, tikhonov_center
from .schedules import SystemConfig, energy_descent_start
from .dynamics import Trajectory

__all__ = [
    "Observables",
    "RateFit",
    "DescentReport",
    "StrongConvReport",
    "compute_observables",
    "energy_q",
    "energy_pq",
    "unanchored_energy",
    "canonical_pq",
    "energy_q_series",
    "unanchored_energy_series",
    "check_energy_descent",
    "fit_rate_slope",
    "strong_convergence_metrics",
]


@dataclass
class Observables:
    """Per-sample scalar diagnostics; arrays share the trajectory's length."""

    ts: np.ndarray
    moreau_gap: np.ndarray
    function_gap: np.ndarray
    grad_norm: np.ndarray
    prox_dist: np.ndarray
    velocity_combo: np.ndarray
    dist_to_xstar: np.ndarray
    tikhonov_gap: np.ndarray

    FIELDS = ("moreau_gap", "function_gap", "grad_norm", "prox_dist",
              "velocity_combo", "dist_to_xstar", "tikhonov_gap")

    def series(self, name: str):
        if name not in self.FIELDS:
            raise KeyError(name)
        return self.ts, getattr(self, name)


def _require_targets(obj: Objective):
    if obj.phi_star is None or obj.x_star is None:
        raise ValidationError(
            f"objective {obj.name!r} lacks phi_star / x_star targets")
    return float(obj.phi_star), np.asarray(obj.x_star, dtype=float)


def _envelope_parts(obj: Objective, lam: float, x: np.ndarray):
    """One prox call shared by gap, gradient and distance observables."""
    p = prox(obj, lam, x)
    moreau = float(obj.value(p)) + float(np.dot(x - p, x - p)) / (2.0 * lam)
    g = (x - p) / lam
    return p, moreau, g


def compute_observables(traj: Trajectory) -> Observables:
    """Evaluate the observable bundle at every sample of the trajectory."""
    cfg = traj.cfg
    obj = cfg.objective
    phi_star, x_star = _require_targets(obj)
    s = cfg.schedule
    n = len(traj)
    if n == 0:
        raise InsufficientDataError("empty trajectory")
    out = {name: np.empty(n) for name in Observables.FIELDS}
    eps_all = np.asarray(s.eps(traj.ts), dtype=float)
    lam_all = np.asarray(s.lam(traj.ts), dtype=float)
    for i in range(n):
        x = traj.xs[i]
        lam = float(lam_all[i])
        p, moreau, g = _envelope_parts(obj, lam, x)
        out["moreau_gap"][i] = moreau - phi_star
        out["function_gap"][i] = float(obj.value(p)) - phi_star
        out["grad_norm"][i] = float(np.linalg.norm(g))
        out["prox_dist"][i] = float(np.linalg.norm(x - p))
        out["velocity_combo"][i] = float(np.linalg.norm(traj.xdots[i] + cfg.beta * g))
        out["dist_to_xstar"][i] = float(np.linalg.norm(x - x_star))
        eps = float(eps_all[i])
        if eps > 0.0:
            center = tikhonov_center(obj, lam, eps)
            out["tikhonov_gap"][i] = float(np.linalg.norm(x - center))
        else:
            out["tikhonov_gap"][i] = math.nan
    return Observables(ts=traj.ts.copy(), **out)


def _as_sample(sample):
    t, x, xdot = sample
    return float(t), np.asarray(x, dtype=float), np.asarray(xdot, dtype=float)


def energy_q(sample, q: float, cfg: SystemConfig, x_star=None) -> float:
    """Anchored energy with index q in [2, alpha - 1].

    (t^2 b - beta (q+2-alpha) t) (envelope gap) + (t^2 eps / 2) |x|^2
    + 1/2 |q (x - x*) + t (xdot + beta grad)|^2
    + (q (alpha-1-q) / 2) |x - x*|^2.
    """
    if not 2.0 <= q <= cfg.alpha - 1.0:
        raise ParameterDomainError(
            f"q must lie in [2, alpha - 1] = [2, {cfg.alpha - 1.0:.6g}]")
    t, x, xdot = _as_sample(sample)
    phi_star, xs = _require_targets(cfg.objective)
    if x_star is not None:
        xs = np.asarray(x_star, dtype=float)
    s = cfg.schedule
    b, lam, eps = float(s.b(t)), float(s.lam(t)), float(s.eps(t))
    _, moreau, g = _envelope_parts(cfg.objective, lam, x)
    gap = moreau - phi_star
    v = q * (x - xs) + t * (xdot + cfg.beta * g)
    return (
        (t ** 2 * b - cfg.beta * (q + 2.0 - cfg.alpha) * t) * gap
        + 0.5 * t ** 2 * eps * float(np.dot(x, x))
        + 0.5 * float(np.dot(v, v))
        + 0.5 * q * (cfg.alpha - 1.0 - q) * float(np.dot(x - xs, x - xs))
    )


def unanchored_energy(sample, q: float, cfg: SystemConfig, x_star=None) -> float:
    """The companion energy without anchor terms; same prefactor as energy_q.

    Differs from energy_q by exactly
    q t <xdot + beta grad, x - x*> + q (alpha - 1) / 2 |x - x*|^2.
    """
    if not 2.0 <= q <= cfg.alpha - 1.0:
        raise ParameterDomainError(
            f"q must lie in [2, alpha - 1] = [2, {cfg.alpha - 1.0:.6g}]")
    t, x, xdot = _as_sample(sample)
    phi_star, _ = _require_targets(cfg.objective)
    s = cfg.schedule
    b, lam, eps = float(s.b(t)), float(s.lam(t)), float(s.eps(t))
    _, moreau, g = _envelope_parts(cfg.objective, lam, x)
    gap = moreau - phi_star
    w = xdot + cfg.beta * g
    return (
        (t ** 2 * b - cfg.beta * (q + 2.0 - cfg.alpha) * t) * gap
        + 0.5 * t ** 2 * eps * float(np.dot(x, x))
        + 0.5 * t ** 2 * float(np.dot(w, w))
    )


def energy_pq(sample, p: float, q: float, cfg: SystemConfig, x_star=None) -> float:
    """Two-index scaled energy used for the strong-convergence argument.

    t^(p+1) (t b + beta (alpha-p-q-2)) (envelope gap)
    + (eps t^(p+2) / 2) (|x|^2 - |x*|^2) + (t^p / 2) |v|^2.
    """
    if p < 0.0 or q < 0.0:
        raise ParameterDomainError("p and q must be nonnegative")
    t, x, xdot = _as_sample(sample)
    phi_star, xs = _require_targets(cfg.objective)
    if x_star is not None:
        xs = np.asarray(x_star, dtype=float)
    s = cfg.schedule
    b, lam, eps = float(s.b(t)), float(s.lam(t)), float(s.eps(t))
    _, moreau, g = _envelope_parts(cfg.objective, lam, x)
    gap = moreau - phi_star
    v = q * (x - xs) + t * (xdot + cfg.beta * g)
    return (
        t ** (p + 1.0) * (t * b + cfg.beta * (cfg.alpha - p - q - 2.0)) * gap
        + 0.5 * eps * t ** (p + 2.0) * (float(np.dot(x, x)) - float(np.dot(xs, xs)))
        + 0.5 * t ** p * float(np.dot(v, v))
    )


def canonical_pq(alpha: float):
    """The exponent pair the strong-convergence argument instantiates."""
    return (alpha - 3.0) / 3.0, 2.0 * alpha / 3.0


def energy_q_series(traj: Trajectory, q: float) -> np.ndarray:
    cfg = traj.cfg
    return np.array([
        energy_q((traj.ts[i], traj.xs[i], traj.xdots[i]), q, cfg)
        for i in range(len(traj))
    ])


def unanchored_energy_series(traj: Trajectory, q: float) -> np.ndarray:
    cfg = traj.cfg
    return np.array([
        unanchored_energy((traj.ts[i], traj.xs[i], traj.xdots[i]), q, cfg)
        for i in range(len(traj))
    ])


@dataclass
class DescentReport:
    q: float
    a: float
    start_time: float
    intervals: int
    violations: int
    worst_excess: float
    excess_allowance: float
    passed: bool

    def format(self) -> str:
        state = "pass" if self.passed else "FAIL"
        return (f"[{state}] energy descent (q={self.q:.6g}, a={self.a:.6g}): "
                f"{self.violations}/{self.intervals} intervals above the source bound "
                f"past t={self.start_time:.6g}, worst excess {self.worst_excess:.3g} "
                f"(allowance {self.excess_allowance:.3g})")


def check_energy_descent(traj: Trajectory, q: float, a: float,
                         tol_fraction: float = 0.01) -> DescentReport:
    """Discrete check that the anchored energy decreases up to the Tikhonov
    source term (q t eps(t) / 2) |x*|^2 past the descent start time.

    Tolerates a tol_fraction share of violating intervals, each within a
    discretization allowance of 1e-6 * max(1, max |E|).
    """
    cfg = traj.cfg
    t_start = energy_descent_start(cfg, q=q, a=a)
    _, x_star = _require_targets(cfg.objective)
    mask = traj.ts >= t_start * (1.0 - 1e-12)
    if int(np.count_nonzero(mask)) < 3:
        raise InsufficientDataError(
            f"trajectory ends at {traj.ts[-1]:.6g}, too close to the descent "
            f"start {t_start:.6g}")
    idx = np.nonzero(mask)[0]
    ts = traj.ts[idx]
    E = np.array([
        energy_q((traj.ts[i], traj.xs[i], traj.xdots[i]), q, cfg) for i in idx
    ])
    xs_sq = float(np.dot(x_star, x_star))
    eps_ts = np.asarray(cfg.schedule.eps(ts), dtype=float)
    bound = 0.5 * q * ts * eps_ts * xs_sq
    diffs = np.diff(E) / np.diff(ts)
    excess = diffs - bound[:-1]
    allowance = 1e-6 * max(1.0, float(np.max(np.abs(E))))
    dust = 1e-12 * max(1.0, float(np.max(np.abs(diffs))) if diffs.size else 1.0)
    bad = excess > dust
    violations = int(np.count_nonzero(bad))
    worst = float(np.max(excess[bad])) if violations else 0.0
    passed = (violations <= tol_fraction * excess.size) and worst <= allowance
    return DescentReport(q=q, a=a, start_time=t_start, intervals=int(excess.size),
                         violations=violations, worst_excess=worst,
                         excess_allowance=allowance, passed=bool(passed))


@dataclass
class RateFit:
    quantity: str
    window: tuple
    slope: float
    npoints: int
    theory_slope: Optional[float] = None
    margin: Optional[float] = None
    warning: str = ""

    def format(self) -> str:
        txt = (f"{self.quantity}: slope {self.slope:+.3f} on "
               f"t in [{self.window[0]:.4g}, {self.window[1]:.4g}] "
               f"({self.npoints} points)")
        if self.theory_slope is not None:
            txt += f", bound {self.theory_slope:+.3f}, margin {self.margin:+.3f}"
        if self.warning:
            txt += f"  [warning: {self.warning}]"
        return txt


def fit_rate_slope(ts, values, window=None, theory_slope: Optional[float] = None,
                   quantity: str = "") -> RateFit:
    """Least-squares slope of log(value) against log(t) over a window.

    The default window is the trajectory's last decade [T/10, T].  Nonpositive
    values (quantities at round-off) truncate the window with a warning; a
    negative margin means the fit is steeper (better) than the stated bound.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if ts.shape != values.shape or ts.ndim != 1:
        raise ParameterDomainError("ts and values must be 1-d arrays of equal length")
    if window is None:
        window = (ts[-1] / 10.0, ts[-1])
    lo, hi = float(window[0]), float(window[1])
    mask = (ts >= lo) & (ts <= hi)
    warning = ""
    sel = np.nonzero(mask)[0]
    vals = values[sel]
    nonpos = np.nonzero(vals <= 0.0)[0]
    if nonpos.size:
        sel = sel[: nonpos[0]]
        vals = values[sel]
        warning = ("window truncated at the first nonpositive value "
                   "(quantity reached round-off)")
    if sel.size < 20:
        raise InsufficientDataError(
            f"only {sel.size} usable points in the fit window [{lo:.4g}, {hi:.4g}]")
    slope = float(np.polyfit(np.log(ts[sel]), np.log(vals), 1)[0])
    margin = None if theory_slope is None else theory_slope - slope
    return RateFit(quantity=quantity, window=(float(ts[sel][0]), float(ts[sel][-1])),
                   slope=slope, npoints=int(sel.size), theory_slope=theory_slope,
                   margin=margin, warning=warning)


@dataclass
class StrongConvReport:
    final_dist: float
    min_dist: float
    final_tikhonov_gap: float
    crossings: int
    classification: str  # outside | inside | crossing | degenerate

    def format(self) -> str:
        return (f"strong convergence: final |x - x*| = {self.final_dist:.6g}, "
                f"running min {self.min_dist:.6g}, final Tikhonov gap "
                f"{self.final_tikhonov_gap:.6g}, norm-ball classification "
                f"{self.classification} ({self.crossings} crossings)")


def strong_convergence_metrics(traj: Trajectory) -> StrongConvReport:
    """Distance metrics to the least-norm minimizer plus the norm-ball
    classification (trajectory outside, inside, or crossing |x*|)."""
    cfg = traj.cfg
    _, x_star = _require_targets(cfg.objective)
    obs = compute_observables(traj)
    final_dist = float(obs.dist_to_xstar[-1])
    min_dist = float(np.min(obs.dist_to_xstar))
    tik = obs.tikhonov_gap[np.isfinite(obs.tikhonov_gap)]
    final_tik = float(tik[-1]) if tik.size else math.nan
    norms = np.array([float(np.linalg.norm(x)) for x in traj.xs])
    ref = float(np.linalg.norm(x_star))
    rel = norms - ref
    dust = 1e-12 * max(1.0, float(np.max(norms)))
    above = rel > dust
    below = rel < -dust
    signs = np.where(above, 1, np.where(below, -1, 0))
    live = signs[signs != 0]
    crossings = int(np.count_nonzero(np.diff(live) != 0)) if live.size else 0
    if not live.size:
        classification = "degenerate"
    elif crossings:
        classification = "crossing"
    elif live[0] > 0:
        classification = "outside"
    else:
        classification = "inside"
    return StrongConvReport(final_dist=final_dist, min_dist=min_dist,
                            final_tikhonov_gap=final_tik, crossings=crossings,
                            classification=classification)
