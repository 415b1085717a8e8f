"""Time-dependent parameter schedules and their admissibility conditions.

A :class:`Schedule` carries the time scaling b(t), the smoothing index
lambda(t) and the Tikhonov weight eps(t) together with their derivatives.
The checkers certify the hypotheses behind the fast-rate, strong-convergence
and critical-damping (alpha = 3) regimes: each condition is evaluated on a
geometric grid, on a sparse far grid, and, for polynomial families, through
the sign of the asymptotically dominant monomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import InfeasibleError, ParameterDomainError, ValidationError
from .objectives import Objective, as_point

__all__ = [
    "LambdaForm",
    "PolyParams",
    "Schedule",
    "SystemConfig",
    "ConditionQuery",
    "Verdict",
    "ConditionReport",
    "polynomial_schedule",
    "eval_schedule",
    "condition_grid",
    "check_fast_rate_conditions",
    "check_strong_conv_conditions",
    "check_alpha3_conditions",
    "energy_descent_start",
    "suggest_t0",
    "suggest_t0_strong",
    "suggest_t0_alpha3",
]

_DUST = 1e-9  # relative slack for float dust on exact boundary cases


@dataclass(frozen=True)
class LambdaForm:
    """Smoothing-index family: constant c, power t**l, or bounded 1 - t**(-l)."""

    kind: str = "constant"
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "power", "bounded"):
            raise ParameterDomainError(f"unknown lambda form {self.kind!r}")
        v = float(self.value)
        if self.kind == "constant" and v <= 0.0:
            raise ParameterDomainError("constant lambda must be positive")
        if self.kind == "power" and v < 0.0:
            raise ParameterDomainError("power lambda exponent must be >= 0")
        if self.kind == "bounded" and v <= 0.0:
            raise ParameterDomainError("bounded lambda exponent must be positive")

    def fn(self, t):
        if self.kind == "constant":
            return self.value * np.ones_like(np.asarray(t, dtype=float))
        if self.kind == "power":
            return np.asarray(t, dtype=float) ** self.value
        return 1.0 - np.asarray(t, dtype=float) ** (-self.value)

    def dot(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant" or (self.kind == "power" and self.value == 0.0):
            return np.zeros_like(t)
        if self.kind == "power":
            return self.value * t ** (self.value - 1.0)
        return self.value * t ** (-self.value - 1.0)

    def dot_monomials(self):
        """lambda_dot as [(coef, exponent)] monomials."""
        if self.kind == "constant" or (self.kind == "power" and self.value == 0.0):
            return []
        if self.kind == "power":
            return [(self.value, self.value - 1.0)]
        return [(self.value, -self.value - 1.0)]

    def bounded(self) -> bool:
        return self.kind != "power" or self.value == 0.0


@dataclass(frozen=True)
class PolyParams:
    """Polynomial family b(t) = b_coeff * t**n, eps(t) = eps_coeff / t**d."""

    b_coeff: float = 1.0
    n: float = 0.0
    eps_coeff: float = 1.0
    d: float = 3.0
    lam: LambdaForm = field(default_factory=LambdaForm)

    def __post_init__(self):
        if self.b_coeff <= 0.0:
            raise ParameterDomainError("b_coeff must be positive")
        if self.n < 0.0:
            raise ParameterDomainError("n must be >= 0")
        if self.eps_coeff < 0.0:
            raise ParameterDomainError("eps_coeff must be >= 0")
        if self.d <= 0.0:
            raise ParameterDomainError("d must be positive")


@dataclass(frozen=True)
class Schedule:
    """Callable bundle (b, lambda, eps) with derivatives on [t0, inf)."""

    t0: float
    b: Callable
    b_dot: Callable
    lam: Callable
    lam_dot: Callable
    eps: Callable
    eps_dot: Callable
    family: str = "custom"
    poly: Optional[PolyParams] = None


def polynomial_schedule(params: PolyParams, t0: float) -> Schedule:
    """Build the polynomial family schedule anchored at t0 > 0."""
    t0 = float(t0)
    if t0 <= 0.0:
        raise ParameterDomainError("t0 must be positive")
    B, n, E, d = params.b_coeff, params.n, params.eps_coeff, params.d

    def b(t):
        return B * np.asarray(t, dtype=float) ** n

    def b_dot(t):
        t = np.asarray(t, dtype=float)
        return np.zeros_like(t) if n == 0.0 else B * n * t ** (n - 1.0)

    def eps(t):
        t = np.asarray(t, dtype=float)
        return np.zeros_like(t) if E == 0.0 else E * t ** (-d)

    def eps_dot(t):
        t = np.asarray(t, dtype=float)
        return np.zeros_like(t) if E == 0.0 else -E * d * t ** (-d - 1.0)

    return Schedule(
        t0=t0,
        b=b,
        b_dot=b_dot,
        lam=params.lam.fn,
        lam_dot=params.lam.dot,
        eps=eps,
        eps_dot=eps_dot,
        family="polynomial",
        poly=params,
    )


def eval_schedule(s: Schedule, t: float):
    """Evaluate (b, lam, eps, b_dot, lam_dot, eps_dot) at a single time t >= t0."""
    t = float(t)
    if t < s.t0 * (1.0 - 1e-12):
        raise ParameterDomainError(f"t = {t} is below the schedule start t0 = {s.t0}")
    return (
        float(s.b(t)),
        float(s.lam(t)),
        float(s.eps(t)),
        float(s.b_dot(t)),
        float(s.lam_dot(t)),
        float(s.eps_dot(t)),
    )


@dataclass
class SystemConfig:
    """Full description of one flow: objective, schedule and system constants."""

    objective: Objective
    schedule: Schedule
    alpha: float
    beta: float
    t0: float
    x0: np.ndarray
    xdot0: np.ndarray
    horizon: float
    lambda_floor: float = 1e-8

    def __post_init__(self):
        self.x0 = as_point(self.x0, self.objective.dim)
        self.xdot0 = as_point(self.xdot0, self.objective.dim)

    def validate(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValidationError("alpha must be a positive real")
        if not (math.isfinite(self.beta) and self.beta >= 0.0):
            raise ValidationError("beta must be a nonnegative real")
        if not (math.isfinite(self.t0) and self.t0 > 0.0):
            raise ValidationError("t0 must be positive")
        if not (math.isfinite(self.horizon) and self.horizon > self.t0):
            raise ValidationError("horizon must exceed t0")
        if self.lambda_floor <= 0.0:
            raise ValidationError("lambda_floor must be positive")
        if self.schedule.t0 > self.t0 * (1.0 + 1e-12):
            raise ValidationError("schedule starts after the system t0")
        ts = np.geomspace(self.t0, self.horizon, 512)
        lam = np.asarray(self.schedule.lam(ts))
        if np.min(lam) < self.lambda_floor:
            raise ValidationError(
                f"lambda(t) dips to {np.min(lam):.3g} below the floor {self.lambda_floor:.3g}"
            )
        bb = np.asarray(self.schedule.b(ts))
        if np.min(bb) <= 0.0:
            raise ValidationError("b(t) must stay positive on [t0, horizon]")
        ee = np.asarray(self.schedule.eps(ts))
        if np.min(ee) < 0.0:
            raise ValidationError("eps(t) must be nonnegative")
        if np.any(np.diff(ee) > 1e-12 * max(1.0, float(np.max(ee)))):
            raise ValidationError("eps(t) must be nonincreasing")
        if np.max(ee) > 0.0 and not ee[-1] < ee[0]:
            raise ValidationError("eps(t) must strictly decrease over the horizon")

    def query(self) -> "ConditionQuery":
        return ConditionQuery(self.alpha, self.beta, self.t0, self.schedule)


@dataclass(frozen=True)
class ConditionQuery:
    """The slice of a configuration that the condition checkers need."""

    alpha: float
    beta: float
    t0: float
    schedule: Schedule


def _as_query(cfg: Union[SystemConfig, ConditionQuery]) -> ConditionQuery:
    if isinstance(cfg, ConditionQuery):
        return cfg
    return cfg.query()


@dataclass
class Verdict:
    condition: str
    passed: bool
    margin: float
    witness_t: Optional[float] = None
    detail: str = ""


@dataclass
class ConditionReport:
    setting: str
    verdicts: list
    feasible_a: Optional[tuple] = None
    warnings: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def failed(self) -> list:
        return [v.condition for v in self.verdicts if not v.passed]

    def verdict(self, condition: str) -> Verdict:
        for v in self.verdicts:
            if v.condition == condition:
                return v
        raise KeyError(condition)

    def format(self) -> str:
        lines = [f"setting: {self.setting}"]
        for v in self.verdicts:
            mark = "pass" if v.passed else "FAIL"
            where = f" at t={v.witness_t:.6g}" if v.witness_t is not None else ""
            extra = f"  ({v.detail})" if v.detail else ""
            lines.append(f"  [{mark}] {v.condition}: margin {v.margin:.6g}{where}{extra}")
        if self.feasible_a is not None:
            lo, hi = self.feasible_a
            hi_txt = "inf" if math.isinf(hi) else f"{hi:.6g}"
            lines.append(f"  feasible a interval: [{lo:.6g}, {hi_txt}]")
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        lines.append(f"result: {'all conditions hold' if self.all_pass else 'FAILED: ' + ', '.join(self.failed())}")
        return "\n".join(lines)


def condition_grid(t0: float, span: float = 100.0, npts: int = 512) -> np.ndarray:
    """Geometric grid on [t0, span * t0] used for pointwise condition checks."""
    return np.geomspace(t0, span * t0, npts)


def _far_grid(t0: float) -> np.ndarray:
    return np.geomspace(100.0 * t0, 1e6 * t0, 64)


def _dominant_monomial(monomials):
    """Aggregate [(coef, exponent)] and return the dominant (coef, exponent)."""
    agg = {}
    for c, e in monomials:
        agg[e] = agg.get(e, 0.0) + c
    scale = max([abs(c) for c in agg.values()] + [1.0])
    items = [(e, c) for e, c in agg.items() if abs(c) > 1e-13 * scale]
    if not items:
        return None
    e, c = max(items)
    return c, e


def _tail_state(monomials, sense: str):
    """Whether the monomial sum eventually satisfies the inequality sense."""
    dom = _dominant_monomial(monomials)
    if dom is None:
        return True, "expression vanishes asymptotically"
    c, e = dom
    ok = c > 0 if sense == "ge" else c < 0
    return ok, f"dominant term {c:.6g} * t^{e:.6g}"


def _pointwise_verdict(cond: str, query: ConditionQuery, values_fn, sense: str,
                       monomials=None, detail: str = "") -> Verdict:
    """Check values_fn(t) >= 0 (sense 'ge') or <= 0 ('le') for all t >= t0."""
    ts = np.concatenate([condition_grid(query.t0), _far_grid(query.t0)])
    vals = np.asarray(values_fn(ts), dtype=float)
    signed = vals if sense == "ge" else -vals
    k = int(np.argmin(signed))
    margin = float(signed[k])
    tol = _DUST * max(1.0, float(np.max(np.abs(vals))))
    ok = margin >= -tol
    notes = [detail] if detail else []
    if monomials is not None:
        tail_ok, tail_note = _tail_state(monomials, sense)
        notes.append("tail: " + tail_note)
        ok = ok and tail_ok
    else:
        notes.append("tail checked numerically up to 1e6 * t0")
    return Verdict(cond, bool(ok), margin, float(ts[k]), "; ".join(notes))


def _eps_is_zero(query: ConditionQuery) -> bool:
    s = query.schedule
    if s.poly is not None:
        return s.poly.eps_coeff == 0.0
    ts = condition_grid(query.t0, npts=64)
    return bool(np.max(np.abs(np.asarray(s.eps(ts)))) == 0.0)


def _feasible_a(query: ConditionQuery):
    """Interval of a >= 1 with 2 * eps_dot <= -a * beta * eps^2 and b(t0) > 1/a.

    Returns (interval_or_None, detail, margin).  The upper endpoint is inf
    when beta = 0 or eps is identically zero.
    """
    s = query.schedule
    b0 = float(s.b(query.t0))
    a_lo = 1.0
    if b0 <= 1.0:
        a_lo = (1.0 / b0) * (1.0 + 1e-12)  # keep b(t0) > 1/a strict
    if query.beta == 0.0 or _eps_is_zero(query):
        ts = condition_grid(query.t0)
        if np.max(np.asarray(s.eps_dot(ts))) > _DUST:
            return None, "eps must be nonincreasing", -1.0
        return (a_lo, math.inf), "any a works: the quadratic decay bound is inactive", math.inf
    if s.poly is not None:
        E, d = s.poly.eps_coeff, s.poly.d
        if d < 1.0:
            return None, "eps decays too slowly: admissible a shrinks to zero", -1.0
        denom = query.beta * E
        if denom == 0.0:  # underflow of a denormal product
            return (a_lo, math.inf), "quadratic decay bound is numerically inactive", math.inf
        a_hi = (2.0 * d / denom) * query.t0 ** (d - 1.0)
    else:
        ts = np.concatenate([condition_grid(query.t0), _far_grid(query.t0)])
        ee = np.asarray(s.eps(ts))
        ed = np.asarray(s.eps_dot(ts))
        mask = ee > 0.0
        if not np.any(mask):
            return (a_lo, math.inf), "eps vanishes on the grid", math.inf
        a_hi = float(np.min(-2.0 * ed[mask] / (query.beta * ee[mask] ** 2)))
    if a_hi < a_lo:
        return None, f"empty interval: upper bound {a_hi:.6g} below lower bound {a_lo:.6g}", a_hi - a_lo
    return (a_lo, a_hi), f"a in [{a_lo:.6g}, {a_hi:.6g}]", a_hi - a_lo


def _lambda_bounded_verdict(query: ConditionQuery) -> Verdict:
    s = query.schedule
    if s.poly is not None:
        form = s.poly.lam
        ok = form.bounded()
        detail = f"lambda family {form.kind!r}"
        return Verdict("lambda_bounded", ok, 1.0 if ok else -1.0, None, detail)
    lam_mid = float(s.lam(100.0 * query.t0))
    lam_far = float(s.lam(1e6 * query.t0))
    ratio = lam_far / max(lam_mid, 1e-300)
    ok = ratio <= 1.05
    return Verdict("lambda_bounded", bool(ok), 1.05 - ratio, None,
                   f"numeric growth proxy lambda(1e6 t0)/lambda(100 t0) = {ratio:.4g}")


def _integral_tail_verdict(cond: str, query: ConditionQuery, integrand_fn,
                           poly_pass, poly_margin, poly_detail) -> Verdict:
    """Integrability of integrand over [t0, inf).

    Polynomial families are decided exactly; custom schedules fall back to a
    doubling-window decay test of the running integral.
    """
    s = query.schedule
    if _eps_is_zero(query):
        return Verdict(cond, True, math.inf, None, "eps is identically zero")
    if s.poly is not None:
        return Verdict(cond, bool(poly_pass), poly_margin, None, poly_detail)
    increments = []
    lo = 10.0 * query.t0
    for _ in range(7):
        ts = np.geomspace(lo, 2.0 * lo, 128)
        increments.append(float(np.trapezoid(integrand_fn(ts), ts)))
        lo *= 2.0
    decaying = all(b <= a * (1.0 + _DUST) for a, b in zip(increments, increments[1:]))
    shrunk = increments[-1] < 0.2 * max(increments[0], 1e-300)
    ok = decaying and shrunk
    return Verdict(cond, bool(ok), increments[0] - increments[-1], None,
                   "numeric doubling-window integrability test")


def _eps_tail_ratio_verdict(query: ConditionQuery, power: float, warnings: list) -> Verdict:
    """Vanishing of  beta / (t^power eps(t)) * integral of s^power eps(s)^2  as t grows."""
    cond = "eps_tail_ratio"
    s = query.schedule
    if query.beta == 0.0:
        return Verdict(cond, True, math.inf, None, "beta = 0 makes the ratio vanish")
    if _eps_is_zero(query):
        return Verdict(cond, True, math.inf, None, "eps is identically zero")
    if s.poly is not None:
        d = s.poly.d
        if d < 1.0:
            return Verdict(cond, False, d - 1.0, None,
                           "polynomial rule: requires d >= 1")
        if abs(d - 1.0) <= 1e-12:
            warnings.append(
                "d = 1 with beta > 0: the weighted tail average converges to a positive "
                "constant, so the vanishing-ratio certificate needs beta = 0; treating "
                "this as a flagged pass"
            )
        return Verdict(cond, True, d - 1.0, None, "polynomial rule: d >= 1")
    # numeric fallback: cumulative ratio at doubling horizons
    t_hi = 1e4 * query.t0
    ts = np.geomspace(query.t0, t_hi, 4096)
    integrand = ts ** power * np.asarray(s.eps(ts)) ** 2
    cums = np.concatenate([[0.0], np.cumsum(np.diff(ts) * 0.5 * (integrand[1:] + integrand[:-1]))])
    ratios = []
    for T in query.t0 * np.array([100.0, 400.0, 1600.0, 6400.0]):
        k = int(np.searchsorted(ts, T))
        k = min(k, ts.size - 1)
        denom = ts[k] ** power * float(s.eps(ts[k]))
        ratios.append(query.beta * cums[k] / max(denom, 1e-300))
    ok = all(b <= a * (1.0 + 1e-6) for a, b in zip(ratios, ratios[1:])) and ratios[-1] < 1e-3
    return Verdict(cond, bool(ok), 1e-3 - ratios[-1], None,
                   f"numeric ratio sequence {', '.join(f'{r:.3g}' for r in ratios)}")


def _b_growth_monomials(query: ConditionQuery, third: bool):
    p = query.schedule.poly
    if p is None:
        return None
    a, beta = query.alpha, query.beta
    if third:
        return [(p.b_coeff * (a / 3.0 - 1.0 - p.n), p.n + 1.0), (a * beta / 3.0, 0.0)]
    return [(p.b_coeff * (a - 3.0 - p.n), p.n + 1.0), (beta * (2.0 - a), 0.0)]


def check_fast_rate_conditions(cfg, grid=None) -> ConditionReport:
    """Certify the hypotheses for the fast value-gap and velocity rates.

    Requires alpha > 3, a cap on the growth of the time scale relative to
    (alpha - 3) b(t) (in plain and strictly-margined form), an eps decay at
    least quadratic against beta, integrability of t * eps(t), and a floor
    on b(t0).
    """
    q = _as_query(cfg)
    s = q.schedule
    alpha, beta, t0 = q.alpha, q.beta, q.t0
    warnings: list = []
    verdicts = []

    verdicts.append(Verdict("alpha_above_3", alpha > 3.0, alpha - 3.0, None,
                            f"alpha = {alpha:.6g}"))

    def cap_vals(ts):
        ts = np.asarray(ts, dtype=float)
        return (alpha - 3.0) * ts * np.asarray(s.b(ts)) - ts ** 2 * np.asarray(s.b_dot(ts)) \
            + beta * (2.0 - alpha)

    verdicts.append(_pointwise_verdict(
        "b_growth_cap", q, cap_vals, "ge", _b_growth_monomials(q, third=False)))

    # strict margin variant: cap_vals >= delta * t * b(t) for some delta in (0, alpha - 3)
    ts_all = np.concatenate([condition_grid(t0), _far_grid(t0)])
    tb = ts_all * np.asarray(s.b(ts_all))
    rel = cap_vals(ts_all) / np.where(tb > 0, tb, np.inf)
    k = int(np.argmin(rel))
    delta_sup = float(rel[k])
    if s.poly is not None:
        # relative margin tends to alpha - 3 - n; the grid minimum rules the infimum
        delta_sup = min(delta_sup, alpha - 3.0 - s.poly.n) if s.poly.n > 0 else delta_sup
    strict_ok = delta_sup > _DUST and alpha > 3.0
    delta_pick = min(delta_sup, alpha - 3.0) * (1.0 - 1e-9) if strict_ok else 0.0
    verdicts.append(Verdict("b_growth_margin", bool(strict_ok), delta_sup, float(ts_all[k]),
                            f"largest usable margin delta = {delta_pick:.6g}"))

    interval, detail, margin = _feasible_a(q)
    verdicts.append(Verdict("eps_decay_speed", interval is not None, margin, None, detail))

    b0 = float(s.b(t0))
    verdicts.append(Verdict("b0_vs_beta", b0 >= beta / t0 - _DUST, b0 - beta / t0, t0,
                            f"b(t0) = {b0:.6g}, beta/t0 = {beta / t0:.6g}"))

    p = s.poly
    verdicts.append(_integral_tail_verdict(
        "t_eps_integrable", q, lambda ts: ts * np.asarray(s.eps(ts)),
        poly_pass=(p is None or p.eps_coeff == 0.0 or p.d > 2.0),
        poly_margin=(math.inf if (p is None or p.eps_coeff == 0.0) else p.d - 2.0),
        poly_detail="polynomial rule: requires d > 2"))

    return ConditionReport("fast", verdicts, feasible_a=interval, warnings=warnings)


def check_strong_conv_conditions(cfg, grid=None) -> ConditionReport:
    """Certify the hypotheses for strong convergence to the least-norm minimizer."""
    q = _as_query(cfg)
    s = q.schedule
    alpha, beta, t0 = q.alpha, q.beta, q.t0
    warnings: list = []
    verdicts = []

    verdicts.append(Verdict("alpha_above_3", alpha > 3.0, alpha - 3.0, None,
                            f"alpha = {alpha:.6g}"))
    verdicts.append(_lambda_bounded_verdict(q))

    b0 = float(s.b(t0))
    need = 0.5 + beta / t0
    verdicts.append(Verdict("b0_half_plus_beta", b0 >= need - _DUST, b0 - need, t0,
                            f"b(t0) = {b0:.6g}, 1/2 + beta/t0 = {need:.6g}"))

    def cap_vals(ts):
        ts = np.asarray(ts, dtype=float)
        return (alpha - 3.0) * ts * np.asarray(s.b(ts)) - ts ** 2 * np.asarray(s.b_dot(ts)) \
            + beta * (2.0 - alpha)

    verdicts.append(_pointwise_verdict(
        "b_growth_cap", q, cap_vals, "ge", _b_growth_monomials(q, third=False)))

    def cap3_vals(ts):
        ts = np.asarray(ts, dtype=float)
        return (alpha / 3.0 - 1.0) * ts * np.asarray(s.b(ts)) - ts ** 2 * np.asarray(s.b_dot(ts)) \
            + alpha * beta / 3.0

    verdicts.append(_pointwise_verdict(
        "b_growth_cap_third", q, cap3_vals, "ge", _b_growth_monomials(q, third=True)))

    interval, detail, margin = _feasible_a(q)
    verdicts.append(Verdict("eps_decay_speed", interval is not None, margin, None, detail))

    p = s.poly
    verdicts.append(_integral_tail_verdict(
        "eps_over_tb_integrable", q,
        lambda ts: np.asarray(s.eps(ts)) / (ts * np.asarray(s.b(ts))),
        poly_pass=(p is None or p.eps_coeff == 0.0 or p.n + p.d > 0.0),
        poly_margin=(math.inf if (p is None or p.eps_coeff == 0.0) else p.n + p.d),
        poly_detail="polynomial rule: requires n + d > 0"))

    floor = 2.0 * alpha * (alpha - 3.0) + 6.0 * alpha * beta

    def floor_vals(ts):
        ts = np.asarray(ts, dtype=float)
        return 9.0 * ts ** 2 * np.asarray(s.eps(ts)) - floor

    floor_monos = None
    if p is not None:
        floor_monos = [(9.0 * p.eps_coeff, 2.0 - p.d), (-floor, 0.0)]
    verdicts.append(_pointwise_verdict(
        "t2_eps_floor", q, floor_vals, "ge", floor_monos,
        detail=f"needs 9 t^2 eps(t) >= {floor:.6g}"))

    const = 3.0 * (alpha + 3.0) * beta ** 2 + alpha ** 2 * beta

    def balance_vals(ts):
        ts = np.asarray(ts, dtype=float)
        ld = np.asarray(s.lam_dot(ts))
        return 18.0 * beta * ts + 9.0 * beta * ld \
            - 9.0 * ts * np.asarray(s.b(ts)) * (ld + 2.0 * beta) + const

    balance_monos = None
    if p is not None:
        balance_monos = [(18.0 * beta, 1.0), (-18.0 * beta * p.b_coeff, p.n + 1.0), (const, 0.0)]
        for c, e in p.lam.dot_monomials():
            balance_monos.append((9.0 * beta * c, e))
            balance_monos.append((-9.0 * p.b_coeff * c, p.n + e))
    verdicts.append(_pointwise_verdict("damping_balance", q, balance_vals, "le", balance_monos))

    verdicts.append(_eps_tail_ratio_verdict(q, alpha / 3.0 + 1.0, warnings))

    if p is not None:
        slacks = {
            "n >= 0": p.n,
            "n <= (alpha-3)/3": (alpha - 3.0) / 3.0 - p.n,
            "d >= 1": p.d - 1.0,
            "d >= beta*eps_coeff/2": p.d - beta * p.eps_coeff / 2.0,
            "d <= 2": 2.0 - p.d,
        }
        worst = min(slacks, key=slacks.get)
        verdicts.append(Verdict("poly_exponent_box", slacks[worst] >= -_DUST,
                                slacks[worst], None, f"binding: {worst}"))

    return ConditionReport("strong", verdicts, feasible_a=interval, warnings=warnings)


def check_alpha3_conditions(cfg, grid=None) -> ConditionReport:
    """Certify the critical-damping regime alpha = 3 with constant time scale."""
    q = _as_query(cfg)
    s = q.schedule
    alpha, beta, t0 = q.alpha, q.beta, q.t0
    warnings: list = []
    verdicts = []

    verdicts.append(Verdict("alpha_is_3", abs(alpha - 3.0) <= 1e-12, -abs(alpha - 3.0),
                            None, f"alpha = {alpha:.6g}"))

    p = s.poly
    if p is not None:
        ok = p.n == 0.0
        verdicts.append(Verdict("b_constant", ok, -p.n, None, f"n = {p.n:.6g}"))
    else:
        ts = condition_grid(t0)
        bd = float(np.max(np.abs(np.asarray(s.b_dot(ts)))))
        verdicts.append(Verdict("b_constant", bd <= _DUST, -bd, None,
                                "numeric: max |b_dot| on the grid"))

    b0 = float(s.b(t0))
    need = 0.5 + beta / t0
    verdicts.append(Verdict("b0_half_plus_beta", b0 >= need - _DUST, b0 - need, t0,
                            f"b(t0) = {b0:.6g}, 1/2 + beta/t0 = {need:.6g}"))
    verdicts.append(_lambda_bounded_verdict(q))

    interval, detail, margin = _feasible_a(q)
    verdicts.append(Verdict("eps_decay_speed", interval is not None, margin, None, detail))

    verdicts.append(_integral_tail_verdict(
        "eps_over_t_integrable", q, lambda ts: np.asarray(s.eps(ts)) / ts,
        poly_pass=(p is None or p.eps_coeff == 0.0 or p.d > 0.0),
        poly_margin=(math.inf if (p is None or p.eps_coeff == 0.0) else p.d),
        poly_detail="polynomial rule: requires d > 0"))

    if p is not None:
        if p.eps_coeff == 0.0:
            verdicts.append(Verdict("t2_eps_diverges", False, -1.0, None,
                                    "eps is identically zero"))
        else:
            verdicts.append(Verdict("t2_eps_diverges", p.d < 2.0, 2.0 - p.d, None,
                                    "polynomial rule: requires d < 2"))
    else:
        lo = float(t0 ** 2 * s.eps(t0))
        hi = float((1e4 * t0) ** 2 * s.eps(1e4 * t0))
        ok = hi > 1.2 * max(lo, 1e-300)
        verdicts.append(Verdict("t2_eps_diverges", bool(ok), hi - lo, None,
                                "numeric growth of t^2 eps(t)"))

    const = 2.0 * beta ** 2 + beta

    def balance_vals(ts):
        ts = np.asarray(ts, dtype=float)
        ld = np.asarray(s.lam_dot(ts))
        return 2.0 * beta * ts + beta * ld - ts * np.asarray(s.b(ts)) * (ld + 2.0 * beta) + const

    balance_monos = None
    if p is not None:
        balance_monos = [(2.0 * beta, 1.0), (-2.0 * beta * p.b_coeff, p.n + 1.0), (const, 0.0)]
        for c, e in p.lam.dot_monomials():
            balance_monos.append((beta * c, e))
            balance_monos.append((-p.b_coeff * c, p.n + e))
    verdicts.append(_pointwise_verdict("damping_balance", q, balance_vals, "le", balance_monos))

    verdicts.append(_eps_tail_ratio_verdict(q, 2.0, warnings))

    if p is not None:
        slacks = {
            "b_coeff >= 1": p.b_coeff - 1.0,
            "d >= 1": p.d - 1.0,
            "d >= beta*eps_coeff/2": p.d - beta * p.eps_coeff / 2.0,
            "d < 2": 2.0 - p.d,
        }
        worst = min(slacks, key=slacks.get)
        ok = slacks[worst] >= -_DUST and p.d < 2.0  # the upper bound is strict
        verdicts.append(Verdict("poly_exponent_box", ok,
                                slacks[worst], None, f"binding: {worst}"))

    return ConditionReport("alpha3", verdicts, feasible_a=interval, warnings=warnings)


def energy_descent_start(cfg, q: float, a: float) -> float:
    """First time past which the anchored energy with index q is nonincreasing
    up to the Tikhonov source term.

    Returns max(t0, t_settle, beta / (b(t0) - 1/a)) where t_settle is the
    first time with t^2 b(t) >= beta (q + 2 - alpha) t from then on.
    """
    query = _as_query(cfg)
    s = query.schedule
    alpha, beta, t0 = query.alpha, query.beta, query.t0
    if a < 1.0:
        raise ParameterDomainError("a must be >= 1")
    if not 2.0 <= q <= alpha - 1.0:
        raise ParameterDomainError(f"q must lie in [2, alpha - 1] = [2, {alpha - 1.0:.6g}]")
    b0 = float(s.b(t0))
    if b0 * a <= 1.0:
        raise InfeasibleError(f"need b(t0) > 1/a, got b(t0) = {b0:.6g}, 1/a = {1.0 / a:.6g}")
    coef = beta * (q + 2.0 - alpha)
    if coef <= 0.0:
        t_settle = t0
    elif s.poly is not None:
        # t^2 b(t) - coef * t >= 0  <=>  t >= (coef / b_coeff)^(1/(n+1))
        t_settle = max(t0, (coef / s.poly.b_coeff) ** (1.0 / (s.poly.n + 1.0)))
    else:
        ts = condition_grid(t0, span=1e4, npts=2048)
        vals = ts ** 2 * np.asarray(s.b(ts)) - coef * ts
        bad = np.nonzero(vals < 0.0)[0]
        if bad.size and bad[-1] == ts.size - 1:
            raise InfeasibleError("t^2 b(t) never dominates the beta term on the search grid")
        t_settle = t0 if not bad.size else float(ts[bad[-1] + 1])
    if beta > 0.0:
        t_settle = max(t_settle, beta / (b0 - 1.0 / a))
    return max(t0, t_settle)


def suggest_t0(params: PolyParams, alpha: float, beta: float, slack: float = 0.0) -> float:
    """Smallest clean starting time for the fast-rate certificate of the
    polynomial family, per the sufficient exponent box n < alpha - 3, d > 2.

    With slack = 0 the strictly-margined growth condition can sit exactly on
    its boundary; pass a positive slack to stand clear of it.
    """
    B, n, E, d = params.b_coeff, params.n, params.eps_coeff, params.d
    if alpha - 3.0 - n <= 0.0:
        raise InfeasibleError(f"requires n < alpha - 3, got n = {n:.6g}, alpha = {alpha:.6g}")
    if E > 0.0:
        if d <= 2.0:
            raise InfeasibleError(f"requires d > 2 for integrable t * eps(t), got d = {d:.6g}")
        if d < beta * E / 2.0:
            raise InfeasibleError(
                f"requires d >= beta * eps_coeff / 2 = {beta * E / 2.0:.6g}, got d = {d:.6g}")
    cands = [
        (beta / B) ** (1.0 / (n + 1.0)),
        (beta * (alpha - 2.0) / (B * (alpha - 3.0 - n))) ** (1.0 / (n + 1.0)),
    ]
    t0 = max(cands)
    if beta == 0.0:
        t0 = max(t0, 1.0)
    if beta > 0.0 and E > 0.0:
        # raise t0 until the admissible-a interval [a_lo, 2d/(beta E) t0^(d-1)]
        # is nonempty; a no-op whenever the base value already qualifies
        for _ in range(50):
            b0 = B * t0 ** n
            a_lo = max(1.0, 1.0 / b0) * (1.0 + 1e-12)
            required = (a_lo * beta * E / (2.0 * d)) ** (1.0 / (d - 1.0))
            if t0 >= required:
                break
            t0 = required * (1.0 + 1e-9)
    return t0 * (1.0 + slack)


def _escalate(params: PolyParams, alpha: float, beta: float, checker, t0: float) -> float:
    for _ in range(80):
        sched = polynomial_schedule(params, t0)
        report = checker(ConditionQuery(alpha, beta, t0, sched))
        if report.all_pass:
            return t0
        t0 *= 1.5
    raise InfeasibleError(
        f"no starting time found; still failing: {', '.join(report.failed())}")


def suggest_t0_strong(params: PolyParams, alpha: float, beta: float) -> float:
    """A starting time from which the strong-convergence certificate holds,
    found from the analytic binding constraints plus geometric escalation."""
    B, n, E, d = params.b_coeff, params.n, params.eps_coeff, params.d
    if E == 0.0:
        raise InfeasibleError("strong-convergence certificate needs eps > 0")
    floor = 2.0 * alpha * (alpha - 3.0) + 6.0 * alpha * beta
    cands = [1.0]
    if params.lam.kind == "bounded":
        cands.append(1.05)
    if d < 2.0:
        cands.append((floor / (9.0 * E)) ** (1.0 / (2.0 - d)))
    elif 9.0 * E < floor:
        raise InfeasibleError("t^2 eps(t) cannot reach the required floor for d >= 2")
    if beta > 0.0 and alpha - 3.0 - n > 0.0:
        cands.append((beta * (alpha - 2.0) / (B * (alpha - 3.0 - n))) ** (1.0 / (n + 1.0)))
    return _escalate(params, alpha, beta, check_strong_conv_conditions, max(cands))


def suggest_t0_alpha3(params: PolyParams, beta: float) -> float:
    """A starting time from which the critical-damping certificate holds."""
    B = params.b_coeff
    cands = [1.0]
    if params.lam.kind == "bounded":
        cands.append(1.05)
    if beta > 0.0:
        if B <= 0.5:
            raise InfeasibleError("needs b > 1/2 + beta/t0, impossible for b <= 1/2")
        cands.append(beta / (B - 0.5) if B > 0.5 else 1.0)
        if B > 1.0:
            cands.append(max(beta / B, (2.0 * beta ** 2 + beta) / (2.0 * beta * (B - 1.0))))
    return _escalate(params, 3.0, beta, check_alpha3_conditions, max(cands))
