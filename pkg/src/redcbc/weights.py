"""POD weights and theoretical constants derived from random-field regularity.

The diffusion coefficient is ``a(x, y) = a0(x) + sum_j y_j psi_j(x)`` with
``y_j`` in ``[-1/2, 1/2]``.  By default ``psi_j(x) = c j^-theta sin(j pi x)``.
From the field and a regularity sequence ``b_j`` in ``(0, 1]`` this module
computes the constants ``kappa_bar``, ``kappa`` and ``kappa(k)``, the weights
that balance the QMC error bound against the norm of the integrand, the
quantity ``A_lambda`` (exactly and through an a priori upper bound), and the
dimension-truncation bound.
"""
from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .cbc.bounds import subset_bound_sum
from .cbc.types import PodWeights, ReductionSchedule
from .errors import ConditionViolation, InadmissibleFieldError, ValidationError
from .kernel import rho

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


# --------------------------------------------------------------------------
# random field and kappa constants


@dataclass
class RandomFieldSpec:
    """Affine random field with ``s_max`` terms.

    Parameters
    ----------
    a0 : float or callable
        Mean field, a constant or a vectorized function of ``x``.
    c, theta : float
        Amplitude and decay of the sine family ``c j^-theta sin(j pi x)``.
    b_seq : sequence or None
        Regularity sequence ``b_1..b_{s_max}``; ``None`` means ``j^-b_decay``.
    b_decay : float
        Decay of the default regularity sequence.
    psi : callable or None
        ``psi(j, x)`` overriding the sine family; ``j`` is a column of
        indices, ``x`` a row of points.
    """

    a0: float | Callable = 1.0
    c: float = 1.0
    theta: float = 2.0
    s_max: int = 64
    b_seq: Sequence[float] | None = None
    b_decay: float = 1.0
    psi: Callable | None = None

    def __post_init__(self):
        if self.s_max < 1:
            raise ValidationError("s_max must be positive")
        if self.c < 0:
            raise ValidationError("field amplitude c must be nonnegative")
        if self.psi is None and self.theta <= 1:
            raise ValidationError("sine family needs decay theta > 1")
        b = self.b()
        if np.any(b <= 0) or np.any(b > 1):
            raise ValidationError("regularity sequence must lie in (0, 1]")

    def b(self, s: int | None = None) -> np.ndarray:
        s = self.s_max if s is None else s
        if self.b_seq is not None:
            arr = np.asarray(self.b_seq, dtype=float)
            if arr.size < s:
                raise ValidationError(f"regularity sequence has {arr.size} entries, need {s}")
            return arr[:s].copy()
        return np.arange(1, s + 1, dtype=float) ** (-self.b_decay)

    def a0_values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if callable(self.a0):
            return np.broadcast_to(np.asarray(self.a0(x), dtype=float), x.shape).copy()
        return np.full(x.shape, float(self.a0))

    def psi_values(self, x, s: int | None = None) -> np.ndarray:
        """``psi_j(x)`` as an ``(s, len(x))`` array."""
        s = self.s_max if s is None else s
        x = np.asarray(x, dtype=float)
        j = np.arange(1, s + 1, dtype=float)[:, None]
        if self.psi is not None:
            return np.asarray(self.psi(j, x[None, :]), dtype=float)
        return self.c * j ** (-self.theta) * np.sin(np.pi * j * x[None, :])


@dataclass
class KappaConstants:
    kappa_bar: float
    kappa: float
    kappa_of_order: np.ndarray  # kappa(k) for k = 0..s_max
    a0_min: float
    a0_max: float
    refinement_gap: float  # relative change of kappa on a 4x finer grid
    tail_bar: float  # bound on the kappa_bar contribution of terms j > s_max (sine family)
    tail_kappa: float  # same for kappa, when the default power-law b_j is used


def _grid_kappas(fld: RandomFieldSpec, n: int):
    x = np.linspace(0.0, 1.0, n + 1)
    a0 = fld.a0_values(x)
    if np.any(a0 <= 0):
        raise InadmissibleFieldError("a0 must be positive on the grid")
    ab = np.abs(fld.psi_values(x))
    ratio = ab / fld.b()[:, None]
    kbar = float(np.max(ab.sum(axis=0) / (2 * a0)))
    kap = float(np.max(ratio.sum(axis=0) / (2 * a0)))
    return x, a0, ratio, kbar, kap


def compute_kappas(fld: RandomFieldSpec, grid_size: int = 1024, check: bool = True) -> KappaConstants:
    """Grid suprema of ``sum |psi_j|/(2 a0)`` and ``sum |psi_j|/b_j/(2 a0)``.

    ``kappa(k)`` is the supremum over multi-indices with ``k`` active
    coordinates.  At each grid point the best support consists of the ``k``
    largest terms, so taking the top-``k`` partial sums per point and then
    the maximum over points is exact on the grid.
    """
    if grid_size < 64:
        raise ValidationError("grid_size must be at least 64")
    x, a0, ratio, kbar, kap = _grid_kappas(fld, grid_size)
    _, _, _, kbar4, kap4 = _grid_kappas(fld, 4 * grid_size)
    gap = abs(kap4 - kap) / kap4 if kap4 > 0 else 0.0
    top = -np.sort(-ratio, axis=0)
    partial = np.vstack([np.zeros((1, x.size)), np.cumsum(top, axis=0)])
    kk = np.max(partial / (2 * a0[None, :]), axis=1)
    amin, amax = float(a0.min()), float(a0.max())
    tail_bar = tail_kappa = 0.0
    if fld.psi is None:
        s = fld.s_max
        tail_bar = fld.c * s ** (1 - fld.theta) / ((fld.theta - 1) * 2 * amin)
        q = fld.theta - fld.b_decay
        tail_kappa = fld.c * s ** (1 - q) / ((q - 1) * 2 * amin) if (fld.b_seq is None and q > 1) else math.inf
        if fld.b_seq is not None:
            tail_kappa = math.nan
    if check and max(kbar, kap) >= 1.0:
        raise InadmissibleFieldError(f"field is inadmissible: kappa_bar={kbar:.6g}, kappa={kap:.6g} (need < 1)")
    return KappaConstants(kbar, kap, kk, amin, amax, gap, tail_bar, tail_kappa)


# --------------------------------------------------------------------------
# weights


def _check_lambda(lam, lo=0.5, hi=1.0, open_hi=False):
    if not (lo < lam < hi if open_hi else lo < lam <= hi):
        raise ValidationError(f"lambda={lam} outside ({lo}, {hi}{')' if open_hi else ']'}")


def choose_lambda(p: float, delta: float = 0.25) -> float:
    """``1/(2 - 2 delta)`` for ``p <= 2/3``, else ``p/(2 - p)``."""
    if not 0 < p < 1:
        raise ValidationError(f"p={p} outside (0, 1)")
    if not 0 < delta < 0.5:
        raise ValidationError(f"delta={delta} outside (0, 1/2)")
    if p <= 2.0 / 3.0:
        return 1.0 / (2.0 - 2.0 * delta)
    return p / (2.0 - p)


def gamma_template(kappa: float, s: int, kappa_of_order=None) -> np.ndarray:
    """``Gamma(l) = kappa^l``, or ``kappa(l)^l`` when the per-order constants are given."""
    l = np.arange(s + 1, dtype=float)
    if kappa_of_order is None:
        return kappa**l
    k = np.asarray(kappa_of_order, dtype=float)[: s + 1]
    if k.size < s + 1:
        raise ValidationError("kappa(l) needed up to order s")
    out = k**l
    out[0] = 1.0
    return out


def b_tilde_default(b_seq, kappa: float) -> np.ndarray:
    return 2.0 * np.asarray(b_seq, dtype=float) / (1.0 - kappa)


def pod_weights_from_bounds(Gamma, b_tilde, schedule: ReductionSchedule, lam: float, b: int) -> PodWeights:
    """Weights minimizing the product of the QMC bound and the integrand norm.

    ``gamma_u = (Gamma(|u|)^2 prod b~_j^2 prod_{l<|u|} b^w_l / prod rho b^w_j)^(1/(1+lam))``
    in POD form: order factor ``(Gamma(l)^2 prod_{i<l} b^w_i)^(1/(1+lam))`` and
    product factor ``(b~_j^2 / (rho b^w_j))^(1/(1+lam))``.
    """
    _check_lambda(lam)
    s = len(schedule)
    Gamma = np.asarray(Gamma, dtype=float)
    bt = np.asarray(b_tilde, dtype=float)
    if Gamma.size < s + 1 or bt.size < s:
        raise ValidationError("Gamma needs s+1 entries and b_tilde s entries")
    w = np.asarray(schedule.w, dtype=float)
    lb = math.log(b)
    cw = np.concatenate(([0.0, 0.0], np.cumsum(w)[:-1])) if s else np.zeros(1)  # sum_{i<l} w_i
    with np.errstate(divide="ignore"):
        order = np.exp((2 * np.log(Gamma[: s + 1]) + cw[: s + 1] * lb) / (1 + lam))
        prod = np.exp((2 * np.log(bt[:s]) - math.log(rho(lam)) - w * lb) / (1 + lam))
    order[0] = 1.0
    return PodWeights(order, prod)


def _direct_terms(Gamma, b_tilde, schedule, lam, b):
    # per-order and per-coordinate factors of [Gamma^2lam / prod_{l<|u|} b^w_l * prod rho b~^2lam b^w_j]^(1/(1+lam))
    s = len(schedule)
    w = np.asarray(schedule.w, dtype=float)
    cw = np.concatenate(([0.0, 0.0], np.cumsum(w)[:-1]))[: s + 1]
    r = rho(lam)
    order = (np.asarray(Gamma, dtype=float)[: s + 1] ** (2 * lam) / float(b) ** cw) ** (1 / (1 + lam))
    prod = (r * np.asarray(b_tilde, dtype=float)[:s] ** (2 * lam) * float(b) ** w) ** (1 / (1 + lam))
    return order, prod


def _pod_subset_sum(order, prod):
    """``sum_u order[|u|] prod_{j in u} prod[j]`` including the empty set."""
    E = np.zeros(len(prod) + 1)
    E[0] = 1.0
    for a in prod:
        E[1:] = E[1:] + a * E[:-1]
    return float(np.dot(order[: E.size], E))


def a_lambda_exact(Gamma, b_tilde, schedule: ReductionSchedule, lam: float, b: int, form: str = "direct", method: str = "recursion") -> float:
    """``A_lambda`` summed over all subsets of ``{1:s}`` (empty set included).

    ``form`` selects the expression:

    ``"direct"``
        ``sum_u [Gamma^2lam / prod_{l<|u|} b^w_l * prod_j rho b~_j^2lam b^w_j]^(1/(1+lam))``
    ``"weights"``
        ``sum_u gamma_u^lam rho^|u| b^(sum_u w - sum_{l<|u|} w_l)`` with the balanced weights
    ``"dual"``
        ``sum_u Gamma(|u|)^2 prod b~_j^2 / gamma_u``
    """
    _check_lambda(lam)
    s = len(schedule)
    if method not in ("recursion", "enumerate"):
        raise ValidationError(f"unknown method {method!r}")
    if method == "enumerate" and s > 20:
        raise ValidationError("subset enumeration limited to s <= 20")
    if form == "weights":
        W = pod_weights_from_bounds(Gamma, b_tilde, schedule, lam, b)
        return 1.0 + subset_bound_sum(W, schedule, 10**9, b, lam, rho(lam), exponent="sum", method=method)
    if form == "direct":
        order, prod = _direct_terms(Gamma, b_tilde, schedule, lam, b)
    elif form == "dual":
        W = pod_weights_from_bounds(Gamma, b_tilde, schedule, lam, b)
        G2 = np.asarray(Gamma, dtype=float)[: s + 1] ** 2
        bt2 = np.asarray(b_tilde, dtype=float)[:s] ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            order = np.where(G2 == 0, 0.0, G2 / W.order_factors)
            prod = np.where(bt2 == 0, 0.0, bt2 / W.product_factors)
    else:
        raise ValidationError(f"unknown form {form!r}")
    if method == "recursion":
        return _pod_subset_sum(order, prod)
    total = 0.0
    for r in range(s + 1):
        for u in itertools.combinations(range(s), r):
            total += order[r] * math.prod(prod[list(u)])
    return total


def c_gamma_w_lambda(Gamma, b_tilde, schedule: ReductionSchedule, lam: float, b: int, m: int) -> float:
    """``(sum_{u nonempty} gamma_u^lam rho^|u| b^min(m, max w))^(1/lam) * sum_u Gamma^2 prod b~^2 / gamma_u``."""
    W = pod_weights_from_bounds(Gamma, b_tilde, schedule, lam, b)
    first = subset_bound_sum(W, schedule, m, b, lam, rho(lam), exponent="max")
    return first ** (1.0 / lam) * a_lambda_exact(Gamma, b_tilde, schedule, lam, b, form="dual")


def norm_sum(Gamma, b_tilde, weights: PodWeights) -> float:
    """``sum_u Gamma(|u|)^2 prod_{j in u} b~_j^2 / gamma_u`` for arbitrary POD weights.

    Terms with a zero numerator vanish; a positive numerator over a zero
    weight makes the sum infinite.
    """
    s = weights.s
    G2 = np.asarray(Gamma, dtype=float)[: s + 1] ** 2
    bt2 = np.asarray(b_tilde, dtype=float)[:s] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        order = np.where(G2 == 0, 0.0, G2 / weights.order_factors[: s + 1])
        prod = np.where(bt2 == 0, 0.0, bt2 / weights.product_factors[:s])
    return _pod_subset_sum(order, prod)


# --------------------------------------------------------------------------
# a priori bound on A_lambda


@dataclass
class BoundParams:
    """Inputs of the a priori bounds.

    ``theta`` scales ``alpha_j = (b_j b^w_j)^p / theta``; ``None`` picks the
    value minimizing the bound.  ``lam`` defaults to :func:`choose_lambda`.
    """

    p: float = 0.5
    delta: float = 0.25
    theta: float | None = None
    lam: float | None = None
    C: float = 1.0
    f_norm: float = 1.0
    G_norm: float = 1.0

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValidationError(f"p={self.p} outside (0, 1)")
        if self.lam is None:
            self.lam = choose_lambda(self.p, self.delta)

    @property
    def lambda_(self) -> float:
        return float(self.lam)


@dataclass
class ALambdaBound:
    value: float
    theta: float
    L: float
    Sigma: float
    series: float  # 1 + sum_k kappa^k prod b^(-w/2) Sigma^k / k!
    exp_arg: float
    slack_ratio: float  # 1 - L*Sigma, must be positive
    slack_summability: float  # (1-p) 2lam/(1-lam) - p, must be nonnegative
    diagnostics: dict = field(default_factory=dict)


def _a_bound_eval(theta, kappa, bw, w, b, lam, p):
    s = bw.size
    Sigma = float(np.sum(bw**p)) / theta
    L = kappa * float(b) ** (-w[0] / 2) / 2 if s else 0.0
    # k = 0 contributes the empty set
    series, term = 1.0, 1.0
    for k in range(1, s + 1):
        term *= kappa * Sigma / k * (float(b) ** (-w[k - 2] / 2) if k >= 2 else 1.0)
        series += term
        if term < 1e-15 * series:
            break
    q = 2 * lam / (1 - lam)
    const = (1 - kappa) ** (-q) * rho(lam) ** (1 / (1 - lam)) * 4 ** (lam / (1 - lam))
    tail = float(np.sum((bw * theta / bw**p) ** q))
    exp_arg = (1 - lam) / (1 + lam) * const * tail
    return series, exp_arg, Sigma, L


def a_lambda_upper_bound(params: BoundParams, kappa: float, b_seq, schedule: ReductionSchedule, b: int) -> ALambdaBound:
    """A priori bound on ``A_lambda`` for ``Gamma(l) = kappa^l`` and ``b~_j = 2 b_j/(1-kappa)``.

    ``series^(2lam/(1+lam)) * exp(exp_arg)`` with
    ``alpha_j = (b_j b^w_j)^p / theta``, ``Sigma = sum alpha_j``,
    ``series = sum_{k>=0} kappa^k prod_{l<k} b^(-w_l/2) Sigma^k / k!`` and
    ``exp_arg = (1-lam)/(1+lam) (1-kappa)^(-2lam/(1-lam)) rho^(1/(1-lam))
    4^(lam/(1-lam)) sum_j (b_j b^w_j / alpha_j)^(2lam/(1-lam))``.

    Raises
    ------
    ConditionViolation
        If ``L * Sigma >= 1`` with ``L = kappa b^(-w_1/2)/2`` (ratio condition)
        or if ``lam < p/(2-p)`` (summability condition).
    """
    lam, p = params.lambda_, params.p
    _check_lambda(lam, open_hi=True)
    s = len(schedule)
    w = np.asarray(schedule.w, dtype=float)
    bw = np.asarray(b_seq, dtype=float)[:s] * float(b) ** w
    slack2 = (1 - p) * 2 * lam / (1 - lam) - p
    if slack2 < -1e-12:
        raise ConditionViolation(
            f"summability condition fails: lambda={lam:.6g} < p/(2-p)={p / (2 - p):.6g}"
        )
    Sp = float(np.sum(bw**p))
    L = kappa * float(b) ** (-w[0] / 2) / 2 if s else 0.0
    theta = params.theta
    if theta is None:
        lo = max(L * Sp * (1 + 1e-9), 1e-12)

        def obj(t):
            series, exp_arg, _, _ = _a_bound_eval(math.exp(t), kappa, bw, w, b, lam, p)
            return 2 * lam / (1 + lam) * math.log(series) + exp_arg

        res = minimize_scalar(obj, bounds=(math.log(lo), math.log(lo) + 30.0), method="bounded")
        theta = math.exp(res.x)
    series, exp_arg, Sigma, L = _a_bound_eval(theta, kappa, bw, w, b, lam, p)
    slack1 = 1.0 - L * Sigma
    if slack1 <= 0:
        raise ConditionViolation(
            f"ratio condition fails: L*Sigma = {L * Sigma:.6g} >= 1 (L={L:.6g}, Sigma={Sigma:.6g}, theta={theta:.6g})"
        )
    log_value = 2 * lam / (1 + lam) * math.log(series) + exp_arg
    value = math.exp(log_value) if log_value < 700 else math.inf  # finite but not representable
    return ALambdaBound(value, theta, L, Sigma, series, exp_arg, slack1, slack2, {"sum_bw_p": Sp})


# --------------------------------------------------------------------------
# truncation and derivative bounds


def truncation_bound(a0_min, a0_max, kappa_bar, kappa, G_norm, f_norm, b_tail_sup) -> float:
    """Bound on ``|E[G(u - u^s)]|`` in terms of ``sup_{j>s} b_j``."""
    t = a0_max * kappa * b_tail_sup / ((1 - kappa_bar) * a0_min)
    if t >= 1:
        raise ConditionViolation(f"truncation proviso fails: kappa a0max sup b / ((1-kappa_bar) a0min) = {t:.6g} >= 1")
    denom = (1 - kappa_bar) * a0_min - a0_max * kappa * b_tail_sup
    return G_norm * f_norm / denom * t**2


def derivative_bound_rhs(k: int, kappa_k: float, kappa_bar: float, f_norm: float = 1.0, a0_min: float = 1.0) -> float:
    """``(2 kappa(k)/(1-kappa_bar))^k ||f|| / ((1-kappa_bar) a0_min)``; the ``b^nu`` factor is left out."""
    if k < 0:
        raise ValidationError("order k must be nonnegative")
    return (2 * kappa_k / (1 - kappa_bar)) ** k * f_norm / ((1 - kappa_bar) * a0_min)


# --------------------------------------------------------------------------
# configuration file


@dataclass
class WeightConfig:
    field: RandomFieldSpec
    bounds: BoundParams
    schedule_rule: object = "zero"
    template: str = "kappa"  # or "kappa_k" for Gamma(l) = kappa(l)^l
    grid_size: int = 1024
    raw: dict = field(default_factory=dict)

    def schedule(self, s: int, b: int) -> ReductionSchedule:
        return ReductionSchedule.from_rule(self.schedule_rule, s, b)

    def pod_weights(self, s: int, b: int, schedule: ReductionSchedule | None = None, kappas: KappaConstants | None = None) -> PodWeights:
        if schedule is None:
            schedule = self.schedule(s, b)
        if kappas is None:
            kappas = compute_kappas(self.field, self.grid_size)
        if s > self.field.s_max:
            raise ValidationError(f"field has s_max={self.field.s_max} < s={s}")
        kk = kappas.kappa_of_order if self.template == "kappa_k" else None
        Gam = gamma_template(kappas.kappa, s, kk)
        bt = b_tilde_default(self.field.b(s), kappas.kappa)
        lam = min(self.bounds.lambda_, 1.0)
        return pod_weights_from_bounds(Gam, bt, schedule, lam, b).scaled(self.bounds.C)


_FIELD_KEYS = {"a0", "c", "theta", "s_max", "b", "b_decay"}
_BOUND_KEYS = {"p", "delta", "C", "theta", "lambda", "f_norm", "G_norm"}


def parse_config(data: dict) -> WeightConfig:
    """Build a :class:`WeightConfig` from a ``{field, bounds, schedule}`` mapping."""
    fdat = dict(data.get("field", {}))
    bdat = dict(data.get("bounds", {}))
    sdat = dict(data.get("schedule", {}))
    extra = (set(fdat) - _FIELD_KEYS) | (set(bdat) - _BOUND_KEYS)
    if extra:
        raise ValidationError(f"unknown configuration keys: {sorted(extra)}")
    b = fdat.pop("b", None)
    fkw = {k: fdat[k] for k in ("a0", "c", "theta", "s_max", "b_decay") if k in fdat}
    if isinstance(b, (list, tuple)):
        fkw["b_seq"] = [float(x) for x in b]
    elif b is not None:
        raise ValidationError("field.b must be a list; use field.b_decay for j^-q sequences")
    try:
        fld = RandomFieldSpec(**fkw)
        bp = BoundParams(
            p=bdat.get("p", 0.5),
            delta=bdat.get("delta", 0.25),
            theta=bdat.get("theta"),
            lam=bdat.get("lambda"),
            C=bdat.get("C", 1.0),
            f_norm=bdat.get("f_norm", 1.0),
            G_norm=bdat.get("G_norm", 1.0),
        )
    except TypeError as exc:
        raise ValidationError(str(exc)) from None
    return WeightConfig(
        fld,
        bp,
        sdat.get("rule", "zero"),
        data.get("weights", {}).get("template", "kappa"),
        int(data.get("weights", {}).get("grid_size", 1024)),
        data,
    )


def load_config(path) -> WeightConfig:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError(f"malformed config {path}: {exc}") from None
    return parse_config(data)
