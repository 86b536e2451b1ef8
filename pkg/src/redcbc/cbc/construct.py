"""Component-by-component construction of reduced rank-1 lattice rules.

Two engines are provided.  :func:`reduced_cbc_reference` evaluates the
squared worst-case error of every candidate from scratch.
:func:`reduced_cbc_fast` keeps the per-order vectors ``q_l`` (Gamma-weighted
elementary symmetric sums over the chosen components, one entry per point of
the current reduced grid), folds them onto coarser grids as ``w_j`` grows and
scores all candidates of a step with one fast product with ``Omega``.

Candidates whose error lies within ``tie_rtol * scale`` of the minimum are
treated as tied and the smallest ``z`` wins.  Mathematically tied candidates
(``z`` and ``-z`` always are) then resolve identically in both engines even
though their floating-point errors differ in the last bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BudgetExceededError, ValidationError
from ..fold_fft import FoldSpec, fold_and_sum, omega_matvec, omega_row
from ..instrument import count_operations, tally
from ..kernel import KernelSpec
from ..number_theory import Modulus, unit_group
from .types import GeneratingVector, PodWeights, ReductionSchedule
from .wce import order_sums, wce_fast

TIE_RTOL = 1e-10


@dataclass
class CbcResult:
    vector: GeneratingVector
    step_errors: np.ndarray  # e^2 of (z~_1..z~_j) for j = 1..len(step_errors)
    w_shift: int = 0
    op_count: float | None = None
    ops_by_category: dict = field(default_factory=dict)
    order_totals: np.ndarray | None = None  # sum_k q_l after the last step


def _select(errors: np.ndarray, scale: float, tie_rtol: float) -> int:
    best = errors.min()
    return int(np.flatnonzero(errors <= best + tie_rtol * abs(scale))[0])


def _check_inputs(mod, schedule, weights, upto):
    if not isinstance(schedule, ReductionSchedule):
        schedule = ReductionSchedule(tuple(schedule))
    weights.check_dimension(upto)
    return schedule


def reduced_cbc_reference(
    mod: Modulus,
    schedule: ReductionSchedule,
    weights: PodWeights,
    spec: KernelSpec = KernelSpec(),
    *,
    tie_rtol: float = TIE_RTOL,
    max_evals: float = 2e8,
) -> CbcResult:
    """Exhaustive reduced CBC: every candidate is scored by :func:`wce_fast`."""
    schedule = _check_inputs(mod, schedule, weights, len(schedule))
    b, m, N = mod.b, mod.m, mod.n
    s = len(schedule)
    s_star = schedule.s_star(m)
    cost = sum(
        Modulus(b, m - w).n * N * (j + 1) ** 2 for j, w in enumerate(schedule.w[:s_star])
    )
    if cost > max_evals:
        raise BudgetExceededError(f"reference construction needs ~{cost:.3g} operations (budget {max_evals:.3g})")
    gam = weights.product_factors
    om0 = spec.omega_zero
    z: list[int] = []
    errs = []
    for j in range(1, s + 1):
        w_j = schedule.w[j - 1]
        if w_j >= m:
            z.append(0)
        else:
            prefix_sched = ReductionSchedule(schedule.w[: j - 1])
            prefix = GeneratingVector(mod, prefix_sched, tuple(z))
            S = order_sums(prefix, weights, spec) if j > 1 else np.ones(1) * N
            e_prev = wce_fast(prefix, weights, spec)
            Gam = weights.order_factors[1 : j + 1]
            scale = e_prev + gam[j - 1] * om0 * abs(float(np.dot(Gam, S[:j]))) / N
            sched_j = ReductionSchedule(schedule.w[:j])
            cands = unit_group(Modulus(b, m - w_j))
            cand_err = np.array(
                [wce_fast(GeneratingVector(mod, sched_j, tuple(z) + (int(c),)), weights, spec) for c in cands]
            )
            z.append(int(cands[_select(cand_err, scale, tie_rtol)]))
        errs.append(wce_fast(GeneratingVector(mod, ReductionSchedule(schedule.w[:j]), tuple(z)), weights, spec))
    gv = GeneratingVector(mod, schedule, tuple(z), {"engine": "reference"})
    return CbcResult(gv, np.array(errs))


def memory_estimate(mod: Modulus, schedule: ReductionSchedule, normalize: bool = True) -> int:
    """Peak number of doubles held by the q-vector state of the fast engine."""
    s_star = schedule.s_star(mod.m)
    if s_star == 0:
        return 0
    shift = schedule.w[0] if normalize else 0
    return 2 * (s_star + 1) * mod.b ** (mod.m - max(schedule.w[0], shift))


def reduced_cbc_fast(
    mod: Modulus,
    schedule: ReductionSchedule,
    weights: PodWeights,
    spec: KernelSpec = KernelSpec(),
    *,
    normalize: bool = True,
    tie_rtol: float = TIE_RTOL,
    memory_budget: int = 1 << 28,
    count_ops: bool = False,
    tail_errors: bool = True,
) -> CbcResult:
    """Fast reduced CBC construction.

    Parameters
    ----------
    normalize : bool
        Shift ``m`` and all ``w_j`` down by ``w_1`` first.  The selections
        and the returned vector (which always refers to the original grid)
        are unchanged; only the working grid is smaller.
    memory_budget : int
        Upper limit on the number of doubles of q-vector state.
    count_ops : bool
        Record arithmetic operations of the construction loop in
        ``op_count``.
    tail_errors : bool
        Also report ``e^2`` for the trailing components with ``w_j >= m``
        (which are all 0).  That bookkeeping is O(s^2) scalar work and is
        not part of the construction proper.

    Returns
    -------
    CbcResult
    """
    if not isinstance(schedule, ReductionSchedule):
        schedule = ReductionSchedule(tuple(schedule))
    b, m = mod.b, mod.m
    s = len(schedule)
    s_star = schedule.s_star(m)
    weights.check_dimension(s if tail_errors else s_star)
    need = memory_estimate(mod, schedule, normalize)
    if need > memory_budget:
        raise BudgetExceededError(f"q-vector state needs {need} doubles (budget {memory_budget})")
    ratios = weights.ratios(s if tail_errors else s_star)
    if s_star and np.any(~np.isfinite(ratios[:s_star])):
        raise ValidationError("order ratios must be finite")
    # A positive Gamma(l) after Gamma(l-1) = 0 is rejected by ratios(); a zero
    # ratio just switches the order off.
    gam = weights.product_factors
    shift = schedule.w[0] if (normalize and s > 0) else 0
    shift = min(shift, m)
    mm = m - shift
    ww = [w - shift for w in schedule.w]
    bm = float(b) ** mm
    om0 = spec.omega_zero

    with count_operations() as counter:
        z, errs, totals = _fast_loop(b, mm, ww, s_star, ratios, gam, spec, om0, bm, tie_rtol)
    if tail_errors and s > s_star:
        errs = np.concatenate([errs, _tail(totals, ratios, gam, om0, bm, s_star, s)])
    z = z + [0] * (s - s_star)
    meta = {"engine": "fast", "w_shift": shift, "normalized": bool(normalize)}
    gv = GeneratingVector(mod, schedule, tuple(z), meta)
    return CbcResult(
        gv,
        errs,
        w_shift=shift,
        op_count=counter.total if count_ops else None,
        ops_by_category=dict(counter.by_category) if count_ops else {},
        order_totals=totals,
    )


def _fast_loop(b, mm, ww, s_star, ratios, gam, spec, om0, bm, tie_rtol):
    z: list[int] = []
    errs = np.zeros(s_star)
    if s_star == 0:
        return z, errs, np.array([bm])
    level = ww[0]
    L = b ** (mm - level)
    q = np.zeros((s_star + 1, L))
    q[0] = float(b) ** level  # fold of the all-ones vector from level 0
    e_prev = 0.0
    for j in range(1, s_star + 1):
        M = Modulus(b, mm - ww[j - 1])
        r = ratios[:j]
        g = float(gam[j - 1])
        qbar = r @ q[:j]
        tally("combine", 2.0 * j * L)
        T = omega_matvec(M, spec, qbar)
        cand = e_prev + g * T / bm
        tally("score", 3.0 * T.size)
        scale = e_prev + g * om0 * abs(float(qbar.sum())) / bm
        k = _select(cand, scale, tie_rtol)
        zj = int(unit_group(M)[k])
        z.append(zj)
        row = omega_row(M, spec, zj)
        q[1 : j + 1] += (r * g)[:, None] * row * q[:j]
        tally("update", 3.0 * j * L)
        e_prev = float(q[1 : j + 1].sum() / bm)
        tally("error", float(j * L))
        errs[j - 1] = e_prev
        # Fold the state onto the grid of the next step now, so every step
        # starts at its own level.
        if j < s_star and ww[j] > level:
            nxt = np.zeros((s_star + 1, b ** (mm - ww[j])))
            nxt[: j + 1] = fold_and_sum(FoldSpec(b, mm, level, ww[j]), q[: j + 1])
            q, level, L = nxt, ww[j], nxt.shape[1]
    return z, errs, q.sum(axis=1)


def _tail(totals, ratios, gam, om0, bm, s_star, s):
    """e^2 after appending zero components: every kernel value is omega(0)."""
    S = np.zeros(s + 1)
    S[: s_star + 1] = totals
    out = np.empty(s - s_star)
    for j in range(s_star + 1, s + 1):
        S[1 : j + 1] += ratios[:j] * gam[j - 1] * om0 * S[:j]
        out[j - s_star - 1] = S[1:].sum() / bm
    return out


def extend_errors_with_zero_components(result: CbcResult, weights: PodWeights, spec: KernelSpec, s: int) -> np.ndarray:
    """Per-step errors of ``result`` continued with zero components up to dimension ``s``."""
    d = result.step_errors.size
    if result.order_totals is None or s <= d:
        return result.step_errors[:s].copy()
    weights.check_dimension(s)
    n_state = result.order_totals.size - 1
    if n_state != d:
        raise ValidationError("order totals do not match the reported steps")
    bm = float(result.vector.mod.b) ** (result.vector.mod.m - result.w_shift)
    tail = _tail(result.order_totals, weights.ratios(s), weights.product_factors, spec.omega_zero, bm, d, s)
    return np.concatenate([result.step_errors, tail])
