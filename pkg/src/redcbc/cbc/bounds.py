"""Error bounds for reduced CBC vectors (Korobov and shift-averaged Sobolev)."""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..errors import ValidationError
from ..kernel import rho, zeta
from .types import GeneratingVector, PodWeights, ReductionSchedule


def _elementary_step(E, a):
    E[1:] = E[1:] + a * E[:-1]


def subset_bound_sum(
    weights: PodWeights,
    schedule: ReductionSchedule,
    m: int,
    b: int,
    lam: float,
    c: float,
    exponent: str = "max",
    method: str = "recursion",
) -> float:
    """``sum_{u nonempty} gamma_u^lam c^|u| b^{E(u)}`` over ``u`` in ``{1:d}``.

    ``exponent="max"`` uses ``E(u) = min(m, max_{j in u} w_j)``;
    ``exponent="sum"`` uses ``E(u) = sum_{j in u} w_j - sum_{l < |u|} w_l``,
    which is never smaller because ``w`` is non-decreasing.  Both are kept:
    the second one is what the weight choice is optimized against.
    """
    d = len(schedule)
    weights.check_dimension(d)
    w = np.asarray(schedule.w, dtype=float)
    gam = weights.order_factors[: d + 1] ** lam
    a = weights.product_factors[:d] ** lam * c
    if method == "enumerate":
        if d > 20:
            raise ValidationError("subset enumeration limited to d <= 20")
        total = 0.0
        for r in range(1, d + 1):
            for u in itertools.combinations(range(d), r):
                if exponent == "max":
                    e = min(m, w[u[-1]])
                else:
                    e = w[list(u)].sum() - w[: r - 1].sum()
                total += gam[r] * math.prod(a[list(u)]) * float(b) ** e
        return total
    if exponent == "max":
        # Group subsets by their largest index i; w is monotone so max w = w_i.
        E = np.zeros(d + 1)
        E[0] = 1.0
        total = 0.0
        for i in range(d):
            inner = float(np.dot(gam[1 : i + 2], E[: i + 1]))
            total += float(b) ** min(m, w[i]) * a[i] * inner
            _elementary_step(E, a[i])
        return total
    if exponent == "sum":
        E = np.zeros(d + 1)
        E[0] = 1.0
        for i in range(d):
            _elementary_step(E, a[i] * float(b) ** w[i])
        prefix = np.concatenate(([0.0], np.cumsum(w)))  # sum_{l<=r} w_l
        r = np.arange(1, d + 1)
        return float(np.sum(gam[1:] * E[1:] * float(b) ** (-prefix[r - 1])))
    raise ValidationError(f"unknown exponent rule {exponent!r}")


def theorem3_bound(gv: GeneratingVector, weights: PodWeights, alpha: int, lam: float) -> float:
    """Upper bound on ``e^2`` in the Korobov space for a reduced CBC vector, ``lam`` in ``(1/alpha, 1]``."""
    if not 1.0 / alpha < lam <= 1.0:
        raise ValidationError(f"lambda={lam} outside (1/alpha, 1] = ({1 / alpha}, 1]")
    c = 2.0 * zeta(alpha * lam)
    S = subset_bound_sum(weights, gv.schedule, gv.mod.m, gv.mod.b, lam, c)
    return (S * 2.0 / gv.n) ** (1.0 / lam)


def theorem4_rmse_bound(gv: GeneratingVector, weights: PodWeights, lam: float) -> float:
    """Shift-averaged worst-case error bound (RMSE per unit Sobolev norm), ``lam`` in ``(1/2, 1]``."""
    if not 0.5 < lam <= 1.0:
        raise ValidationError(f"lambda={lam} outside (1/2, 1]")
    S = subset_bound_sum(weights, gv.schedule, gv.mod.m, gv.mod.b, lam, rho(lam))
    return (S * 2.0 / gv.n) ** (1.0 / (2.0 * lam))
