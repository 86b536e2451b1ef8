"""Squared worst-case error of a rank-1 lattice rule for POD weights.

    e^2(z) = 1/N sum_k sum_{u nonempty} Gamma(|u|) prod_{j in u} gamma_j omega({k z_j / N})
"""
from __future__ import annotations

import numpy as np

from .. import _backend
from ..errors import BudgetExceededError
from ..kernel import KernelSpec, omega, omega_table
from .types import GeneratingVector, PodWeights


def kernel_matrix(gv: GeneratingVector, spec: KernelSpec) -> np.ndarray:
    """``X[j, k] = omega(((k * ztilde_j) mod N) / N)``, shape ``(s, N)``."""
    N = gv.n
    k = np.arange(N, dtype=np.int64)
    tab = omega_table(spec, N)
    return np.ascontiguousarray(tab[(gv.z_tilde[:, None] * k[None, :]) % N])


def order_sums(gv: GeneratingVector, weights: PodWeights, spec: KernelSpec) -> np.ndarray:
    """``S[l] = sum_k P_l(k)``, the per-order sums of the per-point recursion."""
    weights.check_dimension(gv.s)
    X = kernel_matrix(gv, spec)
    gam = np.ascontiguousarray(weights.product_factors[: gv.s])
    return np.asarray(_backend.order_sums(X, gam))


def wce_fast(gv: GeneratingVector, weights: PodWeights, spec: KernelSpec = KernelSpec()) -> float:
    """Squared worst-case error in O(N s^2) via the order recursion per point.

    For every ``k`` the elementary symmetric sums
    ``P_l = P_l + gamma_j omega_j(k) P_{l-1}`` are accumulated over ``j``,
    then ``e^2 = 1/N sum_l Gamma(l) sum_k P_l(k)``.
    """
    if gv.s == 0:
        return 0.0
    S = order_sums(gv, weights, spec)
    gam = weights.order_factors[1 : gv.s + 1]
    terms = np.where(S[1:] == 0.0, 0.0, gam * S[1:])
    return float(terms.sum() / gv.n)


def wce_bruteforce(
    gv: GeneratingVector,
    weights: PodWeights,
    spec: KernelSpec = KernelSpec(),
    max_terms: int = 1 << 23,
) -> float:
    """Reference value by explicit enumeration of every nonempty subset ``u``.

    Independent of :func:`wce_fast`: kernel values come straight from the
    closed form and every subset product is formed on its own.
    """
    s, N = gv.s, gv.n
    if s > 20 or N * (1 << s) > max_terms:
        raise BudgetExceededError(
            f"brute-force evaluation needs N*2^s = {N}*2^{s} terms (budget {max_terms})"
        )
    weights.check_dimension(s)
    if s == 0:
        return 0.0
    k = np.arange(N, dtype=np.int64)
    X = omega(spec, ((gv.z_tilde[:, None] * k[None, :]) % N) / N).reshape(s, N)
    prods = np.empty((1 << s, N))
    prods[0] = 1.0
    total = 0.0
    for mask in range(1, 1 << s):
        low = mask & -mask
        j = low.bit_length() - 1
        prods[mask] = prods[mask ^ low] * X[j]
        u = [i + 1 for i in range(s) if mask >> i & 1]
        total += weights.weight(u) * prods[mask].sum()
    return total / N


def wce_product(gv: GeneratingVector, gammas, spec: KernelSpec = KernelSpec()) -> float:
    """Product-weight form ``1/N sum_k [prod_j (1 + gamma_j omega_j(k)) - 1]``."""
    gammas = np.asarray(gammas, dtype=float)[: gv.s]
    X = kernel_matrix(gv, spec)
    return float(np.mean(np.prod(1.0 + gammas[:, None] * X, axis=0) - 1.0))
