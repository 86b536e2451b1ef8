"""Korobov kernel function, Riemann zeta, and the Sobolev/Korobov weight map.

For even smoothness ``alpha`` the lattice kernel

    omega(x) = sum_{h != 0} exp(2 pi i h x) / |h|**alpha

has the closed form ``(-1)**(alpha/2 + 1) (2 pi)**alpha B_alpha(x) / alpha!``
with ``B_alpha`` the Bernoulli polynomial, so it is evaluated at unit cost.
The shift-averaged kernel of the unanchored Sobolev space is ``B_2({x})``,
i.e. the ``alpha = 2`` Korobov kernel divided by ``2 pi**2``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ValidationError

TWO_PI_SQ = 2.0 * math.pi**2

# B_2, B_4, ..., B_20
_BERNOULLI_EVEN = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
    Fraction(43867, 798), Fraction(-174611, 330),
]


class Space(str, enum.Enum):
    KOROBOV = "korobov"
    SOBOLEV = "sobolev"  # shift-averaged unanchored Sobolev kernel


@dataclass(frozen=True)
class KernelSpec:
    alpha: int = 2
    space: Space = Space.KOROBOV

    def __post_init__(self):
        object.__setattr__(self, "space", Space(self.space))
        if self.alpha not in (2, 4, 6):
            raise ValidationError(f"unsupported smoothness alpha={self.alpha}; use 2, 4 or 6")
        if self.space is Space.SOBOLEV and self.alpha != 2:
            raise ValidationError("the shift-averaged Sobolev kernel requires alpha=2")

    @property
    def omega_zero(self) -> float:
        """Kernel value at 0, which is also its maximum."""
        if self.space is Space.SOBOLEV:
            return 1.0 / 6.0
        return 2.0 * zeta(float(self.alpha))


def bernoulli_poly(alpha: int, x):
    x = np.asarray(x, dtype=float)
    if alpha == 2:
        return x * x - x + 1.0 / 6.0
    if alpha == 4:
        return x * x * (x * x - 2.0 * x + 1.0) - 1.0 / 30.0
    if alpha == 6:
        x2 = x * x
        return x2 * (x2 * (x2 - 3.0 * x + 2.5) - 0.5) + 1.0 / 42.0
    raise ValidationError(f"no Bernoulli polynomial of degree {alpha} available")


def omega(spec: KernelSpec, x):
    """Evaluate the kernel function at ``x`` (reduced modulo 1)."""
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    if spec.space is Space.SOBOLEV:
        out = bernoulli_poly(2, x)
    else:
        a = spec.alpha
        sign = -1.0 if (a // 2) % 2 == 0 else 1.0
        out = sign * (2.0 * math.pi) ** a / math.factorial(a) * bernoulli_poly(a, x)
    return out if out.ndim else float(out)


@lru_cache(maxsize=128)
def _table(spec: KernelSpec, n: int) -> np.ndarray:
    # Evaluate on r <= n/2 and mirror so that tab[r] == tab[n - r] bit for bit.
    half = n // 2
    r = np.arange(half + 1, dtype=np.int64)
    vals = omega(spec, r / n)
    tab = np.empty(n, dtype=float)
    tab[: half + 1] = vals
    if n > 1:
        tab[half + 1 :] = vals[1 : n - half][::-1]
    tab.setflags(write=False)
    return tab


def omega_table(spec: KernelSpec, n: int) -> np.ndarray:
    """Read-only array ``omega(r / n)`` for ``r = 0..n-1``, exactly symmetric."""
    if n < 1:
        raise ValidationError("table length must be positive")
    return _table(spec, int(n))


def zeta(s: float, terms: int = 16, corrections: int = 10) -> float:
    """Riemann zeta for real ``s > 1`` by Euler-Maclaurin summation."""
    s = float(s)
    if not s > 1.0:
        raise ValidationError(f"zeta(s) diverges for s={s} <= 1")
    if corrections > len(_BERNOULLI_EVEN):
        raise ValidationError(f"at most {len(_BERNOULLI_EVEN)} correction terms available")
    M = terms
    head = math.fsum(n ** (-s) for n in range(1, M))
    tail = M ** (1.0 - s) / (s - 1.0) + 0.5 * M ** (-s)
    rising = s  # s (s+1) ... (s+2k-2)
    for k in range(1, corrections + 1):
        coef = float(_BERNOULLI_EVEN[k - 1]) / math.factorial(2 * k)
        tail += coef * rising * M ** (-s - 2 * k + 1)
        rising *= (s + 2 * k - 1) * (s + 2 * k)
    return head + tail


def rho(lam: float) -> float:
    """``2 zeta(2 lam) (2 pi^2)^(-lam)`` for ``lam`` in ``(1/2, 1]``."""
    if not 0.5 < lam <= 1.0:
        raise ValidationError(f"lambda={lam} outside (1/2, 1]")
    return 2.0 * zeta(2.0 * lam) * TWO_PI_SQ ** (-lam)


def sobolev_to_korobov_weights(weights):
    """Map Sobolev POD weights to the equivalent alpha=2 Korobov weights.

    Each product factor is divided by ``2 pi^2``; order factors are unchanged.
    """
    from .cbc.types import PodWeights

    return PodWeights(
        weights.order_factors,
        np.asarray(weights.product_factors, dtype=float) / TWO_PI_SQ,
        order_ratios=weights.order_ratios,
    )
