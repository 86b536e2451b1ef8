"""Weights, reduction schedules and generating vectors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import ValidationError
from ..number_theory import Modulus


def _as_float_array(x, name):
    arr = np.array(x, dtype=float, copy=True).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite")
    if np.any(arr < 0):
        raise ValidationError(f"{name} must be nonnegative")
    arr.setflags(write=False)
    return arr


class PodWeights:
    """Product-and-order-dependent weights ``gamma_u = Gamma(|u|) prod_{j in u} gamma_j``.

    ``order_factors[l]`` holds ``Gamma(l)`` with ``Gamma(0) = 1``;
    ``product_factors[j-1]`` holds ``gamma_j``.  When ``Gamma`` grows like a
    factorial, pass ``order_ratios`` (``Gamma(l)/Gamma(l-1)`` for ``l >= 1``)
    so that the construction never forms the overflowing products itself.
    """

    def __init__(self, order_factors, product_factors, order_ratios=None):
        self.order_factors = _as_float_array(order_factors, "order factors")
        self.product_factors = _as_float_array(product_factors, "product factors")
        if self.order_factors.size == 0 or self.order_factors[0] != 1.0:
            raise ValidationError("order factors must start with Gamma(0) = 1")
        if order_ratios is not None:
            order_ratios = _as_float_array(order_ratios, "order ratios")
        self.order_ratios = order_ratios

    @classmethod
    def from_ratios(cls, ratios, product_factors):
        ratios = np.asarray(ratios, dtype=float).reshape(-1)
        with np.errstate(over="ignore"):
            gam = np.concatenate(([1.0], np.cumprod(ratios)))
        gam[~np.isfinite(gam)] = np.finfo(float).max
        return cls(gam, product_factors, order_ratios=ratios)

    @classmethod
    def product(cls, product_factors):
        """Product weights (``Gamma`` identically 1)."""
        s = len(product_factors)
        return cls(np.ones(s + 1), product_factors, order_ratios=np.ones(s))

    @classmethod
    def from_functions(cls, order: Callable[[int], float], prod: Callable[[int], float], s: int):
        return cls([1.0] + [order(l) for l in range(1, s + 1)], [prod(j) for j in range(1, s + 1)])

    @property
    def s(self) -> int:
        return self.product_factors.size

    @property
    def max_order(self) -> int:
        if self.order_ratios is not None:
            return self.order_ratios.size
        return self.order_factors.size - 1

    def check_dimension(self, s: int):
        if self.s < s:
            raise ValidationError(f"weights define {self.s} product factors, need {s}")
        if self.max_order < s:
            raise ValidationError(f"weights define Gamma up to order {self.max_order}, need {s}")

    def gamma(self, order: int) -> float:
        return float(self.order_factors[order])

    def ratios(self, upto: int) -> np.ndarray:
        """``Gamma(l)/Gamma(l-1)`` for ``l = 1..upto``.

        A ratio ``0/0`` is taken as 0 (the corresponding order is absent);
        a positive ``Gamma(l)`` after a zero ``Gamma(l-1)`` is rejected.
        """
        if self.order_ratios is not None:
            return np.array(self.order_ratios[:upto], dtype=float)
        num = self.order_factors[1 : upto + 1]
        den = self.order_factors[:upto]
        bad = (den == 0) & (num != 0)
        if np.any(bad):
            l = int(np.argmax(bad)) + 1
            raise ValidationError(f"Gamma({l - 1}) = 0 but Gamma({l}) > 0; ratio undefined")
        out = np.zeros(upto)
        nz = den != 0
        out[nz] = num[nz] / den[nz]
        return out

    def weight(self, u: Sequence[int]) -> float:
        """``gamma_u`` for a set of 1-based coordinate indices."""
        u = list(u)
        return self.gamma(len(u)) * math.prod(float(self.product_factors[j - 1]) for j in u)

    def truncate(self, s: int) -> "PodWeights":
        ratios = None if self.order_ratios is None else self.order_ratios[:s]
        return PodWeights(self.order_factors[: s + 1], self.product_factors[:s], ratios)

    def scaled(self, c: float) -> "PodWeights":
        """Multiply every nonempty-set weight by ``c`` (order factors ``l >= 1``)."""
        gam = self.order_factors.copy()
        gam[1:] *= c
        ratios = None
        if self.order_ratios is not None:
            ratios = self.order_ratios.copy()
            if ratios.size:
                ratios[0] *= c
        return PodWeights(gam, self.product_factors, ratios)

    def __repr__(self):
        return f"PodWeights(s={self.s}, max_order={self.max_order})"


@dataclass(frozen=True)
class ReductionSchedule:
    """Non-decreasing reduction indices ``w_1 <= ... <= w_s``."""

    w: tuple

    def __post_init__(self):
        w = tuple(int(x) for x in self.w)
        if any(x < 0 for x in w):
            raise ValidationError("reduction indices must be nonnegative")
        if any(a > b for a, b in zip(w, w[1:])):
            raise ValidationError("reduction indices must be non-decreasing")
        object.__setattr__(self, "w", w)

    def __len__(self):
        return len(self.w)

    def s_star(self, m: int) -> int:
        """Number of leading dimensions with ``w_j < m``."""
        return sum(1 for x in self.w if x < m)

    @classmethod
    def zeros(cls, s: int) -> "ReductionSchedule":
        return cls((0,) * s)

    @classmethod
    def from_rule(cls, rule, s: int, b: int) -> "ReductionSchedule":
        """Build from an explicit list, ``"zero"``, ``"linear:k"`` or ``"log"``.

        ``linear:k`` gives ``w_j = floor((j-1)/k)``; ``log`` gives ``w_j = floor(log_b j)``.
        """
        if not isinstance(rule, str):
            w = [int(x) for x in rule]
            if len(w) != s:
                raise ValidationError(f"explicit schedule has {len(w)} entries, expected {s}")
            return cls(tuple(w))
        rule = rule.strip()
        if rule == "zero":
            return cls.zeros(s)
        if rule.startswith("linear:"):
            k = int(rule.split(":", 1)[1])
            if k < 1:
                raise ValidationError("linear:k needs k >= 1")
            return cls(tuple((j - 1) // k for j in range(1, s + 1)))
        if rule == "log":
            w = []
            for j in range(1, s + 1):
                e, p = 0, b
                while p <= j:
                    e, p = e + 1, p * b
                w.append(e)
            return cls(tuple(w))
        if "," in rule or rule.isdigit():
            return cls.from_rule([int(x) for x in rule.split(",") if x.strip()], s, b)
        raise ValidationError(f"unknown schedule rule {rule!r}")


@dataclass(frozen=True)
class GeneratingVector:
    """Reduced generating vector: ``z_j`` in the units mod ``b**(m - w_j)``.

    The rule itself uses the scaled components ``b**w_j * z_j`` on ``N = b**m``
    points; components with ``w_j >= m`` are 0.
    """

    mod: Modulus
    schedule: ReductionSchedule
    z: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        z = tuple(int(x) for x in self.z)
        object.__setattr__(self, "z", z)
        if len(z) != len(self.schedule):
            raise ValidationError("generating vector and schedule lengths differ")
        b, m = self.mod.b, self.mod.m
        for j, (zj, wj) in enumerate(zip(z, self.schedule.w), start=1):
            if wj >= m:
                if zj != 0:
                    raise ValidationError(f"z_{j} must be 0 since w_{j}={wj} >= m={m}")
            elif not (0 < zj < b ** (m - wj) and zj % b != 0):
                raise ValidationError(f"z_{j}={zj} is not a unit modulo {b}^{m - wj}")

    @property
    def s(self) -> int:
        return len(self.z)

    @property
    def n(self) -> int:
        return self.mod.n

    @property
    def z_tilde(self) -> np.ndarray:
        b, m = self.mod.b, self.mod.m
        return np.array(
            [b ** min(w, m) * zj % self.mod.n if w < m else 0 for zj, w in zip(self.z, self.schedule.w)],
            dtype=np.int64,
        )

    def truncate(self, d: int) -> "GeneratingVector":
        return GeneratingVector(self.mod, ReductionSchedule(self.schedule.w[:d]), self.z[:d], dict(self.meta))
