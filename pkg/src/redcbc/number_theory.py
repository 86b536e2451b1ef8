"""Unit groups of prime-power moduli and their generator orderings."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonCyclicGroupError, ValidationError

# k*z products over Z_n are formed in int64; n^2 must stay below 2^63.
MAX_MODULUS = 2**31 - 1


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of ``n`` in ascending order."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class Modulus:
    """The prime power ``n = b**m``."""

    b: int
    m: int

    def __post_init__(self):
        if int(self.b) != self.b or int(self.m) != self.m:
            raise ValidationError("b and m must be integers")
        if not is_prime(self.b):
            raise ValidationError(f"base b={self.b} is not prime")
        if self.m < 0:
            raise ValidationError(f"exponent m={self.m} must be nonnegative")
        if self.b ** self.m > MAX_MODULUS:
            raise ValidationError(
                f"b^m = {self.b}^{self.m} exceeds the supported modulus {MAX_MODULUS}"
            )

    @property
    def n(self) -> int:
        return self.b ** self.m

    def reduced(self, w: int) -> "Modulus":
        """The modulus ``b**max(0, m - w)``."""
        return Modulus(self.b, max(0, self.m - w))


def totient(mod: Modulus) -> int:
    if mod.m == 0:
        return 1
    return mod.b ** (mod.m - 1) * (mod.b - 1)


def unit_group(mod: Modulus) -> np.ndarray:
    """Units of ``Z_n`` in ascending order; ``[0]`` for ``n = 1``."""
    if mod.m == 0:
        return np.zeros(1, dtype=np.int64)
    r = np.arange(mod.n, dtype=np.int64)
    return r[r % mod.b != 0]


def _is_primitive_root(g: int, mod: Modulus) -> bool:
    phi = totient(mod)
    qs = prime_factors(mod.b - 1)
    if mod.m >= 2:
        qs = sorted(set(qs) | {mod.b})
    return all(pow(g, phi // q, mod.n) != 1 for q in qs)


@lru_cache(maxsize=64)
def primitive_root(mod: Modulus) -> int:
    """Smallest primitive root modulo ``b**m`` (odd prime ``b``, ``m >= 1``)."""
    if mod.b == 2:
        raise NonCyclicGroupError(
            "units modulo 2^m form a non-cyclic group; use the direct product path"
        )
    if mod.m < 1:
        raise ValidationError("a generator ordering needs m >= 1")
    g = 2
    while not _is_primitive_root(g, mod):
        g += 1
    return g


@lru_cache(maxsize=64)
def _ordering(mod: Modulus) -> np.ndarray:
    g = primitive_root(mod)
    phi = totient(mod)
    out = np.empty(phi, dtype=np.int64)
    x = 1
    for i in range(phi):
        out[i] = x
        x = (x * g) % mod.n
    out.setflags(write=False)
    return out


def generator_ordering(mod: Modulus) -> np.ndarray:
    """Units ordered as ``g**0, g**1, ...`` for the smallest primitive root ``g``."""
    return _ordering(mod).copy()


@lru_cache(maxsize=64)
def _dlog(mod: Modulus) -> np.ndarray:
    order = _ordering(mod)
    table = np.full(mod.n, -1, dtype=np.int64)
    table[order] = np.arange(order.size, dtype=np.int64)
    table.setflags(write=False)
    return table


def discrete_log_table(mod: Modulus) -> np.ndarray:
    """``t[z] = a`` with ``z = g**a mod n`` for units ``z``, ``-1`` elsewhere."""
    return _dlog(mod).copy()
