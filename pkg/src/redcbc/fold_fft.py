"""Fold-and-sum operator and fast products with the kernel matrix Omega_n.

``Omega_n[z, k] = omega((k z mod n) / n)`` with rows indexed by the units of
``Z_n``.  For an odd prime power the units form a cyclic group; splitting the
columns into the classes ``k = b**t k'`` (``k'`` a unit mod ``b**(m-t)``) and
reordering by powers of a primitive root turns every class into a circulant
block, which is applied with one real FFT convolution.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _backend
from .errors import ValidationError
from .instrument import counting, fft_cost, tally
from .kernel import KernelSpec, omega_table
from .number_theory import Modulus, discrete_log_table, generator_ordering, totient, unit_group


@dataclass(frozen=True)
class FoldSpec:
    b: int
    m: int
    w_from: int
    w_to: int

    def __post_init__(self):
        if not 0 <= self.w_from <= self.w_to <= self.m:
            raise ValidationError(
                f"fold levels need 0 <= w'={self.w_from} <= w''={self.w_to} <= m={self.m}"
            )

    @property
    def in_len(self) -> int:
        return self.b ** (self.m - self.w_from)

    @property
    def out_len(self) -> int:
        return self.b ** (self.m - self.w_to)


def fold_and_sum(spec: FoldSpec, v):
    """Sum the ``b**(w''-w')`` consecutive blocks of length ``b**(m-w'')``.

    ``v`` may be a vector or a 2-D array whose rows are folded independently.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != spec.in_len:
        raise ValidationError(f"fold input has length {v.shape[-1]}, expected {spec.in_len}")
    if spec.w_from == spec.w_to:
        return v.copy()
    blocks = spec.in_len // spec.out_len
    out = v.reshape(v.shape[:-1] + (blocks, spec.out_len)).sum(axis=-2)
    if counting():
        rows = v.size // spec.in_len
        tally("fold", rows * (spec.in_len - spec.out_len))
    return out


@lru_cache(maxsize=64)
def _plan(mod: Modulus, spec: KernelSpec):
    b, m, n = mod.b, mod.m, mod.n
    order = generator_ordering(mod)
    units = unit_group(mod)
    dlog = discrete_log_table(mod)[units]
    blocks = []
    for t in range(m):
        M = b ** (m - t)
        phi = totient(Modulus(b, m - t))
        powers = order[:phi] % M  # g^i mod M, a generator ordering of Z_M^x
        f = omega_table(spec, M)[powers]
        neg = powers[(-np.arange(phi)) % phi]  # g^{-c} mod M
        blocks.append((phi, np.fft.rfft(f), b**t * neg, dlog % phi))
    return units, blocks


def omega_row(mod: Modulus, spec: KernelSpec, z: int) -> np.ndarray:
    """Row ``z`` of ``Omega_n``: ``omega((k z mod n)/n)`` for ``k = 0..n-1``."""
    n = mod.n
    k = np.arange(n, dtype=np.int64)
    return omega_table(spec, n)[(k * (z % n)) % n]


def omega_matvec_direct(mod: Modulus, spec: KernelSpec, v) -> np.ndarray:
    """``Omega_n v`` by the plain O(n phi(n)) product (any prime base)."""
    v = np.ascontiguousarray(v, dtype=float)
    if v.size != mod.n:
        raise ValidationError(f"vector length {v.size} != n = {mod.n}")
    units = np.ascontiguousarray(unit_group(mod), dtype=np.int64)
    if counting():
        tally("matvec", 2.0 * units.size * mod.n)
    return _backend.omega_matvec_direct(omega_table(spec, mod.n), units, v)


def omega_matvec(mod: Modulus, spec: KernelSpec, v) -> np.ndarray:
    """``T[z] = sum_k omega((k z mod n)/n) v[k]`` for units ``z`` in ascending order.

    Odd prime bases use the block-circulant FFT path, O(n log n); ``b = 2``
    falls back to the direct product.
    """
    if mod.m < 1:
        raise ValidationError("Omega_n needs n = b^m with m >= 1")
    v = np.asarray(v, dtype=float)
    if v.shape != (mod.n,):
        raise ValidationError(f"vector length {v.size} != n = {mod.n}")
    if mod.b == 2:
        return omega_matvec_direct(mod, spec, v)
    units, blocks = _plan(mod, spec)
    out = np.full(units.size, omega_table(spec, mod.n)[0] * v[0])
    for phi, fhat, gather, scatter in blocks:
        r = np.fft.irfft(fhat * np.fft.rfft(v[gather]), n=phi)
        out += r[scatter]
        if counting():
            tally("matvec", 3 * fft_cost(phi) + 6 * (phi // 2 + 1) + units.size)
    return out
