"""Piecewise-linear finite elements for ``-(a(x, y) u')' = f`` on ``(0, 1)``, ``u(0) = u(1) = 0``.

The coefficient is evaluated at cell midpoints and the load by the
trapezoidal rule, so the stiffness matrix is tridiagonal and every solve is
a single sweep of Gaussian elimination.  Parameter vectors can be batched:
``y`` of shape ``(B, s)`` gives ``B`` independent solves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _backend
from .errors import InadmissibleFieldError, ValidationError
from .weights import RandomFieldSpec


def _as_function(f):
    if f is None:
        f = 1.0
    if callable(f):
        return f
    c = float(f)
    return lambda x: np.full(np.shape(x), c)


@dataclass(frozen=True)
class FemMesh:
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValidationError("mesh needs at least 2 cells")

    @classmethod
    def from_h(cls, h: float) -> "FemMesh":
        n = round(1.0 / h)
        if abs(n * h - 1.0) > 1e-9:
            raise ValidationError(f"1/h must be an integer, got h={h}")
        return cls(n)

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * self.h

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.h


class TruncatedCoefficient:
    """``a(x, (y_1..y_s, 0, ...))`` for one or many parameter vectors ``y``."""

    def __init__(self, field: RandomFieldSpec, s: int, y=None):
        if s > field.s_max:
            raise ValidationError(f"truncation dimension s={s} exceeds s_max={field.s_max}")
        self.field = field
        self.s = s
        y = np.zeros(s) if y is None else np.asarray(y, dtype=float)
        if y.shape[-1:] != (s,):
            raise ValidationError(f"parameter vector must have length s={s}")
        if np.any(np.abs(y) > 0.5 + 1e-12):
            raise ValidationError("parameters must lie in [-1/2, 1/2]")
        self.y = y

    @property
    def batched(self) -> bool:
        return self.y.ndim == 2

    def values(self, x) -> np.ndarray:
        """Coefficient at points ``x``; shape ``(B, len(x))`` (``B = 1`` when unbatched)."""
        x = np.asarray(x, dtype=float)
        a0 = self.field.a0_values(x)
        y = np.atleast_2d(self.y)
        if self.s == 0:
            return np.broadcast_to(a0, (y.shape[0], x.size)).copy()
        return a0[None, :] + y @ self.field.psi_values(x, self.s)


def stiffness(mesh: FemMesh, a_cells) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the stiffness matrix for cell coefficients ``a_cells`` (rows batched)."""
    a = np.atleast_2d(np.asarray(a_cells, dtype=float))
    h = mesh.h
    diag = (a[:, :-1] + a[:, 1:]) / h
    off = -a[:, 1:-1] / h
    return np.ascontiguousarray(diag), np.ascontiguousarray(off)


def load_vector(mesh: FemMesh, f) -> np.ndarray:
    f = _as_function(f)
    return mesh.h * np.asarray(f(mesh.interior), dtype=float)


def _solve(mesh, a_cells, F):
    if np.any(a_cells <= 0):
        raise InadmissibleFieldError("diffusion coefficient is not positive at a quadrature point")
    diag, off = stiffness(mesh, a_cells)
    rhs = np.ascontiguousarray(np.atleast_2d(F), dtype=float)
    u, minpiv = _backend.thomas_spd(diag, off, rhs)
    if not minpiv > 0:
        raise InadmissibleFieldError(f"stiffness matrix not positive definite (pivot {minpiv:.3g})")
    return np.asarray(u)


def assemble_solve(mesh: FemMesh, coeff: TruncatedCoefficient, f=None) -> np.ndarray:
    """Interior nodal values of the Galerkin solution; ``(B, n-1)`` when ``coeff`` is batched."""
    a = coeff.values(mesh.midpoints)
    u = _solve(mesh, a, load_vector(mesh, f))
    return u if coeff.batched else u[0]


def functional_G(mesh: FemMesh, u, g=None) -> np.ndarray | float:
    """Trapezoidal ``int g u_h`` (boundary values are zero)."""
    gv = np.asarray(_as_function(g)(mesh.interior), dtype=float)
    out = mesh.h * (np.asarray(u) @ gv)
    return float(out) if np.ndim(out) == 0 else out


def dual_norm(mesh: FemMesh, f=None) -> float:
    """Discrete ``||f||_{V*}`` for ``V = H^1_0`` with norm ``||v'||``: ``sqrt(F^T K_1^-1 F)``."""
    F = load_vector(mesh, f)
    u = _solve(mesh, np.ones(mesh.n_cells), F)[0]
    return math.sqrt(max(float(F @ u), 0.0))


def l2_norm(mesh: FemMesh, f=None) -> float:
    vals = np.asarray(_as_function(f)(mesh.nodes), dtype=float)
    return math.sqrt(mesh.h * (np.sum(vals**2) - 0.5 * (vals[0] ** 2 + vals[-1] ** 2)))


def energy_stability_check(mesh: FemMesh, coeff: TruncatedCoefficient, f, kappa_bar: float, a0_min: float, rtol: float = 1e-8):
    """Check ``u^T K u <= ||f||^2_{V*,h} / ((1 - kappa_bar) a0_min)`` for every batched solve.

    Returns ``(ok, lhs, rhs)``.
    """
    a = coeff.values(mesh.midpoints)
    F = load_vector(mesh, f)
    u = _solve(mesh, a, F)
    lhs = u @ F  # u^T K u = F^T u
    rhs = dual_norm(mesh, f) ** 2 / ((1 - kappa_bar) * a0_min)
    return bool(np.all(lhs <= rhs * (1 + rtol))), lhs, rhs


@dataclass
class ConvergenceProbe:
    h: np.ndarray
    values: np.ndarray
    errors: np.ndarray  # vs exact value, or successive differences
    orders: np.ndarray  # observed order per refinement step (nan when degenerate)
    degenerate: np.ndarray  # True where the error is at rounding level
    reference: str  # "exact" or "successive"

    @property
    def min_order(self) -> float:
        ok = ~np.isnan(self.orders)
        return float(self.orders[ok].min()) if ok.any() else math.nan


def fem_convergence_probe(
    field: RandomFieldSpec,
    n_cells_levels,
    f=None,
    g=None,
    y=None,
    s: int | None = None,
    exact: float | None = None,
    rounding_tol: float = 1e-13,
) -> ConvergenceProbe:
    """Observed order of ``G(u_h)`` under mesh refinement at fixed ``y``.

    With ``exact`` the errors are ``|G_h - exact|``; otherwise successive
    differences ``|G_h - G_{h/r}|`` are used (needs three levels).  Errors
    below ``rounding_tol * max|G|`` are flagged and give no order.
    """
    levels = [int(n) for n in n_cells_levels]
    if len(levels) < 3:
        raise ValidationError("convergence probe needs at least 3 mesh levels")
    s = field.s_max if s is None else s
    coeff = TruncatedCoefficient(field, s, y)
    vals = np.array([functional_G(FemMesh(n), assemble_solve(FemMesh(n), coeff, f), g) for n in levels])
    h = 1.0 / np.array(levels, dtype=float)
    if exact is not None:
        err, hh, ref = np.abs(vals - exact), h, "exact"
    else:
        err, hh, ref = np.abs(np.diff(vals)), h[:-1], "successive"
    scale = max(np.max(np.abs(vals)), 1e-300)
    degen = err <= rounding_tol * scale
    orders = np.full(err.size - 1, np.nan)
    for i in range(err.size - 1):
        if not (degen[i] or degen[i + 1]):
            orders[i] = math.log(err[i] / err[i + 1]) / math.log(hh[i] / hh[i + 1])
    return ConvergenceProbe(h, vals, err, orders, degen, ref)
