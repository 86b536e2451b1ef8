"""Randomly shifted lattice rules for ``E[G(u)]`` and the error-splitting experiment."""
from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .cbc import GeneratingVector, ReductionSchedule, reduced_cbc_fast, theorem4_rmse_bound
from .errors import ValidationError
from .kernel import KernelSpec, Space
from .number_theory import Modulus
from .pde import FemMesh, TruncatedCoefficient, assemble_solve, dual_norm, functional_G, l2_norm
from .weights import (
    RandomFieldSpec,
    WeightConfig,
    b_tilde_default,
    compute_kappas,
    gamma_template,
    norm_sum,
    truncation_bound,
)

RMSE_CONVENTION = "std(per-shift means, ddof=1) / sqrt(R)"

CSV_COLUMNS = (
    "s", "h", "N", "R", "seed", "estimate", "rmse_empirical",
    "bound_trunc", "bound_fe", "bound_qmc", "slope_N", "slope_h",
)


def lattice_points(gv: GeneratingVector, shift) -> np.ndarray:
    """``{k z~/N + shift} - 1/2`` for ``k = 1..N``, shape ``(N, s)``."""
    N = gv.n
    shift = np.asarray(shift, dtype=float).reshape(-1)
    if shift.size != gv.s:
        raise ValidationError(f"shift has length {shift.size}, expected {gv.s}")
    k = np.arange(1, N + 1, dtype=np.int64)[:, None]
    base = ((k * gv.z_tilde[None, :]) % N) / N
    return np.mod(base + shift[None, :], 1.0) - 0.5


def shift_stream(seed: int, r: int) -> np.random.Generator:
    """Generator for shift ``r``: Philox keyed by ``seed`` with ``r`` in the top counter word."""
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, int(r)]))


def random_shifts(seed: int, R: int, s: int) -> np.ndarray:
    return np.array([shift_stream(seed, r).random(s) for r in range(R)]).reshape(R, s)


@dataclass
class QmcEstimate:
    per_shift: np.ndarray
    N: int
    s: int
    R: int
    seed: int
    exact: float | None = None

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_shift))

    @property
    def rmse(self) -> float:
        """Standard error of :attr:`mean` over the shifts (0 for ``R = 1``)."""
        if self.R < 2:
            return 0.0
        return float(np.std(self.per_shift, ddof=1) / math.sqrt(self.R))

    @property
    def shift_std(self) -> float:
        """Root-mean-square deviation of a single-shift estimate."""
        if self.exact is not None:
            return float(np.sqrt(np.mean((self.per_shift - self.exact) ** 2)))
        return float(np.std(self.per_shift, ddof=1)) if self.R > 1 else 0.0

    @property
    def rmse_vs_exact(self) -> float | None:
        if self.exact is None:
            return None
        return float(abs(self.mean - self.exact))


def qmc_estimate(gv: GeneratingVector, integrand: Callable, R: int = 16, seed: int = 0, exact: float | None = None) -> QmcEstimate:
    """Equal-weight averages of ``integrand`` over ``R`` shifted copies of the lattice.

    ``integrand`` maps an ``(N, s)`` array of points in ``[-1/2, 1/2]^s``
    to ``N`` values.
    """
    if R < 1:
        raise ValidationError("need at least one shift")
    shifts = random_shifts(seed, R, gv.s)
    vals = np.empty(R)
    for r in range(R):
        fx = np.asarray(integrand(lattice_points(gv, shifts[r])), dtype=float)
        vals[r] = np.sum(fx) / gv.n
    return QmcEstimate(vals, gv.n, gv.s, R, seed, exact)


# --------------------------------------------------------------------------
# built-in test integrands


def integrand_family(name: str, s: int, param: float = 1.0) -> tuple[Callable, float]:
    """``(F, exact integral over [-1/2, 1/2]^s)`` for a named family."""
    if name == "constant":
        return (lambda y: np.full(y.shape[0], param)), param
    if name == "linear":
        return (lambda y: y.sum(axis=1)), 0.0
    if name == "product":
        j = np.arange(1, s + 1, dtype=float)
        c = param / j**2
        return (lambda y: np.prod(1.0 + c * y, axis=1)), 1.0
    if name == "oscillatory":
        # cos(1/2 + sum c_j y_j) integrates to cos(1/2) prod sin(c_j/2)/(c_j/2)
        j = np.arange(1, s + 1, dtype=float)
        c = param / j**2
        exact = math.cos(0.5) * float(np.prod(np.sinc(c / (2 * np.pi))))
        return (lambda y: np.cos(0.5 + y @ c)), exact
    raise ValidationError(f"unknown integrand family {name!r}")


# --------------------------------------------------------------------------
# error-splitting experiment


@dataclass
class ExperimentConfig:
    """Grid of truncation dimensions, meshes and lattice sizes.

    ``weights`` supplies the random field, the bound parameters and the
    reduction schedule; the lattices are built for the shift-averaged
    Sobolev space with the weights it produces.
    """

    weights: WeightConfig
    b: int = 2
    m_levels: tuple = (5, 6, 7, 8, 9, 10)
    s_levels: tuple = (16,)
    n_cells_levels: tuple = (128,)
    R: int = 16
    seed: int = 0
    f: float = 1.0
    g: float = 1.0
    exact: float | None = None
    reference: bool = False

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "weights"}
        fld = self.weights.field
        d["field"] = {
            "a0": fld.a0 if not callable(fld.a0) else "callable",
            "c": fld.c, "theta": fld.theta, "s_max": fld.s_max,
            "b_decay": fld.b_decay, "b_seq": None if fld.b_seq is None else list(map(float, fld.b_seq)),
        }
        bp = self.weights.bounds
        d["bounds"] = {"p": bp.p, "delta": bp.delta, "lambda": bp.lam, "C": bp.C}
        d["schedule"] = self.weights.schedule_rule if isinstance(self.weights.schedule_rule, str) else list(self.weights.schedule_rule)
        d["rmse_convention"] = RMSE_CONVENTION
        return d


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    reference_value: float | None = None
    kappas: object = None

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("# config " + json.dumps(self.config.to_dict(), sort_keys=True) + "\n")
        out.write(",".join(CSV_COLUMNS) + "\n")
        for r in self.rows:
            cells = []
            for c in CSV_COLUMNS:
                v = r[c]
                cells.append(str(v) if isinstance(v, (int, np.integer)) else f"{float(v):.17g}")
            out.write(",".join(cells) + "\n")
        return out.getvalue()


def _fit_slope(x, y) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def pde_integrand(fld: RandomFieldSpec, s: int, mesh: FemMesh, f=1.0, g=1.0) -> Callable:
    def F(y):
        u = assemble_solve(mesh, TruncatedCoefficient(fld, s, y), f)
        return functional_G(mesh, u, g)

    return F


def error_splitting_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """QMC estimates of ``E[G(u_h^s)]`` over the ``(s, h, N)`` grid with the three bound terms.

    ``slope_N`` is the least-squares slope of ``log rmse_empirical`` against
    ``log N`` within each ``(s, h)`` group.  ``slope_h`` is the slope of the
    estimate error against ``h`` within each ``(s, N)`` group, measured
    against ``exact`` when given and by successive differences otherwise.
    """
    wc = cfg.weights
    fld = wc.field
    kap = compute_kappas(fld, wc.grid_size)
    spec = KernelSpec(2, Space.SOBOLEV)
    report = ExperimentReport(cfg, kappas=kap)
    rows = report.rows
    for s in cfg.s_levels:
        if s > fld.s_max:
            raise ValidationError(f"s={s} exceeds field s_max={fld.s_max}")
        bfull = fld.b()
        b_tail = float(bfull[s:].max()) if s < fld.s_max else 0.0
        sched = wc.schedule(s, cfg.b)
        W = wc.pod_weights(s, cfg.b, sched, kap)
        Gam = gamma_template(kap.kappa, s, kap.kappa_of_order if wc.template == "kappa_k" else None)
        bt = b_tilde_default(fld.b(s), kap.kappa)
        nsum = norm_sum(Gam, bt, W)
        vectors = {m: reduced_cbc_fast(Modulus(cfg.b, m), sched, W, spec).vector for m in cfg.m_levels}
        for nc in cfg.n_cells_levels:
            mesh = FemMesh(nc)
            fn, gn = dual_norm(mesh, cfg.f), dual_norm(mesh, cfg.g)
            trunc = truncation_bound(kap.a0_min, kap.a0_max, kap.kappa_bar, kap.kappa, gn, fn, b_tail)
            fe = mesh.h**2 * l2_norm(mesh, cfg.f) * l2_norm(mesh, cfg.g)
            surrogate = fn * gn / ((1 - kap.kappa_bar) * kap.a0_min) * math.sqrt(nsum)
            F = pde_integrand(fld, s, mesh, cfg.f, cfg.g)
            for m in cfg.m_levels:
                gv = vectors[m]
                est = qmc_estimate(gv, F, cfg.R, cfg.seed)
                rows.append({
                    "s": s, "h": mesh.h, "N": gv.n, "R": cfg.R, "seed": cfg.seed,
                    "estimate": est.mean, "rmse_empirical": est.rmse,
                    "shift_std": est.shift_std,
                    "bound_trunc": trunc, "bound_fe": fe,
                    "bound_qmc": theorem4_rmse_bound(gv, W, 1.0) * surrogate,
                })
    # fitted slopes
    for r in rows:
        grp = [q for q in rows if q["s"] == r["s"] and q["h"] == r["h"]]
        r["slope_N"] = _fit_slope([q["N"] for q in grp], [q["rmse_empirical"] for q in grp])
        grp = sorted((q for q in rows if q["s"] == r["s"] and q["N"] == r["N"]), key=lambda q: -q["h"])
        hs = np.array([q["h"] for q in grp])
        ests = np.array([q["estimate"] for q in grp])
        if cfg.exact is not None:
            r["slope_h"] = _fit_slope(hs, np.abs(ests - cfg.exact))
        elif len(grp) >= 3:
            r["slope_h"] = _fit_slope(hs[:-1], np.abs(np.diff(ests)))
        else:
            r["slope_h"] = math.nan
    if cfg.reference and rows:
        s, nc, m = max(cfg.s_levels), max(cfg.n_cells_levels), max(cfg.m_levels)
        sched = wc.schedule(s, cfg.b)
        W = wc.pod_weights(s, cfg.b, sched, kap)
        gv = reduced_cbc_fast(Modulus(cfg.b, m), sched, W, spec).vector
        ref = qmc_estimate(gv, pde_integrand(fld, s, FemMesh(nc), cfg.f, cfg.g), 4 * cfg.R, cfg.seed + 1)
        report.reference_value = ref.mean
    return report
