"""Command-line interface: ``redcbc {construct,wce,integrate,pde,bench}``.

Exit codes: 0 success, 1 I/O error, 2 invalid input, 3 resource budget.
Failures print one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import _backend
from .cbc import (
    PodWeights,
    ReductionSchedule,
    format_vector,
    read_vector,
    reduced_cbc_fast,
    reduced_cbc_reference,
    wce_bruteforce,
    wce_fast,
)
from .errors import BudgetExceededError, RedCbcError, ValidationError
from .kernel import KernelSpec, Space
from .number_theory import Modulus

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# weight mini-language


def parse_sequence(text: str, n: int, start: int = 1) -> np.ndarray:
    """Evaluate a sequence description at indices ``start..start+n-1``.

    ``j^-2`` / ``l^0.5`` (power of the index), ``const:x``, ``geom:x``
    (``x^j``), ``kappa^l:x`` (same as geom), ``factorial``, ``inv_factorial``, ``one``,
    ``file:PATH`` (whitespace-separated numbers) or a comma-separated list.
    """
    t = text.strip()
    idx = np.arange(start, start + n, dtype=float)
    m = re.fullmatch(r"[jl]\^([-+]?[0-9.eE+-]+)", t)
    if m:
        return idx ** float(m.group(1))
    if t.startswith("const:"):
        return np.full(n, float(t[6:]))
    if t.startswith("geom:") or t.startswith("kappa^l:"):
        return float(t.split(":", 1)[1]) ** idx
    if t == "factorial":
        return np.array([math.gamma(i + 1) if i < 171 else math.inf for i in idx])
    if t == "inv_factorial":
        return np.array([1.0 / math.gamma(i + 1) if i < 171 else 0.0 for i in idx])
    if t == "one":
        return np.ones(n)
    if t.startswith("file:"):
        try:
            vals = np.array(Path(t[5:]).read_text().split(), dtype=float)
        except ValueError:
            raise ValidationError(f"non-numeric entry in {t[5:]}") from None
        if vals.size < n:
            raise ValidationError(f"{t[5:]} holds {vals.size} values, need {n}")
        return vals[:n]
    if "," in t or re.fullmatch(r"[-+0-9.eE]+", t):
        try:
            vals = np.array([float(x) for x in t.split(",") if x.strip()])
        except ValueError:
            raise ValidationError(f"cannot parse sequence {text!r}") from None
        if vals.size < n:
            raise ValidationError(f"sequence {text!r} has {vals.size} values, need {n}")
        return vals[:n]
    raise ValidationError(f"cannot parse sequence {text!r}")


def build_weights(gamma: str, Gamma: str, s: int) -> PodWeights:
    prod = parse_sequence(gamma, s)
    if Gamma.strip() in ("factorial", "inv_factorial"):
        l = np.arange(1, s + 1, dtype=float)
        return PodWeights.from_ratios(l if Gamma.strip() == "factorial" else 1.0 / l, prod)
    order = parse_sequence(Gamma, s)
    return PodWeights(np.concatenate(([1.0], order)), prod)


def _spec(args) -> KernelSpec:
    return KernelSpec(args.alpha, Space(args.space))


def _config_weights(args, s, b):
    from .weights import load_config

    wc = load_config(args.config)
    sched = ReductionSchedule.from_rule(args.w, s, b) if args.w else wc.schedule(s, b)
    return wc, sched, wc.pod_weights(s, b, sched)


def _resolved(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k != "func"}
    d["backend"] = _backend.BACKEND
    return d


def _emit(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# --------------------------------------------------------------------------
# commands


def cmd_construct(args) -> int:
    mod = Modulus(args.b, args.m)
    if args.config:
        _, sched, W = _config_weights(args, args.s, args.b)
    else:
        sched = ReductionSchedule.from_rule(args.w or "zero", args.s, args.b)
        W = build_weights(args.gamma, args.Gamma, args.s)
    spec = _spec(args)
    if args.engine == "reference":
        res = reduced_cbc_reference(mod, sched, W, spec)
    else:
        res = reduced_cbc_fast(
            mod, sched, W, spec, normalize=not args.no_normalize, memory_budget=args.memory_budget
        )
    gv = res.vector
    _emit(format_vector(gv), args.out)
    log = ["# config " + json.dumps(_resolved(args), sort_keys=True), "j,w_j,z_j,e2_j"]
    for j, (w, z, e) in enumerate(zip(sched.w, gv.z, res.step_errors), start=1):
        log.append(f"{j},{w},{z},{e:.17g}")
    text = "\n".join(log) + "\n"
    if args.log:
        Path(args.log).write_text(text)
    elif args.out not in (None, "-"):
        sys.stdout.write(text)
    return EXIT_OK


def cmd_wce(args) -> int:
    gv = read_vector(args.vector)
    if args.config:
        _, _, W = _config_weights(args, gv.s, gv.mod.b)
    else:
        W = build_weights(args.gamma, args.Gamma, gv.s)
    spec = _spec(args)
    e2 = wce_fast(gv, W, spec)
    rec = {"e2": e2}
    if args.oracle:
        rec["e2_oracle"] = wce_bruteforce(gv, W, spec)
        rec["rel_diff"] = abs(e2 - rec["e2_oracle"]) / abs(rec["e2_oracle"]) if rec["e2_oracle"] else abs(e2)
    sys.stdout.write(json.dumps(rec) + "\n")
    return EXIT_OK


def cmd_integrate(args) -> int:
    from .uq import integrand_family, qmc_estimate

    gv = read_vector(args.vector)
    F, exact = integrand_family(args.family, gv.s, args.param)
    rows = ["# config " + json.dumps(_resolved(args), sort_keys=True),
            "family,N,s,R,seed,estimate,rmse_empirical,exact"]
    est = qmc_estimate(gv, F, args.R, args.seed, exact)
    rows.append(f"{args.family},{gv.n},{gv.s},{args.R},{args.seed},{est.mean:.17g},{est.rmse:.17g},{exact:.17g}")
    _emit("\n".join(rows) + "\n", args.out)
    return EXIT_OK


def cmd_pde(args) -> int:
    from .uq import ExperimentConfig, error_splitting_experiment
    from .weights import BoundParams, RandomFieldSpec, WeightConfig, load_config

    if args.config:
        wc = load_config(args.config)
        exp = dict(wc.raw.get("experiment", {}))
    else:
        wc = WeightConfig(RandomFieldSpec(c=args.c, theta=args.theta, s_max=max(args.s)), BoundParams(p=args.p))
        exp = {}
    if args.w:
        wc.schedule_rule = args.w

    def pick(key, flag):
        return exp.get(key, flag)

    cfg = ExperimentConfig(
        wc,
        b=int(pick("b", args.b)),
        m_levels=tuple(pick("m_levels", args.m)),
        s_levels=tuple(pick("s_levels", args.s)),
        n_cells_levels=tuple(pick("n_cells_levels", args.n_cells)),
        R=int(pick("R", args.R)),
        seed=int(pick("seed", args.seed)),
        exact=pick("exact", args.exact),
    )
    _emit(error_splitting_experiment(cfg).to_csv(), args.out)
    return EXIT_OK


def predicted_cost(b: int, m: int, w) -> float:
    """``sum_{j <= s*} (m - w_j + j) b^(m - w_j)``."""
    return float(sum((m - wj + j) * b ** (m - wj) for j, wj in enumerate(w, start=1) if wj < m))


def cmd_bench(args) -> int:
    rows = ["# config " + json.dumps(_resolved(args), sort_keys=True),
            "b,m,s,schedule,s_star,ops,predicted,ratio,wall_seconds,backend"]
    spec = _spec(args)
    for m in args.m:
        mod = Modulus(args.b, m)
        for rule in args.schedules:
            for s in args.s:
                sched = ReductionSchedule.from_rule(rule, s, args.b)
                W = PodWeights.from_ratios(np.arange(1, s + 1, dtype=float), np.arange(1, s + 1, dtype=float) ** -2.0)
                t0 = time.perf_counter()
                res = reduced_cbc_fast(mod, sched, W, spec, count_ops=True, tail_errors=False)
                dt = time.perf_counter() - t0
                pred = predicted_cost(args.b, m, sched.w)
                ratio = res.op_count / pred if pred else 0.0
                rows.append(
                    f"{args.b},{m},{s},{rule},{sched.s_star(m)},{res.op_count:.17g},{pred:.17g},{ratio:.17g},{dt:.6g},{_backend.BACKEND}"
                )
    _emit("\n".join(rows) + "\n", args.out)
    return EXIT_OK


# --------------------------------------------------------------------------


def _int_list(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="redcbc", description="Reduced CBC construction of rank-1 lattice rules with POD weights.")
    p.add_argument("--threads", type=int, default=1, help="thread cap (computations are sequential)")
    p.add_argument("--backend", choices=["compiled", "python"], default=None)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def kernel_opts(q):
        q.add_argument("--alpha", type=int, default=2)
        q.add_argument("--space", choices=[s.value for s in Space], default="korobov")

    def weight_opts(q):
        q.add_argument("--gamma", default="j^-2", help="product factors gamma_j")
        q.add_argument("--Gamma", default="one", help="order factors Gamma(l), l >= 1")
        q.add_argument("--config", help="TOML file with field/bounds/schedule tables")

    q = sub.add_parser("construct", help="build a reduced generating vector")
    q.add_argument("--b", type=int, required=True)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--s", type=int, required=True)
    q.add_argument("--w", help="reduction indices: list, zero, linear:k or log")
    weight_opts(q)
    kernel_opts(q)
    q.add_argument("--engine", choices=["fast", "reference"], default="fast")
    q.add_argument("--no-normalize", action="store_true")
    q.add_argument("--memory-budget", type=int, default=1 << 28)
    q.add_argument("--out", default="-", help="vector file (default stdout)")
    q.add_argument("--log", help="step log file")
    q.set_defaults(func=cmd_construct)

    q = sub.add_parser("wce", help="squared worst-case error of a vector file")
    q.add_argument("vector")
    weight_opts(q)
    q.add_argument("--w", help=argparse.SUPPRESS)
    kernel_opts(q)
    q.add_argument("--oracle", action="store_true", help="also evaluate by subset enumeration")
    q.set_defaults(func=cmd_wce)

    q = sub.add_parser("integrate", help="randomly shifted lattice estimate of a test integrand")
    q.add_argument("vector")
    q.add_argument("--family", choices=["constant", "linear", "product", "oscillatory"], default="product")
    q.add_argument("--param", type=float, default=1.0)
    q.add_argument("--R", type=int, default=16)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_integrate)

    q = sub.add_parser("pde", help="error-splitting experiment for the 1-D model problem")
    q.add_argument("--config")
    q.add_argument("--b", type=int, default=2)
    q.add_argument("--m", type=_int_list, default=[5, 6, 7, 8])
    q.add_argument("--s", type=_int_list, default=[16])
    q.add_argument("--n-cells", type=_int_list, default=[128])
    q.add_argument("--c", type=float, default=0.4)
    q.add_argument("--theta", type=float, default=2.0)
    q.add_argument("--p", type=float, default=0.6)
    q.add_argument("--w")
    q.add_argument("--R", type=int, default=16)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--exact", type=float)
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_pde)

    q = sub.add_parser("bench", help="operation counts and timings of the fast construction")
    q.add_argument("--b", type=int, default=3)
    q.add_argument("--m", type=_int_list, default=[5, 6, 7])
    q.add_argument("--s", type=_int_list, default=[7, 100, 1000])
    q.add_argument("--schedules", type=lambda t: t.split(";"), default=["linear:1", "log"])
    kernel_opts(q)
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_bench)
    return p


def _fail(exc, code) -> int:
    rec = {"error": type(exc).__name__, "message": str(exc).replace("\n", " "), "exit_code": code}
    sys.stderr.write(json.dumps(rec) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.backend:
            _backend._install(args.backend)
        return args.func(args)
    except BudgetExceededError as exc:
        return _fail(exc, EXIT_BUDGET)
    except (ValidationError, ValueError) as exc:
        return _fail(exc, EXIT_VALIDATION)
    except OSError as exc:
        return _fail(exc, EXIT_IO)
    except RedCbcError as exc:
        return _fail(exc, EXIT_VALIDATION)
    except RuntimeError as exc:
        return _fail(exc, EXIT_VALIDATION)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
