"""Compare the compiled core against the numpy fallback.

    python benchmarks/bench_backends.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from redcbc import _backend
from redcbc.cbc import GeneratingVector, PodWeights, ReductionSchedule, reduced_cbc_fast, wce_fast
from redcbc.kernel import KernelSpec, omega_table
from redcbc.number_theory import Modulus, unit_group
from redcbc.pde import FemMesh, TruncatedCoefficient, assemble_solve
from redcbc.weights import RandomFieldSpec


def cases():
    rng = np.random.default_rng(1)
    spec = KernelSpec()

    X = rng.random((16, 4096))
    g = rng.random(16)
    yield "order_sums s=16 N=4096", lambda: _backend.order_sums(X, g)

    B, n = 512, 255
    diag = 2.0 + rng.random((B, n))
    off = -rng.random((B, n - 1)) * 0.5
    rhs = rng.random((1, n))
    yield "thomas_spd B=512 n=255", lambda: _backend.thomas_spd(diag, off, rhs)

    mod = Modulus(2, 11)
    tab = omega_table(spec, mod.n)
    units = np.ascontiguousarray(unit_group(mod))
    v = rng.random(mod.n)
    yield "omega_matvec_direct n=2^11", lambda: _backend.omega_matvec_direct(tab, units, v)

    s = 12
    W = PodWeights.from_ratios(np.arange(1, s + 1, dtype=float), np.arange(1, s + 1, dtype=float) ** -2.0)
    gv = GeneratingVector(Modulus(3, 7), ReductionSchedule.zeros(s), tuple(range(1, 3 * s, 3))[:s])
    yield "wce_fast b=3 m=7 s=12", lambda: wce_fast(gv, W, spec)

    sched = ReductionSchedule.from_rule("linear:2", s, 2)
    yield "reduced_cbc_fast b=2 m=10 s=12", lambda: reduced_cbc_fast(Modulus(2, 10), sched, W, spec)

    fld = RandomFieldSpec(c=0.4, theta=2.0, s_max=16)
    y = rng.random((1024, 16)) - 0.5
    mesh = FemMesh(128)
    yield "assemble_solve 1024 x n=128", lambda: assemble_solve(mesh, TruncatedCoefficient(fld, 16, y))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = _backend.available()
    print(f"{'case':34s}" + "".join(f"{b:>14s}" for b in names) + ("   speedup" if len(names) > 1 else ""))
    for name, fn in cases():
        times = []
        for b in names:
            with _backend.use_backend(b):
                fn()
                times.append(min(timeit.repeat(fn, number=1, repeat=args.repeat)))
        line = f"{name:34s}" + "".join(f"{t * 1e3:12.3f}ms" for t in times)
        if len(times) > 1:
            line += f"   {times[1] / times[0]:7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
