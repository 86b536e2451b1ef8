"""Random instance generators shared by the tests."""
import numpy as np

from redcbc.cbc import GeneratingVector, PodWeights, ReductionSchedule
from redcbc.number_theory import Modulus, unit_group


def random_schedule(rng, s, m):
    return ReductionSchedule(tuple(int(x) for x in np.sort(rng.integers(0, m + 2, s))))


def random_vector(rng, mod, sched):
    z = []
    for w in sched.w:
        if w >= mod.m:
            z.append(0)
        else:
            z.append(int(rng.choice(unit_group(Modulus(mod.b, mod.m - w)))))
    return GeneratingVector(mod, sched, tuple(z))


def random_pod(rng, s):
    return PodWeights(np.concatenate(([1.0], rng.random(s) * 2)), rng.random(s))
