import csv
import io
import json

import numpy as np
import pytest

from redcbc import GeneratingVector, KernelSpec, Modulus, ReductionSchedule, Space, reduced_cbc_fast
from redcbc.errors import ValidationError
from redcbc.uq import (
    CSV_COLUMNS,
    ExperimentConfig,
    error_splitting_experiment,
    integrand_family,
    lattice_points,
    qmc_estimate,
    random_shifts,
)
from redcbc.weights import parse_config

from redcbc import PodWeights

SOB = KernelSpec(2, Space.SOBOLEV)


def make_vector(s=6, m=7, b=2):
    W = PodWeights(np.ones(s + 1), np.arange(1, s + 1, dtype=float) ** -2.0)
    return reduced_cbc_fast(Modulus(b, m), ReductionSchedule.from_rule("log", s, b), W, SOB).vector


def test_lattice_points_small():
    gv = GeneratingVector(Modulus(5, 1), ReductionSchedule((0, 0)), (1, 2))
    P = lattice_points(gv, [0.0, 0.0])
    expect = np.array([[1, 2], [2, 4], [3, 1], [4, 3], [0, 0]]) / 5 - 0.5
    assert np.allclose(P, expect)
    P = lattice_points(gv, [0.9, 0.5])
    assert np.all((P >= -0.5) & (P < 0.5))
    with pytest.raises(ValidationError):
        lattice_points(gv, [0.1])


def test_reduced_components_scaled():
    gv = GeneratingVector(Modulus(2, 3), ReductionSchedule((0, 1, 3)), (3, 1, 0))
    P = lattice_points(gv, np.zeros(3)) + 0.5
    k = np.arange(1, 9)
    assert np.allclose(P[:, 1], (2 * k % 8) / 8)
    assert np.all(P[:, 2] == 0)


def test_shifts_reproducible():
    a = random_shifts(7, 4, 5)
    assert np.array_equal(a, random_shifts(7, 4, 5))
    assert not np.array_equal(a, random_shifts(8, 4, 5))
    # shift r does not depend on R
    assert np.array_equal(a[:2], random_shifts(7, 2, 5))
    assert np.all((a >= 0) & (a < 1))


def test_constant_integrand_exact():
    gv = make_vector()
    F, exact = integrand_family("constant", gv.s, 2.5)
    est = qmc_estimate(gv, F, R=8, seed=1, exact=exact)
    assert est.mean == pytest.approx(2.5, rel=1e-15)
    assert est.rmse == pytest.approx(0.0, abs=1e-15)


def test_linear_integrand_unbiased_and_small():
    gv = make_vector()
    F, exact = integrand_family("linear", gv.s)
    est = qmc_estimate(gv, F, R=16, seed=3, exact=exact)
    # per-shift averages of a linear function vary only through the shift
    assert abs(est.mean) < 4 * max(est.rmse, 1e-15)


@pytest.mark.parametrize("name", ["product", "oscillatory"])
def test_smooth_integrands_within_error(name):
    gv = make_vector(s=8, m=10)
    F, exact = integrand_family(name, gv.s, 1.0)
    est = qmc_estimate(gv, F, R=16, seed=0, exact=exact)
    assert abs(est.mean - exact) <= 3 * est.rmse + 1e-14
    assert est.rmse < 1e-3


def test_qmc_error_decreases_with_n():
    F, exact = integrand_family("product", 6, 1.0)
    errs = [qmc_estimate(make_vector(s=6, m=m), F, R=16, seed=2, exact=exact).shift_std for m in (6, 9, 12)]
    assert errs[0] > errs[1] > errs[2]


def small_config(**kw):
    wc = parse_config({
        "field": {"c": kw.pop("c", 0.4), "theta": 2.0, "s_max": 8},
        "bounds": {"p": 0.5},
        "schedule": {"rule": "log"},
        "weights": {"grid_size": 256},
    })
    base = dict(m_levels=(4, 5, 6), s_levels=(8,), n_cells_levels=(16,), R=8, seed=5)
    base.update(kw)
    return ExperimentConfig(wc, **base)


def test_csv_reproducible_and_schema():
    a = error_splitting_experiment(small_config()).to_csv()
    b = error_splitting_experiment(small_config()).to_csv()
    assert a == b
    lines = a.splitlines()
    assert lines[0].startswith("# config ")
    meta = json.loads(lines[0][len("# config "):])
    assert meta["seed"] == 5 and meta["rmse_convention"].startswith("std")
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    assert [int(r["N"]) for r in rows] == [16, 32, 64]
    for r in rows:
        assert float(r["rmse_empirical"]) >= 0 and float(r["bound_qmc"]) > 0
    c = error_splitting_experiment(small_config(seed=6)).to_csv()
    assert c != a


def test_zero_field_experiment():
    cfg = small_config(c=0.0, n_cells_levels=(8, 16, 32), exact=1 / 12)
    rep = error_splitting_experiment(cfg)
    assert np.all(rep.column("rmse_empirical") < 1e-15)
    assert np.all(rep.column("bound_trunc") == 0)
    assert np.all(rep.column("slope_h") >= 1.8)


def test_shift_std_below_bound():
    rep = error_splitting_experiment(small_config(R=16))
    assert np.all(rep.column("shift_std") <= rep.column("bound_qmc"))
    assert np.all(rep.column("bound_trunc") == 0)  # s = s_max


def test_experiment_rejects_large_s():
    with pytest.raises(ValidationError):
        error_splitting_experiment(small_config(s_levels=(9,)))
