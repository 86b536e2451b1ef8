import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from redcbc.cbc import GeneratingVector, PodWeights, ReductionSchedule, format_vector, parse_vector, read_vector, write_vector
from redcbc.errors import ValidationError
from redcbc.number_theory import Modulus

from helpers import random_schedule, random_vector


def test_pod_weight_of_subset():
    W = PodWeights([1, 2, 3], [0.5, 0.25])
    assert W.weight([]) == 1
    assert W.weight([2]) == 2 * 0.25
    assert W.weight([1, 2]) == 3 * 0.5 * 0.25


def test_pod_validation():
    with pytest.raises(ValidationError):
        PodWeights([2.0, 1.0], [1.0])
    with pytest.raises(ValidationError):
        PodWeights([1.0, -1.0], [1.0])
    W = PodWeights([1.0, 0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValidationError):
        W.ratios(2)
    assert list(PodWeights([1.0, 0.0, 0.0], [1, 1]).ratios(2)) == [0.0, 0.0]


def test_from_ratios_avoids_overflow():
    s = 400
    W = PodWeights.from_ratios(np.arange(1, s + 1, dtype=float), np.ones(s))
    assert np.all(np.isfinite(W.order_factors))
    assert W.ratios(s)[-1] == s


def test_schedule_rules():
    assert ReductionSchedule.from_rule("linear:2", 5, 3).w == (0, 0, 1, 1, 2)
    assert ReductionSchedule.from_rule("log", 10, 3).w == (0, 0, 1, 1, 1, 1, 1, 1, 2, 2)
    assert ReductionSchedule.from_rule("0,1,1", 3, 2).w == (0, 1, 1)
    assert ReductionSchedule((0, 1, 3)).s_star(2) == 2
    with pytest.raises(ValidationError):
        ReductionSchedule((1, 0))
    with pytest.raises(ValidationError):
        ReductionSchedule.from_rule("bogus", 3, 2)


def test_vector_validation():
    mod = Modulus(3, 3)
    with pytest.raises(ValidationError):
        GeneratingVector(mod, ReductionSchedule((0,)), (3,))
    with pytest.raises(ValidationError):
        GeneratingVector(mod, ReductionSchedule((3,)), (1,))
    gv = GeneratingVector(mod, ReductionSchedule((0, 1, 3)), (2, 4, 0))
    assert list(gv.z_tilde) == [2, 12, 0]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 4), st.integers(0, 6), st.integers(0, 10**6))
def test_vector_file_round_trip(b, m, s, seed):
    rng = np.random.default_rng(seed)
    gv = random_vector(rng, Modulus(b, m), random_schedule(rng, s, m))
    back = parse_vector(format_vector(gv))
    assert back == gv


def test_vector_file_layout(tmp_path):
    gv = GeneratingVector(Modulus(3, 2), ReductionSchedule((0, 1, 2)), (4, 2, 0))
    p = tmp_path / "v.txt"
    write_vector(p, gv)
    assert p.read_text() == "3 2 3\n1 0 4 4\n2 1 2 6\n3 2 0 0\n"
    assert read_vector(p) == gv


@pytest.mark.parametrize(
    "text",
    [
        "3 2 2\n1 0 4 4\n",  # too few lines
        "3 2 1\n1 0 4 5\n",  # inconsistent ztilde
        "3 2 1\n2 0 4 4\n",  # wrong index
        "3 2 1\n1 0 3 0\n",  # not a unit
        "4 2 1\n1 0 1 1\n",  # composite base
        "3 2\n",
        "3 2 1\n1 0 x 4\n",
        "",
    ],
)
def test_parser_rejects(text):
    with pytest.raises(ValidationError):
        parse_vector(text)
