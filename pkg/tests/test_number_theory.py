import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from redcbc.errors import NonCyclicGroupError, ValidationError
from redcbc.number_theory import (
    Modulus,
    discrete_log_table,
    generator_ordering,
    is_prime,
    primitive_root,
    totient,
    unit_group,
)

ODD_PRIMES = [3, 5, 7, 11, 13]


def test_is_prime_small():
    primes = [p for p in range(60) if is_prime(p)]
    assert primes == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]


def test_modulus_rejects_composite_base():
    with pytest.raises(ValidationError, match="prime"):
        Modulus(4, 2)
    with pytest.raises(ValidationError):
        Modulus(3, -1)


def test_totient_and_units():
    assert totient(Modulus(3, 2)) == 6
    assert totient(Modulus(2, 5)) == 16
    assert totient(Modulus(5, 0)) == 1
    assert list(unit_group(Modulus(3, 2))) == [1, 2, 4, 5, 7, 8]
    assert list(unit_group(Modulus(7, 0))) == [0]


@pytest.mark.parametrize("b", ODD_PRIMES)
@pytest.mark.parametrize("m", [1, 2, 3])
def test_units_match_gcd_definition(b, m):
    n = b**m
    expect = [k for k in range(n) if math.gcd(k, n) == 1]
    assert list(unit_group(Modulus(b, m))) == expect
    assert totient(Modulus(b, m)) == len(expect)


def test_generator_ordering_n9():
    assert list(generator_ordering(Modulus(3, 2))) == [1, 2, 4, 8, 7, 5]


@pytest.mark.parametrize("b", ODD_PRIMES)
@pytest.mark.parametrize("m", [1, 2, 3])
def test_primitive_root_generates_units(b, m):
    mod = Modulus(b, m)
    g = primitive_root(mod)
    # smallest generator: every smaller unit has a shorter order
    order = sorted(generator_ordering(mod))
    assert order == list(unit_group(mod))
    for h in range(2, g):
        if h % b == 0:
            continue
        powers = {pow(h, i, mod.n) for i in range(totient(mod))}
        assert len(powers) < totient(mod)


def test_power_of_two_has_no_generator():
    with pytest.raises(NonCyclicGroupError):
        primitive_root(Modulus(2, 4))
    with pytest.raises(ValidationError):
        primitive_root(Modulus(3, 0))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(ODD_PRIMES), st.integers(1, 4), st.data())
def test_discrete_log_inverts_powers(b, m, data):
    mod = Modulus(b, m)
    if mod.n > 5000:
        return
    g = primitive_root(mod)
    dl = discrete_log_table(mod)
    z = data.draw(st.sampled_from(list(unit_group(mod))))
    assert pow(g, int(dl[z]), mod.n) == z
    non_units = np.arange(0, mod.n, b)
    assert np.all(dl[non_units] == -1)


def test_generator_ordering_returns_copy():
    mod = Modulus(5, 2)
    a = generator_ordering(mod)
    a[0] = 99
    assert generator_ordering(mod)[0] == 1
