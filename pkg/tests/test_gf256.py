import numpy as np
import pytest
from hypothesis import given, strategies as st

from rlnc_noma import gf256

byte = st.integers(0, 255)


def slow_mul(a, b, poly=0x11D):
    """Shift-and-add multiply with reduction, independent of the log tables."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= poly
    return out


@pytest.mark.parametrize("a,b,expected", [(0x53, 0x53, 0x00), (0xA7, 0x00, 0xA7), (0x0F, 0xF0, 0xFF)])
def test_add_examples(a, b, expected):
    assert gf256.add(a, b) == expected


@pytest.mark.parametrize("a,b,expected", [(0x37, 0x01, 0x37), (0x02, 0x80, 0x1D), (0x00, 0xFF, 0x00)])
def test_mul_examples(a, b, expected):
    assert gf256.mul(a, b) == expected


def test_inv_examples():
    assert gf256.inv(0x01) == 0x01
    assert gf256.inv(0x02) == 0x8E
    assert slow_mul(0x02, 0x8E) == 1
    with pytest.raises(ZeroDivisionError):
        gf256.inv(0)


def test_div_examples():
    for a in range(1, 256):
        assert gf256.div(a, a) == 1
    assert gf256.div(0x1D, 0x80) == 0x02
    with pytest.raises(ZeroDivisionError):
        gf256.div(0x55, 0x00)


def test_out_of_range_rejected():
    with pytest.raises(ValueError):
        gf256.mul(256, 1)
    with pytest.raises(ValueError):
        gf256.add(-1, 0)


def test_mul_table_matches_shift_and_add():
    expected = np.array([[slow_mul(a, b) for b in range(256)] for a in range(256)], dtype=np.uint8)
    assert np.array_equal(gf256.MUL, expected)


def test_every_nonzero_element_has_inverse():
    for a in range(1, 256):
        assert gf256.mul(a, gf256.inv(a)) == 1


def test_generator_is_primitive():
    powers = [gf256.power(gf256.GENERATOR, k) for k in range(255)]
    assert sorted(powers) == list(range(1, 256))
    assert gf256.power(gf256.GENERATOR, 255) == 1


def test_sampled_field_axioms():
    rng = np.random.default_rng(7)
    a, b, c = rng.integers(0, 256, size=(3, 10_000))
    M = gf256.MUL
    assert np.array_equal(M[M[a, b], c], M[a, M[b, c]])
    assert np.array_equal(M[a, b], M[b, a])
    assert np.array_equal(a ^ b, b ^ a)
    assert np.array_equal(M[a, b ^ c], M[a, b] ^ M[a, c])


@given(byte, byte)
def test_add_self_inverse_and_commutative(a, b):
    assert gf256.add(a, a) == 0
    assert gf256.add(a, b) == gf256.add(b, a)


@given(byte, st.integers(1, 255))
def test_div_undoes_mul(a, b):
    assert gf256.div(gf256.mul(a, b), b) == a


def test_dot_is_linear_combination():
    rng = np.random.default_rng(1)
    coeffs = rng.integers(0, 256, 5, dtype=np.uint8)
    rows = rng.integers(0, 256, (5, 16), dtype=np.uint8)
    expected = np.zeros(16, dtype=int)
    for c, row in zip(coeffs, rows):
        expected ^= np.array([slow_mul(int(c), int(v)) for v in row])
    assert np.array_equal(gf256.dot(coeffs, rows), expected)
