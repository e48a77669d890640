"""Arithmetic in GF(2^8) with the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1.

Field elements are plain ints in ``[0, 255]``. Scalar helpers validate their
inputs; the ``MUL`` table and the ``*_array`` helpers are meant for the
vectorised encode/decode loops and trust their callers.
"""

import numpy as np

POLY = 0x11D
GENERATOR = 0x02
ORDER = 256


def _build_tables():
    exp = np.zeros(2 * ORDER, dtype=np.uint8)
    log = np.zeros(ORDER, dtype=np.int64)
    x = 1
    for i in range(ORDER - 1):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= POLY
    # doubled so exp[log a + log b] never needs a modulo
    exp[ORDER - 1:2 * (ORDER - 1)] = exp[:ORDER - 1]
    return exp, log


EXP, LOG = _build_tables()


def _build_mul_table():
    table = EXP[(LOG[:, None] + LOG[None, :])].astype(np.uint8)
    table[0, :] = 0
    table[:, 0] = 0
    return table


MUL = _build_mul_table()
INV = np.zeros(ORDER, dtype=np.uint8)
INV[1:] = EXP[(ORDER - 1) - LOG[1:]]

for _t in (EXP, MUL, INV):
    _t.setflags(write=False)
LOG.setflags(write=False)


def _check(a):
    if not 0 <= a < ORDER:
        raise ValueError(f"{a!r} is not an element of GF(256)")
    return int(a)


def add(a, b):
    return _check(a) ^ _check(b)


sub = add


def mul(a, b):
    a, b = _check(a), _check(b)
    if a == 0 or b == 0:
        return 0
    return int(EXP[LOG[a] + LOG[b]])


def inv(a):
    """Multiplicative inverse; raises ``ZeroDivisionError`` for 0."""
    a = _check(a)
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return int(INV[a])


def div(a, b):
    a, b = _check(a), _check(b)
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(256)")
    if a == 0:
        return 0
    return int(EXP[LOG[a] + (ORDER - 1) - LOG[b]])


def power(a, n):
    a = _check(a)
    if a == 0:
        return 0 if n > 0 else 1
    return int(EXP[(LOG[a] * n) % (ORDER - 1)])


def scale_array(c, v):
    """``c * v`` elementwise for a scalar ``c`` and a uint8 array ``v``."""
    return MUL[c][v]


def dot(coeffs, rows):
    """Linear combination ``sum_i coeffs[i] * rows[i]`` over the field.

    ``coeffs`` has shape ``(k,)`` and ``rows`` shape ``(k, n)``; the result is
    a uint8 vector of length ``n``.
    """
    coeffs = np.asarray(coeffs, dtype=np.uint8)
    rows = np.asarray(rows, dtype=np.uint8)
    if rows.shape[0] == 0:
        return np.zeros(rows.shape[1:], dtype=np.uint8)
    return np.bitwise_xor.reduce(MUL[coeffs[:, None], rows], axis=0)
