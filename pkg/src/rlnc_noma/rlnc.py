"""Generation-based random linear network coding over GF(256).

A generation (``SourceFrame``) of K equal-length packets is mixed into coded
packets with uniformly random coefficients. ``Decoder`` keeps its rows in
reduced row-echelon form, so source packets can be read off as soon as their
unit row appears, even before full rank.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import gf256

DEFAULT_GENERATION_SIZE = 10
DEFAULT_PAYLOAD_LENGTH = 128


@dataclass(frozen=True)
class SourceFrame:
    packets: np.ndarray  # (K, L) uint8

    def __post_init__(self):
        p = np.asarray(self.packets, dtype=np.uint8)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError(f"frame must be a non-empty (K, L) byte matrix, got shape {p.shape}")
        object.__setattr__(self, "packets", p)

    @property
    def K(self):
        return self.packets.shape[0]

    @property
    def L(self):
        return self.packets.shape[1]


@dataclass(frozen=True)
class CodedPacket:
    coeffs: np.ndarray  # (K,) uint8
    payload: np.ndarray  # (L,) uint8

    def to_bytes(self):
        """K coefficient bytes followed by L payload bytes, no framing."""
        return bytes(self.coeffs) + bytes(self.payload)

    @classmethod
    def from_bytes(cls, data, K):
        if len(data) <= K:
            raise ValueError(f"need more than {K} bytes for a K={K} coded packet, got {len(data)}")
        buf = np.frombuffer(bytes(data), dtype=np.uint8)
        return cls(buf[:K].copy(), buf[K:].copy())


def draw_coefficients(rng, K):
    if K < 1:
        raise ValueError("K must be >= 1")
    return rng.integers(0, 256, size=K, dtype=np.uint8)


def make_random_frame(rng, K=DEFAULT_GENERATION_SIZE, L=DEFAULT_PAYLOAD_LENGTH):
    if K < 1 or L < 1:
        raise ValueError("K and L must be >= 1")
    return SourceFrame(rng.integers(0, 256, size=(K, L), dtype=np.uint8))


def encode(frame, coeffs):
    coeffs = np.asarray(coeffs, dtype=np.uint8)
    if coeffs.shape != (frame.K,):
        raise ValueError(f"expected {frame.K} coefficients, got {coeffs.shape[0] if coeffs.ndim else 0}")
    return CodedPacket(coeffs.copy(), gf256.dot(coeffs, frame.packets))


def encode_many(frame, coeff_matrix):
    """Encode every row of an ``(N, K)`` coefficient matrix; returns ``(N, L)`` payloads."""
    c = np.asarray(coeff_matrix, dtype=np.uint8)
    return np.bitwise_xor.reduce(gf256.MUL[c[:, :, None], frame.packets[None, :, :]], axis=1)


class Decoder:
    """Incremental Gaussian-elimination decoder for one generation.

    Single-owner and mutable: use one instance per (receiver, generation).
    """

    def __init__(self, K, L):
        if K < 1 or L < 1:
            raise ValueError("K and L must be >= 1")
        self.K = K
        self.L = L
        self._coeffs = np.zeros((K, K), dtype=np.uint8)
        self._payloads = np.zeros((K, L), dtype=np.uint8)
        # pivot column of each stored row, in insertion order
        self._pivots = []

    @property
    def rank(self):
        return len(self._pivots)

    @property
    def complete(self):
        return self.rank == self.K

    def receive(self, pkt):
        """Absorb a coded packet; return True iff it was innovative."""
        c = np.array(pkt.coeffs, dtype=np.uint8)
        p = np.array(pkt.payload, dtype=np.uint8)
        if c.shape != (self.K,) or p.shape != (self.L,):
            raise ValueError(
                f"packet shape ({c.shape}, {p.shape}) does not match decoder K={self.K}, L={self.L}")
        mul = gf256.MUL
        n = self.rank
        for row, col in enumerate(self._pivots):
            f = c[col]
            if f:
                c ^= mul[f][self._coeffs[row]]
                p ^= mul[f][self._payloads[row]]
        nz = np.flatnonzero(c)
        if nz.size == 0:
            return False
        col = int(nz[0])
        lead_inv = gf256.INV[c[col]]
        c = mul[lead_inv][c]
        p = mul[lead_inv][p]
        for row in range(n):
            f = self._coeffs[row, col]
            if f:
                self._coeffs[row] ^= mul[f][c]
                self._payloads[row] ^= mul[f][p]
        self._coeffs[n] = c
        self._payloads[n] = p
        self._pivots.append(col)
        return True

    def recovered_indices(self):
        out = set()
        for row, col in enumerate(self._pivots):
            if np.count_nonzero(self._coeffs[row]) == 1:
                out.add(col)
        return out

    def recover(self):
        """``[(index, payload), ...]`` for every decodable source packet, by index."""
        done = self.recovered_indices()
        rows = {col: row for row, col in enumerate(self._pivots)}
        return [(i, self._payloads[rows[i]].copy()) for i in sorted(done)]


@lru_cache(maxsize=None)
def _full_rank_exact(K, N, q):
    if N < K:
        return Fraction(0)
    out = Fraction(1)
    for i in range(K):
        out *= 1 - Fraction(q) ** (i - N)
    return out


def full_rank_probability(K, N, q=256, exact=False):
    """Probability that N uniform random vectors span GF(q)^K.

    ``exact=True`` returns a ``Fraction``.
    """
    if K < 1 or q < 2 or N < 0:
        raise ValueError(f"need K >= 1, N >= 0, q >= 2 (got K={K}, N={N}, q={q})")
    p = _full_rank_exact(int(K), int(N), int(q))
    return p if exact else float(p)
