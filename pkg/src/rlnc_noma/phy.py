"""Two-group power-domain NOMA with OOK: superposition, detection, SIC, BER and rates.

Group 1 (weak users) gets the share ``1 - alpha`` of the average optical power
and group 2 (strong users) gets ``alpha``; ``alpha`` lies in ``(0, 0.5)`` so the
weak stream is always the louder one. Each OOK stream's "on" level is twice its
average share.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

from .channel import noise_variance

PERFECT = "perfect"
IMPERFECT = "imperfect"
SIC_MODES = (PERFECT, IMPERFECT)

AMPLITUDE = "amplitude"
POWER = "power"
SINR_CONVENTIONS = (AMPLITUDE, POWER)


def check_alpha(alpha):
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    return alpha


@dataclass(frozen=True)
class PowerAllocation:
    alpha: float
    P: float = 1.0

    def __post_init__(self):
        check_alpha(self.alpha)
        if self.P <= 0:
            raise ValueError("total optical power must be positive")

    @property
    def A1(self):
        return 2 * (1 - self.alpha) * self.P

    @property
    def A2(self):
        return 2 * self.alpha * self.P


@dataclass(frozen=True)
class NomaLink:
    a1: float
    a2: float
    sigma: float
    sic: str = PERFECT

    def __post_init__(self):
        if self.sic not in SIC_MODES:
            raise ValueError(f"unknown SIC mode {self.sic!r}")

    @classmethod
    def from_channel(cls, h, alloc, pd, N0, B, sic=PERFECT):
        R = pd.responsivity
        return cls(R * h * alloc.A1, R * h * alloc.A2, math.sqrt(noise_variance(N0, B)), sic)

    @property
    def weak_threshold(self):
        return (self.a1 + self.a2) / 2

    @property
    def strong_threshold(self):
        return self.a2 / 2


def superpose(b1, b2, alloc):
    return alloc.A1 * np.asarray(b1) + alloc.A2 * np.asarray(b2)


def receive_sample(rng, x, h, pd, sigma):
    if sigma <= 0:
        raise ValueError("noise standard deviation must be positive")
    x = np.asarray(x, dtype=float)
    return pd.responsivity * h * x + sigma * rng.standard_normal(x.shape)


def detect_weak(y, link):
    return (np.asarray(y) > link.weak_threshold).astype(np.uint8)


def sic_detect_strong(y, link, true_b1=None):
    """SIC at a strong user: returns ``(b1_hat, b2_hat)``.

    Perfect mode cancels the true weak-stream symbols (genie aided) and
    reports them as ``b1_hat``; imperfect mode cancels its own decision, so weak
    stream errors propagate.
    """
    y = np.asarray(y)
    if link.sic == PERFECT:
        if true_b1 is None:
            raise ValueError("perfect SIC needs the transmitted weak-stream bits")
        b1_hat = np.asarray(true_b1).astype(np.uint8)
    else:
        b1_hat = detect_weak(y, link)
    residual = y - link.a1 * b1_hat
    return b1_hat, (residual > link.strong_threshold).astype(np.uint8)


def q_function(x):
    return ndtr(-np.asarray(x, dtype=float))


def ber_weak_analytic(link):
    s = link.sigma
    return 0.5 * float(q_function((link.a1 - link.a2) / (2 * s)) + q_function((link.a1 + link.a2) / (2 * s)))


def ber_strong_perfect_analytic(link):
    return float(q_function(link.a2 / (2 * link.sigma)))


def ber_strong_imperfect_analytic(link):
    """Exact own-bit error rate of detect-and-subtract SIC.

    The strong user decides ``b2 = 1`` when ``y`` falls in
    ``(a2/2, (a1+a2)/2]`` or above ``a1 + a2/2``; the error rate is that
    region's Gaussian mass averaged over the four equiprobable symbol pairs.
    """
    a1, a2, s = link.a1, link.a2, link.sigma
    t_low, t_mid, t_high = a2 / 2, (a1 + a2) / 2, a1 + a2 / 2
    err = 0.0
    for b1 in (0, 1):
        for b2 in (0, 1):
            mu = a1 * b1 + a2 * b2
            p_one = (ndtr((t_mid - mu) / s) - ndtr((t_low - mu) / s)) + ndtr((mu - t_high) / s)
            err += (1 - p_one) if b2 else p_one
    return float(err / 4)


def _fractions(alpha, convention):
    if convention == AMPLITUDE:
        return (1 - alpha) ** 2, alpha ** 2
    if convention == POWER:
        return 1 - alpha, alpha
    raise ValueError(f"unknown SINR convention {convention!r}")


def sinr_group1(alpha, gamma, convention=AMPLITUDE):
    """SINR of a weak user treating the strong stream as noise."""
    w1, w2 = _fractions(alpha, convention)
    gamma = np.asarray(gamma, dtype=float)
    return w1 * gamma / (w2 * gamma + 1)


def sinr_group2(alpha, gamma, eps=0.0, convention=AMPLITUDE):
    """SINR of a strong user after SIC leaving a fraction ``eps`` of the weak stream."""
    if not 0 <= eps <= 1:
        raise ValueError(f"residual fraction must lie in [0, 1], got {eps}")
    w1, w2 = _fractions(alpha, convention)
    gamma = np.asarray(gamma, dtype=float)
    return w2 * gamma / (eps * w1 * gamma + 1)


def rate_noma(sinr):
    return np.log2(1 + np.asarray(sinr, dtype=float))


def rate_oma(gamma):
    """Equal time sharing at full power: each group gets half the airtime."""
    return 0.5 * np.log2(1 + np.asarray(gamma, dtype=float))


def multicast_group_rate(member_rates):
    rates = np.asarray(member_rates, dtype=float)
    if rates.size == 0:
        raise ValueError("a multicast group needs at least one member")
    return float(rates.min())


class Interval(NamedTuple):
    lo: float
    hi: float

    @property
    def empty(self):
        return self.lo > self.hi

    def __contains__(self, x):
        return self.lo <= x <= self.hi


EMPTY = Interval(math.inf, -math.inf)


def _bisect(pred, lo, hi, tol):
    # pred(lo) is False, pred(hi) is True
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def feasible_alpha(gamma1_min, gamma2_min, eps, r_min, convention=AMPLITUDE, tol=1e-6):
    """Range of alpha in (0, 0.5) where both weakest members reach ``r_min``.

    The weak-group rate falls and the strong-group rate rises with alpha, so
    the feasible set is an interval whose two ends are found by bisection.
    """
    if r_min < 0:
        raise ValueError("r_min must be non-negative")
    if r_min == 0:
        return Interval(0.0, 0.5)

    def ok1(a):
        return float(rate_noma(sinr_group1(a, gamma1_min, convention))) >= r_min

    def ok2(a):
        return float(rate_noma(sinr_group2(a, gamma2_min, eps, convention))) >= r_min

    lo_edge, hi_edge = tol * 1e-3, 0.5 - tol * 1e-3
    if not ok1(lo_edge) or not ok2(hi_edge):
        return EMPTY
    lo = lo_edge if ok2(lo_edge) else _bisect(ok2, lo_edge, hi_edge, tol)[1]
    hi = hi_edge if ok1(hi_edge) else _bisect(lambda a: not ok1(a), lo_edge, hi_edge, tol)[0]
    if lo > hi:
        return EMPTY
    return Interval(lo, hi)
