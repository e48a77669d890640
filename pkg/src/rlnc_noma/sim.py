"""Monte-Carlo alpha sweeps for average BER and ergodic sum rate.

Every trial draws its randomness from ``substream(seed, trial, tag)``, so a
sweep is a pure function of the configuration: results do not depend on how
trials are spread over workers. User drops use the tag ``"drop"`` and are
therefore shared by every alpha point, both fidelity modes and both
experiment kinds (common random numbers).

BER accounting per user and generation (K packets of L bytes):

* plain NOMA counts raw detected-bit errors over the K source packets;
* RLNC-NOMA sends N coded packets, erases any packet with a bit error, feeds
  the rest to a decoder, and charges ``8L/2`` errors for every source packet
  that could not be recovered.
"""

import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channel, phy, rlnc
from .config import BITEXACT

BER = "ber"
RATE = "rate"

# column order of the per-trial error tallies
BER_COLUMNS = ("noma_perfect", "noma_imperfect", "rlnc_perfect", "rlnc_imperfect")


def substream(seed, index, tag):
    """Independent generator for one (trial, purpose) pair."""
    key = zlib.crc32(str(tag).encode("utf-8"))
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(seed) >> 64, int(index), key])
    return np.random.default_rng(ss)


@dataclass
class BerTally:
    errors: np.ndarray  # expected or counted error weight, one entry per BER_COLUMNS
    bits: int  # source bits delivered across all users
    sinr: np.ndarray  # mean linear SINR of (group 1, group 2)
    recovered: np.ndarray  # (perfect, imperfect) recovered source packets per group, summed over users


@dataclass
class RateTally:
    noma_sum: float
    oma_sum: float
    feasible: bool
    rate_g1: float
    rate_g2: float


@dataclass
class SweepRow:
    alpha: float
    ber_noma_perfect: float
    ber_noma_imperfect: float
    ber_rlnc_perfect: float
    ber_rlnc_imperfect: float
    rate_noma_sum: float
    rate_oma_sum: float
    sinr_g1_db: float
    sinr_g2_db: float
    feasible: bool
    ci_noma_perfect: float
    ci_noma_imperfect: float
    ci_rlnc_perfect: float
    ci_rlnc_imperfect: float
    rate_g1: float = math.nan
    rate_g2: float = math.nan
    feasible_fraction: float = math.nan
    trials: int = 0

    def ber(self, column):
        return getattr(self, f"ber_{column}")

    def ci(self, column):
        return getattr(self, f"ci_{column}")


def drop(config, trial):
    """User drop and grouping for one trial: ``(weak, strong)`` terminals."""
    rng = substream(config.seed, trial, "drop")
    users = channel.drop_users(rng, 2 * config.users_per_group, config.geometry, config.led, config.pd)
    return channel.form_groups(users)


def _gammas(config, users):
    return channel.link_snr(np.array([u.gain for u in users]), config.led.power, config.pd,
                            config.noise_psd, config.bandwidth)


def _group_sinr(config, alpha, weak, strong):
    s1 = phy.sinr_group1(alpha, _gammas(config, weak), config.sinr_convention)
    s2 = phy.sinr_group2(alpha, _gammas(config, strong), config.residual_fraction, config.sinr_convention)
    return s1, s2


def run_trial_rate(config, alpha, trial):
    weak, strong = drop(config, trial)
    s1, s2 = _group_sinr(config, alpha, weak, strong)
    r1 = phy.multicast_group_rate(phy.rate_noma(s1))
    r2 = phy.multicast_group_rate(phy.rate_noma(s2))
    oma = (phy.multicast_group_rate(phy.rate_oma(_gammas(config, weak)))
           + phy.multicast_group_rate(phy.rate_oma(_gammas(config, strong))))
    r_min = config.min_throughput
    return RateTally(r1 + r2, oma, bool(r1 >= r_min and r2 >= r_min), r1, r2)


def _links(config, alpha, users):
    alloc = phy.PowerAllocation(alpha, config.led.power)
    out = []
    for u in users:
        out.append((phy.NomaLink.from_channel(u.gain, alloc, config.pd, config.noise_psd, config.bandwidth, phy.PERFECT),
                    phy.NomaLink.from_channel(u.gain, alloc, config.pd, config.noise_psd, config.bandwidth, phy.IMPERFECT)))
    return alloc, out


def frame_failure_probability(ber, K, N, L, q=256):
    """Probability a generation is not decodable when each coded packet of
    ``8L`` bits is erased on any bit error."""
    ber = np.asarray(ber, dtype=float)
    with np.errstate(divide="ignore"):
        survive = np.exp(8 * L * np.log1p(-ber))
    s = np.arange(N + 1)
    fail_given = np.array([1.0 - rlnc.full_rank_probability(K, int(k), q) for k in s])
    # plain powers: scipy's pmf overflows once survive underflows to subnormal
    p = survive[..., None]
    pmf = np.array([math.comb(N, int(k)) for k in s]) * p ** s * (1.0 - p) ** (N - s)
    return np.clip(pmf @ fail_given, 0.0, 1.0)


def _semianalytic_tally(config, alpha, weak, strong):
    K, N, L = config.K, config.N, config.L
    packet_bits = 8 * L
    _, weak_links = _links(config, alpha, weak)
    _, strong_links = _links(config, alpha, strong)
    w = np.array([phy.ber_weak_analytic(p) for p, _ in weak_links])
    sp = np.array([phy.ber_strong_perfect_analytic(p) for p, _ in strong_links])
    si = np.array([phy.ber_strong_imperfect_analytic(i) for _, i in strong_links])
    source_bits = K * packet_bits
    fail_w, fail_sp, fail_si = (frame_failure_probability(b, K, N, L) for b in (w, sp, si))
    guess = source_bits / 2
    errors = np.array([
        source_bits * (w.sum() + sp.sum()),
        source_bits * (w.sum() + si.sum()),
        guess * (fail_w.sum() + fail_sp.sum()),
        guess * (fail_w.sum() + fail_si.sum()),
    ])
    recovered = np.array([K * ((1 - fail_w).sum() + (1 - fail_sp).sum()),
                          K * ((1 - fail_w).sum() + (1 - fail_si).sum())])
    return errors, recovered


class _FrameDecodeCache:
    """Decode results of one group's coded packets, keyed by the survivor set.

    Within a trial every receiver of a group sees the same coded packets, so
    receivers with identical erasure patterns share one decode.
    """

    def __init__(self, frame, coeffs, payloads):
        self.frame = frame
        self.coeffs = coeffs
        self.payloads = payloads
        self._memo = {}

    def error_weight(self, survivors):
        key = survivors.tobytes()
        if key not in self._memo:
            self._memo[key] = self._decode(survivors)
        return self._memo[key]

    def _decode(self, survivors):
        K, L = self.frame.K, self.frame.L
        dec = rlnc.Decoder(K, L)
        for j in np.flatnonzero(survivors):
            dec.receive(rlnc.CodedPacket(self.coeffs[j], self.payloads[j]))
            if dec.complete:
                break
        recovered = dec.recover()
        wrong = sum(int(np.unpackbits(p ^ self.frame.packets[i]).sum()) for i, p in recovered)
        return wrong + (K - len(recovered)) * 8 * L / 2, len(recovered)


def _bitexact_tally(config, alpha, weak, strong, rng):
    K, N, L = config.K, config.N, config.L
    packet_bits = 8 * L
    frames, coeffs, payloads = [], [], []
    for _ in range(2):
        frame = rlnc.make_random_frame(rng, K, L)
        c = np.stack([rlnc.draw_coefficients(rng, K) for _ in range(N)])
        frames.append(frame)
        coeffs.append(c)
        payloads.append(rlnc.encode_many(frame, c))
    caches = [_FrameDecodeCache(f, c, p) for f, c, p in zip(frames, coeffs, payloads)]

    # plain source packets first, then the coded packets
    streams = [np.concatenate([np.unpackbits(f.packets), np.unpackbits(p)]) for f, p in zip(frames, payloads)]
    b1, b2 = streams
    split = K * packet_bits
    alloc, weak_links = _links(config, alpha, weak)
    _, strong_links = _links(config, alpha, strong)
    x = phy.superpose(b1, b2, alloc)

    errors = np.zeros(4)
    recovered = np.zeros(2)

    def account(detected, sent, cache, cols):
        wrong = detected != sent
        raw = int(wrong[:split].sum())
        survivors = ~wrong[split:].reshape(N, packet_bits).any(axis=1)
        weight, n_rec = cache.error_weight(survivors)
        for c in cols:
            errors[c] += raw
            errors[2 + c] += weight
            recovered[c] += n_rec

    for user, (perfect, _) in zip(weak, weak_links):
        y = phy.receive_sample(rng, x, user.gain, config.pd, perfect.sigma)
        account(phy.detect_weak(y, perfect), b1, caches[0], (0, 1))
    for user, (perfect, imperfect) in zip(strong, strong_links):
        y = phy.receive_sample(rng, x, user.gain, config.pd, perfect.sigma)
        account(phy.sic_detect_strong(y, perfect, b1)[1], b2, caches[1], (0,))
        account(phy.sic_detect_strong(y, imperfect)[1], b2, caches[1], (1,))
    return errors, recovered


def run_trial_ber(config, alpha, trial, fidelity=None):
    """Error tallies for one user drop at one alpha.

    ``fidelity`` defaults to the configured mode.
    """
    fidelity = fidelity or config.fidelity
    weak, strong = drop(config, trial)
    if fidelity == BITEXACT:
        rng = substream(config.seed, trial, f"bitexact@{alpha!r}")
        errors, recovered = _bitexact_tally(config, alpha, weak, strong, rng)
    else:
        errors, recovered = _semianalytic_tally(config, alpha, weak, strong)
    s1, s2 = _group_sinr(config, alpha, weak, strong)
    bits = 2 * config.users_per_group * config.K * 8 * config.L
    return BerTally(errors, bits, np.array([s1.mean(), s2.mean()]), recovered)


def _run_chunk(config, alpha, kinds, fidelity, start, stop):
    n = stop - start
    ber = np.full((n, 4), np.nan)
    sinr = np.full((n, 2), np.nan)
    rate = np.full((n, 5), np.nan)
    for k, trial in enumerate(range(start, stop)):
        if BER in kinds:
            t = run_trial_ber(config, alpha, trial, fidelity)
            ber[k] = t.errors / t.bits
            sinr[k] = t.sinr
        if RATE in kinds:
            r = run_trial_rate(config, alpha, trial)
            rate[k] = (r.noma_sum, r.oma_sum, r.feasible, r.rate_g1, r.rate_g2)
    return ber, sinr, rate


def _ci(samples):
    n = samples.shape[0]
    if n < 2:
        return np.full(samples.shape[1:], np.nan)
    return 1.96 * samples.std(axis=0, ddof=1) / math.sqrt(n)


def _chunks(trials, workers):
    size = max(1, math.ceil(trials / (4 * workers)))
    return [(s, min(trials, s + size)) for s in range(0, trials, size)]


def simulate_point(config, alpha, kinds=(BER, RATE), fidelity=None, workers=1, executor=None):
    """Per-trial arrays ``(ber, sinr, rate)`` for one alpha, in trial order."""
    phy.check_alpha(alpha)
    fidelity = fidelity or config.fidelity
    chunks = _chunks(config.trials, workers)
    if executor is None:
        parts = [_run_chunk(config, alpha, kinds, fidelity, a, b) for a, b in chunks]
    else:
        futures = [executor.submit(_run_chunk, config, alpha, kinds, fidelity, a, b) for a, b in chunks]
        parts = [f.result() for f in futures]
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))


def aggregate(config, alpha, ber, sinr, rate):
    # per-trial bit counts are equal, so the pooled BER is the mean of per-trial BERs
    mean_ber = ber.mean(axis=0)
    ci = _ci(ber)
    mean_rate = rate.mean(axis=0)
    sinr_db = 10 * np.log10(sinr.mean(axis=0))
    r_min = config.min_throughput
    feasible = bool(mean_rate[3] >= r_min and mean_rate[4] >= r_min)
    return SweepRow(
        alpha=alpha,
        ber_noma_perfect=float(mean_ber[0]),
        ber_noma_imperfect=float(mean_ber[1]),
        ber_rlnc_perfect=float(mean_ber[2]),
        ber_rlnc_imperfect=float(mean_ber[3]),
        rate_noma_sum=float(mean_rate[0]),
        rate_oma_sum=float(mean_rate[1]),
        sinr_g1_db=float(sinr_db[0]),
        sinr_g2_db=float(sinr_db[1]),
        feasible=feasible,
        ci_noma_perfect=float(ci[0]),
        ci_noma_imperfect=float(ci[1]),
        ci_rlnc_perfect=float(ci[2]),
        ci_rlnc_imperfect=float(ci[3]),
        rate_g1=float(mean_rate[3]),
        rate_g2=float(mean_rate[4]),
        feasible_fraction=float(mean_rate[2]),
        trials=config.trials,
    )


def run_sweep(config, kinds=(BER, RATE), workers=1, progress=None):
    """One ``SweepRow`` per alpha in the configured sweep, ascending.

    Skipped experiment kinds leave their columns as NaN.
    """
    rows = []
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for alpha in config.alphas():
            with np.errstate(divide="ignore", invalid="ignore"):
                row = aggregate(config, alpha, *simulate_point(config, alpha, kinds, workers=workers,
                                                                 executor=executor))
            if RATE not in kinds:
                row.feasible = False
            rows.append(row)
            if progress is not None:
                progress(row)
    finally:
        if executor is not None:
            executor.shutdown()
    return rows
