import math

import numpy as np
import pytest

from rlnc_noma import rlnc, sim
from rlnc_noma.channel import UserTerminal
from rlnc_noma.config import BITEXACT, SEMIANALYTIC, ScenarioConfig

QUIET = dict(noise_psd=1e-30)


def first_outputs(seed, index, tag):
    return tuple(sim.substream(seed, index, tag).integers(0, 2**63, 8))


def test_substream_deterministic():
    assert first_outputs(1, 5, "drop") == first_outputs(1, 5, "drop")


def test_substream_no_collisions_across_indices_and_tags():
    seen = {first_outputs(42, i, "drop") for i in range(50_000)}
    seen |= {first_outputs(42, i, "bitexact@0.25") for i in range(50_000)}
    assert len(seen) == 100_000


def test_substream_depends_on_seed():
    assert first_outputs(1, 0, "drop") != first_outputs(2, 0, "drop")


@pytest.mark.parametrize("fidelity", [BITEXACT, SEMIANALYTIC])
def test_noiseless_trial_is_error_free(fidelity):
    cfg = ScenarioConfig(**QUIET)
    for trial in range(3):
        t = sim.run_trial_ber(cfg, 0.25, trial, fidelity)
        assert t.errors[:2].tolist() == [0, 0]
        # N > K: the only failure left is a rank-deficient draw, ~256^-3
        assert t.errors[2:].max() < 1e-3 * t.bits
        assert t.recovered.tolist() == pytest.approx([10 * 10, 10 * 10], abs=1e-3)


def test_equal_airtime_without_erasures_loses_only_rank_deficient_frames():
    cfg = ScenarioConfig(redundancy=10, **QUIET)
    K, L = cfg.K, cfg.L
    fail = 1 - rlnc.full_rank_probability(K, K)
    t = sim.run_trial_ber(cfg, 0.25, 0, SEMIANALYTIC)
    assert t.errors[:2].tolist() == [0, 0]
    assert t.errors[2] / t.bits == pytest.approx(0.5 * fail, rel=1e-9)
    # bit-exact: every user of a group shares the group's coded packets, so the
    # error weight is all-or-nothing per group
    for trial in range(20):
        t = sim.run_trial_ber(cfg, 0.25, trial, BITEXACT)
        assert t.errors[0] == 0
        per_group = 5 * K * 8 * L / 2
        assert t.errors[2] in (0, per_group, 2 * per_group)


def test_bitexact_conservation():
    cfg = ScenarioConfig()
    for trial in range(5):
        t = sim.run_trial_ber(cfg, 0.4, trial, BITEXACT)
        assert np.all(t.recovered <= 10 * 10)
        assert np.all(t.errors <= t.bits / 2)
        assert t.bits == 10 * 10 * 8 * 128


def test_frame_failure_probability_limits():
    assert sim.frame_failure_probability(0.0, 10, 12, 128) == pytest.approx(
        1 - rlnc.full_rank_probability(10, 12))
    assert sim.frame_failure_probability(0.5, 10, 12, 128) == pytest.approx(1.0)
    # one erasure-prone packet: the failure is P(fewer than K of N survive) for tiny rank loss
    p = sim.frame_failure_probability(1e-4, 10, 12, 128)
    erase = 1 - (1 - 1e-4) ** 1024
    tail = sum(math.comb(12, k) * erase ** k * (1 - erase) ** (12 - k) for k in range(3, 13))
    assert p == pytest.approx(tail, rel=1e-2)


def test_fidelity_modes_agree_small():
    cfg = ScenarioConfig(trials=400, alpha_start=0.3, alpha_stop=0.3)
    a = sim.aggregate(cfg, 0.3, *sim.simulate_point(cfg, 0.3, (sim.BER,), BITEXACT))
    b = sim.aggregate(cfg, 0.3, *sim.simulate_point(cfg, 0.3, (sim.BER,), SEMIANALYTIC))
    for col in sim.BER_COLUMNS:
        se = math.hypot(a.ci(col), b.ci(col)) / 1.96
        assert abs(a.ber(col) - b.ber(col)) <= 4 * se


def fixed_drop(gammas1, gammas2, cfg):
    def gain(g):
        return math.sqrt(g * cfg.noise_psd * cfg.bandwidth) / (cfg.pd.responsivity * cfg.led.power)

    weak = [UserTerminal((0, 0, 0), gain(g), 1) for g in gammas1]
    strong = [UserTerminal((0, 0, 0), gain(g), 2) for g in gammas2]
    return lambda config, trial: (weak, strong)


def test_rate_trial_single_user_example(monkeypatch):
    cfg = ScenarioConfig(users_per_group=1, sic="perfect")
    monkeypatch.setattr(sim, "drop", fixed_drop([100], [100], cfg))
    r = sim.run_trial_rate(cfg, 0.2, 0)
    assert r.noma_sum == pytest.approx(math.log2(13.8) + math.log2(5))
    assert r.noma_sum == pytest.approx(6.109, abs=1e-3)
    assert r.oma_sum == pytest.approx(math.log2(101))
    assert r.oma_sum == pytest.approx(6.658, abs=1e-3)
    assert r.feasible
    assert r.rate_g1 == pytest.approx(3.787, abs=1e-3) and r.rate_g2 == pytest.approx(2.322, abs=1e-3)


def test_rate_trial_power_starvation_limit():
    cfg = ScenarioConfig()
    r = sim.run_trial_rate(cfg, 1e-6, 0)
    weak, _ = sim.drop(cfg, 0)
    gamma_min = min(sim._gammas(cfg, weak))
    assert r.rate_g2 == pytest.approx(0, abs=1e-6)
    assert r.noma_sum == pytest.approx(math.log2(1 + gamma_min), rel=1e-4)
    assert not r.feasible


def test_rate_trial_uses_weakest_member(monkeypatch):
    cfg = ScenarioConfig(users_per_group=3, sic="perfect")
    monkeypatch.setattr(sim, "drop", fixed_drop([80, 100, 120], [150, 200, 300], cfg))
    r = sim.run_trial_rate(cfg, 0.2, 0)
    assert r.rate_g1 == pytest.approx(math.log2(1 + 0.64 * 80 / (0.04 * 80 + 1)))
    assert r.rate_g2 == pytest.approx(math.log2(1 + 0.04 * 150))
    assert r.oma_sum == pytest.approx(0.5 * math.log2(81) + 0.5 * math.log2(151))


def test_residual_applies_only_under_imperfect_sic(monkeypatch):
    cfg_i = ScenarioConfig(users_per_group=1, sic="imperfect", epsilon=0.1)
    monkeypatch.setattr(sim, "drop", fixed_drop([100], [100], cfg_i))
    r = sim.run_trial_rate(cfg_i, 0.2, 0)
    assert r.rate_g2 == pytest.approx(math.log2(1 + 4 / (0.1 * 64 + 1)))
    r = sim.run_trial_rate(cfg_i.replace(sic="perfect"), 0.2, 0)
    assert r.rate_g2 == pytest.approx(math.log2(5))


def test_sweep_rows_ordered_and_bounded():
    cfg = ScenarioConfig(trials=20)
    rows = sim.run_sweep(cfg)
    assert [r.alpha for r in rows] == sorted(r.alpha for r in rows)
    assert [r.alpha for r in rows] == pytest.approx([0.05 * k for k in range(1, 10)])
    for r in rows:
        for col in sim.BER_COLUMNS:
            assert 0 <= r.ber(col) <= 0.5
            assert r.ci(col) >= 0
        assert r.rate_noma_sum >= 0 and r.rate_oma_sum >= 0


def test_single_trial_has_undefined_ci():
    rows = sim.run_sweep(ScenarioConfig(trials=1, alpha_start=0.2, alpha_stop=0.2))
    assert all(math.isnan(rows[0].ci(c)) for c in sim.BER_COLUMNS)
    assert not math.isnan(rows[0].ber_noma_perfect)


def test_rate_only_sweep_leaves_ber_blank():
    rows = sim.run_sweep(ScenarioConfig(trials=5, alpha_start=0.2, alpha_stop=0.3), kinds=(sim.RATE,))
    assert len(rows) == 3
    assert all(math.isnan(r.ber_noma_perfect) for r in rows)
    assert all(r.rate_noma_sum > 0 for r in rows)


def test_ber_grows_toward_equal_split():
    cfg = ScenarioConfig(trials=200)
    lo = sim.aggregate(cfg, 0.2, *sim.simulate_point(cfg, 0.2, (sim.BER,)))
    hi = sim.aggregate(cfg, 0.45, *sim.simulate_point(cfg, 0.45, (sim.BER,)))
    assert hi.ber_noma_perfect > lo.ber_noma_perfect
    assert hi.ber_noma_imperfect > lo.ber_noma_imperfect


@pytest.mark.parametrize("fidelity", [SEMIANALYTIC, BITEXACT])
def test_sweep_independent_of_worker_count(fidelity):
    cfg = ScenarioConfig(trials=12, alpha_start=0.2, alpha_stop=0.3, fidelity=fidelity)
    serial = sim.run_sweep(cfg, workers=1)
    parallel = sim.run_sweep(cfg, workers=3)
    for a, b in zip(serial, parallel):
        assert repr(a) == repr(b)
