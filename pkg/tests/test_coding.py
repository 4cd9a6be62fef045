import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from resilient_coding.coding import (
    Adversary, ClassPayload, Message, ResilientCode, SimConfig, SimResult, bin_of, decode,
    draw_sources, encode, parse_adversary, rate_bound, sim_from_csv, sim_to_csv, simulate,
    simulate_suite, trial_rng, worst_case,
)
from resilient_coding.games import observation_channel
from resilient_coding.probability import Channel
from resilient_coding.rate import SourceModel

from conftest import pd_model

# trial 1 of seed 42, n=12, margin 0.5, epsilon 0.5
GOLDEN_X = [[0, 0], [0, 1], [1, 0], [0, 1], [1, 1], [0, 0], [1, 0], [0, 1], [1, 1], [0, 0], [0, 0], [0, 0]]
GOLDEN_Y = [1, 2, 2, 1, 3, 3, 0, 1, 3, 0, 3, 1]
GOLDEN_BINS = [(0, 8, 10, 913), (1, 4, 5, 8)]


def tv(x_col, probs):
    emp = np.bincount(x_col, minlength=len(probs)) / len(x_col)
    return 0.5 * np.abs(emp - probs).sum()


def test_config_validation():
    for bad in (dict(n=0), dict(n=4, trials=0), dict(n=4, typicality_eta=0.0),
                dict(n=4, rare_threshold=0), dict(n=4, color_budget=0), dict(n=4, decision="map")):
        with pytest.raises(ValueError):
            SimConfig(**bad)


def test_config_defaults():
    cfg = SimConfig(n=27)
    assert cfg.eta == pytest.approx(1 / 3)
    assert cfg.slack == pytest.approx(2 / 3)
    assert cfg.rare_threshold_for(2) == 7
    assert SimConfig(n=27, rate_margin_bits=0.5).slack == 0.5


def test_single_component_sends_colors_only():
    model = SourceModel.from_probs([[0.2, 0.3, 0.5]])
    ch = Channel(np.eye(3))
    cfg = SimConfig(n=9)
    x = np.array([[0], [2], [1], [1], [2], [0], [0], [2], [2]])
    msg = encode(x, model, ch, cfg)
    assert msg.bit_length == 0
    assert all(p.mode == "empty" for p in msg.payloads)
    assert decode(msg, x[:, 0], model, ch, cfg).x.tolist() == x.tolist()


def test_all_rare_layout(uniform_pd, half_noise):
    cfg = SimConfig(n=4, rare_threshold=8)
    x = np.array([[0, 0], [0, 1], [1, 1], [1, 0]])
    msg = encode(x, uniform_pd, half_noise, cfg)
    assert msg.k == 0
    assert [p.mode for p in msg.payloads] == ["raw", "raw"]
    assert msg.bit_length == 1 + 4 * 1 + 4 * 1
    assert msg.payload_for(0).raw == (0, 1) and msg.payload_for(1).raw == (1, 0)


def test_constant_deviation_selects_the_deviator(uniform_pd, half_noise):
    code = ResilientCode(uniform_pd, half_noise, SimConfig(n=16))
    x = draw_sources(uniform_pd, 16, Adversary.constant(0, 0), trial_rng(42, 0))
    assert np.all(x[:, 0] == 0)
    tv1, tv2 = tv(x[:, 0], [0.5, 0.5]), tv(x[:, 1], [0.5, 0.5])
    assert tv1 == 0.5 and tv1 > tv2
    assert code.select_component(x) == 0


def test_select_component_tie_breaks_low(uniform_pd, half_noise):
    code = ResilientCode(uniform_pd, half_noise, SimConfig(n=4))
    assert code.select_component(np.array([[0, 0], [0, 0], [1, 1], [1, 1]])) == 0
    assert code.select_component(np.array([[0, 0], [1, 0], [0, 0], [1, 1]])) == 1


def test_golden_round_trip(uniform_pd, half_noise):
    cfg = SimConfig(n=12, seed=42, rate_margin_bits=0.5)
    rng = trial_rng(42, 1)
    x = draw_sources(uniform_pd, 12, Adversary.none(), rng)
    assert x.tolist() == GOLDEN_X
    code = ResilientCode(uniform_pd, half_noise, cfg)
    msg = code.encode(x)
    assert [(p.symbol, p.count, p.bits, p.bin_index) for p in msg.payloads] == GOLDEN_BINS
    assert msg.bit_length == 28
    out = code.decode(msg, np.array(GOLDEN_Y))
    assert out.ok and out.x.tolist() == GOLDEN_X


def test_encode_rejects_bad_symbols(uniform_pd, half_noise):
    code = ResilientCode(uniform_pd, half_noise, SimConfig(n=2))
    with pytest.raises(ValueError):
        code.encode(np.array([[0, 2], [0, 0]]))
    with pytest.raises(ValueError):
        code.encode(np.array([0, 1]))


def test_noiseless_decoding_ignores_colors(uniform_pd):
    ch = observation_channel(0.0)
    code = ResilientCode(uniform_pd, ch, SimConfig(n=6))
    x = np.array([[0, 1], [1, 1], [1, 0], [0, 0], [1, 1], [0, 1]])
    y = np.ravel_multi_index(x.T, (2, 2))
    msg = code.encode(x)
    assert msg.color_bits == 0
    assert code.decode(msg, y).x.tolist() == x.tolist()


def test_shared_color_for_confusable_pair_fails(uniform_pd, half_noise):
    cfg = SimConfig(n=8, color_budget=1, rate_margin_bits=0.5)
    code = ResilientCode(uniform_pd, half_noise, cfg)
    x = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [0, 0], [1, 0], [0, 1], [1, 1]])
    msg = code.encode(x)
    assert set(msg.colors) == {0} and msg.color_bits == 0
    out = code.decode(msg, np.ravel_multi_index(x.T, (2, 2)))
    assert not out.ok and "2 symbols match" in out.reason


def test_out_of_range_color_fails(uniform_pd, half_noise):
    code = ResilientCode(uniform_pd, half_noise, SimConfig(n=2))
    msg = code.encode(np.array([[0, 0], [1, 1]]))
    bad = Message(msg.k, (0, 5), msg.header_bits, msg.color_bits, msg.payloads)
    assert not code.decode(bad, np.array([0, 3])).ok


def test_payload_count_mismatch_fails(uniform_pd, half_noise):
    code = ResilientCode(uniform_pd, half_noise, SimConfig(n=2, rare_threshold=8))
    msg = code.encode(np.array([[0, 0], [1, 1]]))
    bad = Message(msg.k, msg.colors, 1, 1, (ClassPayload(0, 2, "raw", 2, raw=(0, 0)),))
    assert not code.decode(bad, np.array([0, 3])).ok


def test_bins_are_seeded_and_spread():
    idx = np.arange(4096, dtype=np.uint64)
    a, b = bin_of(idx, np.uint64(1), 4), bin_of(idx, np.uint64(2), 4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, bin_of(idx, np.uint64(1), 4))
    counts = np.bincount(a.astype(np.int64), minlength=16)
    assert counts.min() > 180 and counts.max() < 330
    assert np.all(bin_of(idx, np.uint64(1), 0) == 0)


def test_noiseless_channel_never_errs(uniform_pd):
    cfg = SimConfig(n=12, trials=40, seed=7)
    advs = [Adversary.none(), Adversary.constant(0, 1), Adversary.constant(1, 0),
            parse_adversary("iid:2:0.9,0.1", uniform_pd, 12)[0]]
    for r in simulate_suite(uniform_pd, observation_channel(0.0), cfg, advs):
        assert r.errors == 0


def test_per_stage_adversary_draws_its_law(uniform_pd):
    stages = parse_adversary("iid:1:1,0", uniform_pd, 10)[0]
    x = draw_sources(uniform_pd, 10, stages, trial_rng(1, 0))
    assert np.all(x[:, 0] == 0)


def test_simulation_is_deterministic(uniform_pd, half_noise):
    cfg = SimConfig(n=10, trials=30, seed=5, rate_margin_bits=0.5)
    a = simulate(uniform_pd, half_noise, cfg, Adversary.constant(1, 1), transcript=True)
    b = simulate(uniform_pd, half_noise, cfg, Adversary.constant(1, 1), transcript=True)
    assert a == b and a.transcript == b.transcript
    c = simulate(uniform_pd, half_noise, SimConfig(n=10, trials=30, seed=6, rate_margin_bits=0.5),
                 Adversary.constant(1, 1), transcript=True)
    assert c.transcript["x"] != a.transcript["x"]


def test_unique_rule_turns_ambiguity_into_failure(uniform_pd, half_noise):
    cfg = SimConfig(n=12, trials=60, seed=3, rate_margin_bits=0.5, decision="unique")
    r = simulate(uniform_pd, half_noise, cfg)
    assert r.contested > 0
    assert r.errors >= r.contested


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.2, 0.5, 1.0]), st.integers(4, 16),
       st.sampled_from([None, 0.25, 0.5]))
def test_message_length_within_rate_bound(seed, eps, n, margin):
    rng = np.random.default_rng(seed)
    p, q = rng.uniform(0.05, 0.95, size=2)
    model = pd_model(p, q)
    ch = observation_channel(eps)
    cfg = SimConfig(n=n, rate_margin_bits=margin)
    if cfg.slack > 2 * cfg.eta:
        return
    code = ResilientCode(model, ch, cfg)
    x = rng.integers(0, 2, size=(n, 2))
    msg = code.encode(x)
    assert msg.bit_length / n <= rate_bound(model, ch, cfg, msg.k) + 1e-9


def test_measured_rate_within_bound(uniform_pd, half_noise):
    cfg = SimConfig(n=16, trials=40, seed=42, rate_margin_bits=0.5)
    for r in simulate_suite(uniform_pd, half_noise, cfg):
        assert r.avg_rate_bits_per_symbol <= rate_bound(uniform_pd, half_noise, cfg) + 1e-9


def test_message_layout_identity(uniform_pd, half_noise):
    code = ResilientCode(uniform_pd, half_noise, SimConfig(n=14, rate_margin_bits=0.5))
    x = draw_sources(uniform_pd, 14, Adversary.none(), trial_rng(0, 0))
    msg = code.encode(x)
    chi = code.components[msg.k].chi
    assert msg.bit_length == math.ceil(math.log2(2)) + 14 * math.ceil(math.log2(chi)) + \
        sum(p.bits for p in msg.payloads)


def test_parse_adversary(uniform_pd):
    assert [a.label(uniform_pd) for a in parse_adversary("all", uniform_pd)] == [
        "none", "constant:1:T", "constant:1:B", "constant:2:L", "constant:2:R"]
    assert parse_adversary("constant:2:R", uniform_pd)[0] == Adversary.constant(1, 1)
    assert parse_adversary("iid:1:0.3,0.7", uniform_pd, 3)[0].label(uniform_pd) == "stages:1"
    for bad in ("constant:3:T", "constant:x:T", "flip:1:T", "iid:1:0.5", "iid:1:0.3,0.7"):
        with pytest.raises((ValueError, KeyError)):
            parse_adversary(bad, uniform_pd, None if bad == "iid:1:0.3,0.7" else 3)


def test_csv_round_trip_and_worst_case():
    rows = [SimResult("none", 200, 18, 2.36), SimResult("constant:1:T", 200, 0, 2.2)]
    text = sim_to_csv(rows)
    assert text.splitlines() == ["adversary,trials,errors,empirical_error,avg_rate",
                                 "none,200,18,0.090000,2.360000",
                                 "constant:1:T,200,0,0.000000,2.200000"]
    assert sim_from_csv(text) == rows
    assert worst_case(rows).adversary == "none"
