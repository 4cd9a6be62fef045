"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every test records a one-line verdict; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""

import itertools
import math
import time

import numpy as np
import pytest

from resilient_coding.ahlswede import StateFamily, ahlswede_bounds, check_entropy_positiveness
from resilient_coding.cli import main
from resilient_coding.coding import sim_from_csv
from resilient_coding.games import builtin_game, observation_channel, sweep_region
from resilient_coding.graphs import DeviationGraph, build_deviation_graph, chromatic_number
from resilient_coding.probability import (
    Channel, Dist, JointDist, conditional_entropy, side_entropy,
)
from resilient_coding.rate import resilient_rate

from conftest import pd_model, record
from oracles import (
    brute_force_chromatic, cond_entropy_by_definition, grid_sup, pd_channel_rows,
    side_entropy_by_enumeration, two_state_objectives,
)

SIM_ARGS = ["simulate", "pd", "--epsilon", "0.5", "--n", "16", "--trials", "200", "--seed", "42"]
ACHIEVE_ARGS = SIM_ARGS + ["--margin", "0.5", "--adversary", "all"]
CONVERSE_ARGS = SIM_ARGS + ["--margin", "0.5", "--color-budget", "1", "--adversary", "constant:1:T"]


def run_cli(argv, tmp_path, name):
    out = tmp_path / name
    assert main(argv + ["--out", str(out)]) == 0
    return out.read_bytes()


@pytest.fixture(scope="module")
def sim_outputs(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sim")
    t0 = time.perf_counter()
    achieve = run_cli(ACHIEVE_ARGS, tmp, "achieve.csv")
    t1 = time.perf_counter()
    converse = run_cli(CONVERSE_ARGS, tmp, "converse.csv")
    t2 = time.perf_counter()
    return {"achieve": achieve, "converse": converse, "t_achieve": t1 - t0, "t_converse": t2 - t1}


def test_criterion_1_deviation_graphs():
    t0 = time.perf_counter()
    model = pd_model()
    half = [build_deviation_graph(model, observation_channel(0.5), k) for k in (0, 1)]
    clean = [build_deviation_graph(model, observation_channel(0.0), k) for k in (0, 1)]
    ok = all(g.sorted_edges() == [(0, 1)] for g in half)
    ok &= all(chromatic_number(g)[0] == 2 and math.log2(chromatic_number(g)[0]) == 1.0 for g in half)
    ok &= all(g.edges == frozenset() and chromatic_number(g)[0] == 1 for g in clean)
    dt = time.perf_counter() - t0
    ok &= dt < 1.0
    record(1, ok, f"G1={{T,B}}, G2={{L,R}}, chi=2 at eps=0.5; edgeless, chi=1 at eps=0 ({dt:.3f}s)")
    assert ok


def test_criterion_2_rate_sanity():
    t0 = time.perf_counter()
    grid = [i / 10 for i in range(11)]
    clean = max(resilient_rate(pd_model(p, q), observation_channel(0.0)).rate_star
                for p, q in itertools.product(grid, grid))
    full = resilient_rate(pd_model(), observation_channel(1.0)).rate_star
    half = resilient_rate(pd_model(), observation_channel(0.5)).rate_star
    oracle = 1.0 + side_entropy_by_enumeration([0.5, 0.5], pd_channel_rows(0.5)[:2])
    dt = time.perf_counter() - t0
    ok = abs(clean) <= 1e-9 and abs(full - 2.0) <= 1e-9
    ok &= abs(half - oracle) <= 1e-9 and abs(half - 1.737518) <= 1e-5 and dt < 5.0
    record(2, ok, f"eps=0 max R*={clean:.1e}, eps=1 R*={full:.9f}, eps=0.5 R*={half:.9f} "
                  f"(oracle {oracle:.9f}) ({dt:.2f}s)")
    assert ok


def test_criterion_3_capacity_verdict():
    game = builtin_game("pd")
    low = sweep_region(game, 1.7, 0.5, 0.01)
    high = sweep_region(game, 2.1, 0.5, 0.01)
    centre = next(p for p in low if p.p == 0.5 and p.q == 0.5)
    low_set = {(p.p, p.q) for p in low if p.achievable}
    high_set = {(p.p, p.q) for p in high if p.achievable}
    ok = not centre.achievable and centre.rate_star >= 1.7
    ok &= 0 < len(low_set) < len(low) and low_set <= high_set
    record(3, ok, f"(0.5,0.5) R*={centre.rate_star:.6f} not achievable; "
                  f"|A(1.7)|={len(low_set)} of {len(low)}, |A(2.1)|={len(high_set)}, A(1.7) in A(2.1)")
    assert ok


def test_criterion_4_entropy_oracles():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        a, y = rng.integers(1, 5, size=2)
        j = rng.dirichlet(np.ones(a * y)).reshape(a, y)
        worst = max(worst, abs(conditional_entropy(JointDist(j)) - cond_entropy_by_definition(j)))
        p = rng.dirichlet(np.ones(a))
        rows = rng.dirichlet(np.ones(y), size=a)
        worst = max(worst, abs(side_entropy(Dist(p), Channel(rows))
                               - side_entropy_by_enumeration(p, rows)))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 5.0
    record(4, ok, f"100 instances, max |diff| = {worst:.1e} ({dt:.2f}s)")
    assert ok


def test_criterion_5_chromatic_exactness():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    agree = 0
    for _ in range(50):
        n = int(rng.integers(1, 9))
        density = rng.random()
        edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < density]
        chi, witness = chromatic_number(DeviationGraph.from_edges(n, edges))
        agree += chi == brute_force_chromatic(n, edges) and witness.is_proper(
            DeviationGraph.from_edges(n, edges))
    complete = all(chromatic_number(DeviationGraph.complete(n))[0] == n for n in range(1, 7))
    c5 = chromatic_number(DeviationGraph.cycle(5))[0]
    dt = time.perf_counter() - t0
    ok = agree == 50 and complete and c5 == 3 and dt < 10.0
    record(5, ok, f"{agree}/50 random graphs agree, K_1..K_6 ok={complete}, C5 chi={c5} ({dt:.2f}s)")
    assert ok


def test_criterion_6_mixture_bounds():
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    worst, flags_ok = 0.0, True
    for _ in range(10):
        j1, j2 = (rng.dirichlet(np.ones(4)).reshape(2, 2) for _ in range(2))
        fam = StateFamily.from_arrays([j1, j2])
        b = ahlswede_bounds(fam)
        got = (b.sup_H_x_given_y, b.sup_H_y_given_x, b.sup_H_xy)
        for i in range(3):
            worst = max(worst, abs(got[i] - grid_sup(lambda lam: two_state_objectives(j1, j2, lam)[i])))
        flags, overall = check_entropy_positiveness(fam)
        direct = [cond_entropy_by_definition(j) > 1e-12 and cond_entropy_by_definition(j.T) > 1e-12
                  for j in (j1, j2)]
        flags_ok &= flags == direct and overall == all(direct)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-3 and flags_ok and dt < 10.0
    record(6, ok, f"10 families, max |FW - grid| = {worst:.1e}, positiveness flags match={flags_ok} "
                  f"({dt:.2f}s)")
    assert ok


def test_criterion_7_achievability(sim_outputs):
    rows = sim_from_csv(sim_outputs["achieve"].decode())
    labels = [r.adversary for r in rows]
    worst = max(r.empirical_error for r in rows)
    ok = labels == ["none", "constant:1:T", "constant:1:B", "constant:2:L", "constant:2:R"]
    ok &= all(r.trials == 200 for r in rows) and worst <= 0.10 and sim_outputs["t_achieve"] < 300
    detail = ", ".join(f"{r.adversary}={r.empirical_error:.3f}" for r in rows)
    record(7, ok, f"{detail} ({sim_outputs['t_achieve']:.1f}s)")
    assert ok


def test_criterion_8_converse(sim_outputs):
    (row,) = sim_from_csv(sim_outputs["converse"].decode())
    ok = row.trials == 200 and row.empirical_error >= 0.40 and sim_outputs["t_converse"] < 300
    record(8, ok, f"1 color, {row.adversary}: error {row.empirical_error:.3f} "
                  f"({sim_outputs['t_converse']:.1f}s)")
    assert ok


def test_criterion_9_determinism(sim_outputs, tmp_path):
    again_a = run_cli(ACHIEVE_ARGS, tmp_path, "achieve.csv")
    again_c = run_cli(CONVERSE_ARGS, tmp_path, "converse.csv")
    ok = again_a == sim_outputs["achieve"] and again_c == sim_outputs["converse"]
    record(9, ok, "criteria 7 and 8 CSVs byte-identical on rerun")
    assert ok


def test_criterion_10_concavity():
    rng = np.random.default_rng(10)
    worst = math.inf
    for i in range(200):
        a, y = rng.integers(1, 5, size=2)
        j1 = rng.dirichlet(np.ones(a * y)).reshape(a, y)
        j2 = rng.dirichlet(np.ones(a * y)).reshape(a, y)
        lam = (0.25, 0.5, 0.75)[i % 3]
        lhs = conditional_entropy(JointDist(lam * j1 + (1 - lam) * j2))
        rhs = lam * conditional_entropy(JointDist(j1)) + (1 - lam) * conditional_entropy(JointDist(j2))
        worst = min(worst, lhs - rhs)
    ok = worst >= -1e-9
    record(10, ok, f"200 mixtures, min(CE(mix) - mix of CE) = {worst:.2e}")
    assert ok
