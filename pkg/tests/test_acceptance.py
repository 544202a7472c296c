"""Acceptance criteria, one test per criterion.

Each test appends a ``ACCEPTANCE k: PASS|FAIL ...`` line to the session log
(printed in the terminal summary) before asserting, so the summary shows
every criterion even when one fails.
"""

import csv
import io
import math
import time

import numpy as np
import pytest

from gavc.channel import ScalarAvcSpec
from gavc.cli import run
from gavc.dpc_opt import dpc_gamma_threshold
from gavc.mimo import (
    JamDirection,
    MimoSpec,
    full_rank_rate,
    maxmin_rate_221,
    maxmin_solver_general,
    mimo_rate,
    optimal_jam_index,
    upper_bound_rate,
    waterfill,
    worst_g_oracle,
)
from gavc.rates import (
    BroadcastSpec,
    DpcParams,
    DpcSpec,
    alpha0,
    broadcast_region,
    deterministic_capacity,
    dpc_outer_bound,
    dpc_rate,
    key_size_schedule,
    randomized_capacity,
    watermark_covertext_power,
)
from gavc.sim import (
    DpcEncoderConfig,
    GaussianNoise,
    SphereUniform,
    SymmetrizeCodeword,
    bin_rate_threshold,
    build_code,
    build_dpc_code,
    build_superposition_code,
    encoder_failure_trials,
    is_nonincreasing,
    key_size_sweep,
    run_broadcast_trials,
    run_trials,
    superposition_encode,
)
from gavc.sim.jammers import FixedVector
from oracles import grid_maxmin_221

L2 = math.log2


def record(log, k, ok, detail):
    log.append(f"ACCEPTANCE {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(log[-1])
    return ok


def rel_err(got, want):
    return abs(got - want) / max(abs(want), 1e-300) if want != 0 else abs(got)


def test_criterion_1_formula_suite(acceptance_log):
    dpc = DpcSpec(4, 5, 1, 2)
    dpc_low = DpcSpec(4, 1, 1, 2)
    cases = [
        ("C_r(1,0,1)", randomized_capacity(ScalarAvcSpec(1, 0, 1)), 0.5),
        ("C_r(6,1,0.1)", randomized_capacity(ScalarAvcSpec(6, 1, 0.1)), 0.5 * L2(1 + 6 / 1.1)),
        ("C_d(2,1,1)", deterministic_capacity(ScalarAvcSpec(2, 1, 1)), 0.5),
        ("C_d(1,2,1)", deterministic_capacity(ScalarAvcSpec(1, 2, 1)), 0.0),
        ("C_d(1,1,1)", deterministic_capacity(ScalarAvcSpec(1, 1, 1)), 0.0),
        ("dpc(0,0)", dpc_rate(dpc_low, DpcParams.of(dpc_low, 0, 0)), 0.5 * L2(1 + 4 / 4)),
        ("dpc(a0,0)", dpc_rate(dpc, DpcParams.of(dpc, alpha0(dpc), 0)), 0.5 * L2(5 / 3)),
        ("outer", dpc_outer_bound(dpc), 0.5 * L2(5 / 3)),
        ("outer_sym", dpc_outer_bound(DpcSpec(1, 2, 1, 0)), 0.0),
        ("watermark(1,1)", watermark_covertext_power(1, 1).sigma_t2, 0.0),
        ("full(0)", full_rank_rate(MimoSpec((1, 3), 4, 0)), 0.5 * L2(4) + 0.5 * L2(4 / 3)),
        ("full(2)", full_rank_rate(MimoSpec((1, 3), 4, 2)), L2(5 / 3)),
        ("full(4)", full_rank_rate(MimoSpec((1, 3), 4, 4)), L2(1.5)),
        ("upper(0)", upper_bound_rate(MimoSpec((1, 3), 4, 0)), 0.5 * L2(4) + 0.5 * L2(4 / 3)),
        ("upper(2)", upper_bound_rate(MimoSpec((1, 3), 4, 2)), L2(5 / 3)),
        ("upper(4)", upper_bound_rate(MimoSpec((1, 3), 4, 4)), 0.5 * L2(2.4)),
    ]
    for noise, budget, powers in [((1, 1), 2, (1, 1)), ((1, 3), 4, (3, 1)), ((1, 3), 1, (1, 0))]:
        got = waterfill(noise, budget).powers
        cases += [(f"wf{noise},{budget}[{i}]", got[i], powers[i]) for i in range(len(powers))]
    worst = max(cases, key=lambda c: rel_err(c[1], c[2]))
    worst_err = rel_err(worst[1], worst[2])
    ok = all((abs(g) <= 1e-15) if w == 0 else rel_err(g, w) <= 1e-9 for _, g, w in cases)
    record(acceptance_log, 1, ok, f"{len(cases)} values, worst {worst[0]} rel err {worst_err:.1e}")
    assert ok


def test_criterion_2_elementary_directions_are_worst(acceptance_log):
    gen = np.random.default_rng(2024)
    t0 = time.time()
    rate_fail = index_fail = 0
    max_gap = 0.0
    count = 0
    for m in (2, 3, 4):
        for _ in range(334 if m < 4 else 332):
            nu = gen.uniform(0.1, 5, m)
            gamma = gen.uniform(0.5, 10)
            p = gen.dirichlet(np.ones(m)) * gamma
            spec = MimoSpec(nu, gamma, gen.uniform(0.05, 10))
            res = worst_g_oracle(spec, np.diag(p), seed=count)
            elem = np.array([mimo_rate(spec, np.diag(p), e, check=False) for e in np.eye(m)])
            k = optimal_jam_index(p, nu, spec.lambda_)
            gap = abs(res.rate - elem.min())
            max_gap = max(max_gap, gap)
            rate_fail += gap > 1e-8
            # the oracle direction must sit on the axis optimal_jam_index names, unless two axes tie
            oracle_axis = int(np.argmax(np.abs(res.direction.g)))
            tie = np.sort(elem)[1] - elem.min() <= 1e-8
            index_fail += oracle_axis != k and not tie
            count += 1
    elapsed = time.time() - t0
    ok = rate_fail == 0 and index_fail == 0 and count >= 1000
    record(
        acceptance_log, 2, ok,
        f"{count} instances, rate mismatches {rate_fail}, index mismatches {index_fail}, "
        f"max gap {max_gap:.1e}, {elapsed:.0f}s",
    )
    assert ok


def test_criterion_3_221_closed_form(acceptance_log):
    t0 = time.time()
    worst = 0.0
    values = {}
    for lam in (0.5, 2, 4, 10):
        spec = MimoSpec((1, 3), 4, lam)
        closed = maxmin_rate_221(spec).rate
        solver = maxmin_solver_general(spec, tol=1e-7).rate
        grid = grid_maxmin_221((1, 3), 4, lam)
        worst = max(worst, abs(closed - solver), abs(closed - grid), abs(solver - grid))
        values[lam] = closed
    wfill = full_rank_rate(MimoSpec((1, 3), 4, 4))
    ok = worst <= 1e-4 and abs(values[4] - 0.632) < 1e-3 and values[4] > wfill and abs(wfill - 0.585) < 1e-3
    record(
        acceptance_log, 3, ok,
        f"max disagreement {worst:.1e} bits; lambda=4: {values[4]:.4f} > R_wfill {wfill:.4f}; {time.time() - t0:.0f}s",
    )
    assert ok


def _figure(capsys, *argv):
    assert run(["figure", *argv]) == 0
    return list(csv.DictReader(io.StringIO(capsys.readouterr().out)))


def test_criterion_4_figure_shapes(acceptance_log, capsys):
    problems = []
    # mimo221: equal up to lambda = nu2 - nu1 = 2, separate after
    for r in _figure(capsys, "mimo221"):
        lam, a, b = float(r["lambda"]), float(r["maxmin_rate_bits"]), float(r["r_wfill_bits"])
        if (lam <= 2 and abs(a - b) > 1e-9) or (lam > 2 and not a > b):
            problems.append(f"mimo221 lambda={lam}")
    # dpc: dotted curve zero below gamma = 5; dirty-paper curve positive from the threshold
    gstar = dpc_gamma_threshold(5, 2, 1)
    if abs(gstar - 3.71) > 0.01:
        problems.append(f"gamma* {gstar}")
    dpc_rows = _figure(capsys, "dpc")
    for r in dpc_rows:
        g = float(r["gamma"])
        if (float(r["avc_no_interference_bits"]) > 0) != (g > 5):
            problems.append(f"dotted curve at {g}")
        if (float(r["costa_rate_bits"]) > 0) != (g > gstar):
            problems.append(f"dpc curve at {g}")
    first_pos = min(float(r["gamma"]) for r in dpc_rows if float(r["costa_rate_bits"]) > 0)
    # dbc: strong-user rate decreasing in alpha, empty region when lambda >= gamma
    dbc = [r for r in _figure(capsys, "dbc") if r["kind"] == "superposition"]
    r1 = np.array([float(r["r1_bits"]) for r in dbc])
    if not np.all(np.diff(r1) < 0):
        problems.append("dbc not monotone")
    if _figure(capsys, "dbc", "--gamma", "1", "--lambda", "1"):
        problems.append("dbc not empty at lambda = gamma")
    ok = not problems
    record(
        acceptance_log, 4, ok,
        f"gamma*={gstar:.4f}, first positive dpc grid point {first_pos:.2f}, {len(dbc)} dbc points"
        + (f"; problems: {problems[:5]}" if problems else ""),
    )
    assert ok


def test_criterion_5_monte_carlo(acceptance_log):
    t0 = time.time()
    spec = ScalarAvcSpec(1.0, 1.0, 6.25)
    rate = 0.5 * randomized_capacity(spec)
    n = 256
    k = key_size_schedule(n, "nlogn")
    codebook, keys = build_code(n, rate, spec.gamma, k, 1)
    uppers = {}
    jammers = {
        "gaussian": GaussianNoise(1.0),
        "sphere": SphereUniform(1.0),
        "fixed": FixedVector.toward_codeword(codebook, 1.0, 0),
    }
    for name, jam in jammers.items():
        rep = run_trials(codebook, keys, spec, jam, 10_000, 1)
        uppers[name] = rep.max_message.upper
    ok_a = all(u < 0.05 for u in uppers.values())

    det_code, det_keys = build_code(64, rate, spec.gamma, 1, 2)
    sym = run_trials(det_code, det_keys, spec, SymmetrizeCodeword(1.0), 10_000, 3, messages="uniform").average
    ok_b = sym.rate_hat >= 0.25

    rows = key_size_sweep(spec, 0.5, [64, 128, 256], "n", SphereUniform(1.0), 10_000, 4, messages="uniform")
    trend = [r.report.average for r in rows]
    ok_c = is_nonincreasing(trend)

    ok = ok_a and ok_b and ok_c
    record(
        acceptance_log, 5, ok,
        f"(a) K={k} N={codebook.big_n} max-message CI upper "
        + ", ".join(f"{j}={u:.3f}" for j, u in uppers.items())
        + f"; (b) K=1 symmetrized error {sym.rate_hat:.3f}"
        + f"; (c) n=64/128/256 errors " + "/".join(f"{e.rate_hat:.4f}" for e in trend)
        + f"; {time.time() - t0:.0f}s",
    )
    assert ok


def test_criterion_6_dpc_encoder_threshold(acceptance_log):
    spec = DpcSpec(4.0, 5.0, 1.0, 12.0)
    a = alpha0(spec)
    th = bin_rate_threshold(spec, a, 0.0)
    success = {}
    for off in (0.25, -0.25):
        cfg = DpcEncoderConfig(20, th + off, th + off + 0.25, a, 0.0, spec)
        success[off] = 1 - encoder_failure_trials(build_dpc_code(cfg, 0), 500, 0).rate_hat
    ok = success[0.25] >= 0.9 and success[0.25] - success[-0.25] >= 0.2
    record(
        acceptance_log, 6, ok,
        f"threshold {th:.4f} bits; success above {success[0.25]:.3f}, below {success[-0.25]:.3f}",
    )
    assert ok


def test_criterion_7_superposition(acceptance_log):
    t0 = time.time()
    code = build_superposition_code(64, 8, 8, 0.5, 6.0, 5)
    ortho = power = 0.0
    for i in range(8):
        u = code.cloud[i]
        for j in range(8):
            d = superposition_encode(code, i, j) - u
            ortho = max(ortho, abs(d @ u) / (np.linalg.norm(d) * np.linalg.norm(u)))
            power = max(power, abs(d @ d / (63 * 0.5 * 6.0) - 1))
    ok_inv = ortho <= 1e-9 and power <= 1e-9

    spec = BroadcastSpec(6.0, 1.0, 0.1, 5.0)
    alpha = 0.5
    (p,) = broadcast_region(spec, [alpha]).curve
    rep = run_broadcast_trials(spec, alpha, 0.8 * p.r1, 0.8 * p.r2, 256, SphereUniform(1.0), 1000, 7)
    ok_mc = rep.strong.rate_hat < 0.1 and rep.weak.rate_hat < 0.1
    ok = ok_inv and ok_mc
    record(
        acceptance_log, 7, ok,
        f"orthogonality {ortho:.1e}, power {power:.1e}; {rep.mode} estimator, "
        f"strong {rep.strong.rate_hat:.2e} (CI up {rep.strong.upper:.2e}), "
        f"weak {rep.weak.rate_hat:.3f} (CI up {rep.weak.upper:.3f}); {time.time() - t0:.0f}s",
    )
    assert ok


def test_criterion_8_jam_index_regression(acceptance_log):
    spec = MimoSpec((3, 1), 6, 4)
    sx = np.diag([4.0, 2.0])
    by_condition = optimal_jam_index([4, 2], spec.nu, spec.lambda_)
    oracle = worst_g_oracle(spec, sx)
    by_oracle = int(np.argmax(np.abs(oracle.direction.g)))
    rates = [mimo_rate(spec, sx, e) for e in np.eye(2)]
    # the prose of the source names the first channel; both internal methods give the second
    divergence_documented = by_condition != 0
    ok = by_condition == by_oracle == 1 and oracle.direction.angle_to(JamDirection([0, 1])) < 1e-6
    record(
        acceptance_log, 8, ok,
        f"condition index {by_condition + 1}, oracle index {by_oracle + 1} (1-based); "
        f"rates e1={rates[0]:.4f}, e2={rates[1]:.4f}; differs from prose claim: {divergence_documented}",
    )
    assert by_condition == by_oracle, "internal methods disagree"
    assert ok
