"""Acceptance gate: ten end-to-end criteria, one printed pass/fail line each.

Each test computes its checks, prints a single summary line, and asserts
that every check holds.  Tolerances and sizes are fixed; nothing here is
tuned to make a failing check pass.
"""

import time

import numpy as np

import mixlab as mx
from mixlab.analysis import suite_passed
from mixlab.constructions import example1_published_kernel
from mixlab.graphs import WeightedMultigraph
from mixlab.random_chains import named_stream


def _report(num, budget_s, elapsed, checks):
    failing = [(name, detail) for name, ok, detail in checks if not ok]
    if elapsed > budget_s:
        failing.append(("runtime", "%.1fs > budget %.0fs" % (elapsed, budget_s)))
    if failing:
        print("criterion %d: FAIL — %s" % (
            num, "; ".join("%s (%s)" % f for f in failing)))
    else:
        print("criterion %d: PASS (%.1fs)" % (num, elapsed))
    assert not failing, failing


def test_criterion_01_construction_fidelity():
    t0 = time.monotonic()
    checks = []
    for n in (5, 20, 100):
        ch = mx.example1(n)
        P, labels = example1_published_kernel(n)
        dev = np.abs(ch.dense_kernel() - P).max()
        checks.append(("table n=%d" % n, dev < 1e-12, "dev %.2e" % dev))
    _report(1, 1.0, time.monotonic() - t0, checks)


def test_criterion_02_stationary_mass_limits():
    t0 = time.monotonic()
    checks = []
    c1 = mx.example1(200)
    d1 = abs(c1.stationary[c1.index("z")] - 0.25)
    checks.append(("ex1 pi(z) -> 1/4", d1 <= 0.02, "%.4f" % d1))
    c2 = mx.example2(200)
    d2 = abs(c2.stationary[c2.index("z")] - 2.0 / 7.0)
    checks.append(("ex2 pi(z) -> 2/7", d2 <= 0.02, "%.4f" % d2))
    c3 = mx.example3(12, 10)
    d3 = abs(c3.stationary[c3.index("z")] - 2.0 / 11.0)
    d3p = abs(2 ** 12 * c3.stationary[c3.index("zp")] - 6.0 / 11.0)
    checks.append(("ex3 pi(z) -> 2/11", d3 <= 0.02, "%.4f" % d3))
    checks.append(("ex3 2^n pi(zp) -> 6/11", d3p <= 0.02, "%.4f" % d3p))
    _report(2, 10.0, time.monotonic() - t0, checks)


def test_criterion_03_universal_inequality_suite():
    t0 = time.monotonic()
    rows = mx.run_verification_suite(seed=1, n_chains=200, horizon=200,
                                     tol=1e-9)
    bad = [r for r in rows if not r["pass"]]
    checks = [("zero violations over %d checks" % len(rows),
               suite_passed(rows), "%d failing" % len(bad))]
    _report(3, 300.0, time.monotonic() - t0, checks)


def test_criterion_04_fill_representation_oracle():
    t0 = time.monotonic()
    rng = named_stream(1, "acceptance-fill")
    worst = 0.0
    for i in range(200):
        n = int(rng.integers(3, 41))
        weights = np.exp(rng.uniform(-0.7, 0.7, size=n - 1))
        holding = rng.uniform(0.5, 0.6, size=n)
        edges = [(j, j + 1, float(w), "e%d" % j)
                 for j, w in enumerate(weights)]
        g = WeightedMultigraph(["x%d" % j for j in range(n)], edges,
                               holding=holding)
        ch = g.to_chain(chain_id="bd%d" % i)
        rates, pmf = mx.fill_geometric_representation(ch)
        h = mx.hitting_pmf(ch, 0, [n - 1], horizon=len(pmf) - 1,
                           residual_threshold=0)
        m = min(len(pmf), len(h.pmf))  # both tails beyond m are < 1e-10
        worst = max(worst, float(np.abs(pmf[:m] - h.pmf[:m]).max()))
    checks = [("geometric conv = absorption pmf", worst < 1e-8,
               "max dev %.2e" % worst)]
    _report(4, 120.0, time.monotonic() - t0, checks)


def test_criterion_05_example1_separation_staircase():
    t0 = time.monotonic()
    n = 150
    ch = mx.example1(n)
    curve = mx.distance_curve(ch, "separation", 13 * n)
    checks = []
    for s in (7, 8, 9, 10, 11):
        got = curve.value_at(int(s * n))
        want = np.exp(-(s - 6) / 2.0)
        checks.append(("s=%d" % s, abs(got - want) <= 0.07,
                       "%.3f vs %.3f" % (got, want)))
    lo = curve.value_at(5 * n)
    hi = curve.value_at(13 * n)
    checks.append(("d_sep(5n) >= 0.93", lo >= 0.93, "%.3f" % lo))
    checks.append(("d_sep(13n) <= 0.07", hi <= 0.07, "%.3f" % hi))
    _report(5, 600.0, time.monotonic() - t0, checks)


def test_criterion_06_example2_profiles():
    t0 = time.monotonic()
    n = 60
    ch = mx.example2(n)
    tv = mx.distance_curve(ch, "tv", 26 * n)
    sep = mx.distance_curve(ch, "separation", 45 * n)
    h = mx.hitting_pmf(ch, "b%d" % (2 * n), [ch.index("z")],
                       horizon=27 * n)
    surv = h.survival()
    checks = [
        ("d(22n) >= 0.85", tv.value_at(22 * n) >= 0.85,
         "%.3f" % tv.value_at(22 * n)),
        ("d(26n) <= 0.15", tv.value_at(26 * n) <= 0.15,
         "%.3f" % tv.value_at(26 * n)),
        ("|d_sep(45n) - 1/2| <= 0.1",
         abs(sep.value_at(45 * n) - 0.5) <= 0.1,
         "%.3f" % sep.value_at(45 * n)),
    ]
    for s, want in ((16, 1.0), (21, 0.5), (26, 0.0)):
        got = surv[s * n - 1]  # Pr[T >= sn]
        checks.append(("hit staircase s=%d" % s, abs(got - want) <= 0.1,
                       "%.3f vs %.1f" % (got, want)))
    _report(6, 900.0, time.monotonic() - t0, checks)


def test_criterion_07_rate_function():
    t0 = time.monotonic()
    checks = [("psi(6) = 0", abs(mx.psi(6.0)) < 1e-10,
               "%.2e" % abs(mx.psi(6.0)))]
    first, second = mx.psi_derivatives_at_6()
    checks.append(("psi'(6) ~ 0", abs(first) < 1e-5, "%.2e" % first))
    checks.append(("psi''(6) > 0", second > 0, "%.2e" % second))
    dlog3 = abs(mx.psi(1.0) - np.log(3.0))
    checks.append(("psi(1) = log 3", dlog3 < 1e-8, "%.2e" % dlog3))
    for s in (3.0, 4.5, 9.0):
        diff = abs(mx.empirical_rate(400, s) - mx.psi(s))
        checks.append(("empirical rate s=%.1f" % s, diff < 0.05,
                       "diff %.4f" % diff))
    _report(7, 60.0, time.monotonic() - t0, checks)


def test_criterion_08_example3_separation_transition():
    t0 = time.monotonic()
    n, M = 10, 10
    _, s_M = mx.solve_sM(M)
    ch = mx.example3(n, M)
    horizon = int((s_M + 2) * n) + 1
    sep = mx.distance_curve(ch, "separation", horizon)
    lo = sep.value_at(int((s_M - 1) * n))
    hi = sep.value_at(int((s_M + 2) * n))
    tv = mx.distance_curve(ch, "tv", 12 * M * n)
    window = [tv.value_at(t)
              for t in range(int((M + 1) * 6 * n) + 1, int((M + 2) * 6 * n))]
    mid_gap = min(abs(v - 0.5) for v in window)
    checks = [
        ("d_sep((s_M-1)n) >= 0.9", lo >= 0.9, "%.3f" % lo),
        ("d_sep((s_M+2)n) <= 0.2", hi <= 0.2, "%.3f" % hi),
        ("tv middle plateau within 0.12 of 1/2", mid_gap <= 0.12,
         "min gap %.3f" % mid_gap),
    ]
    _report(8, 1800.0, time.monotonic() - t0, checks)


def test_criterion_09_examples45_structure():
    t0 = time.monotonic()
    checks = []
    for n in (2, 4):
        gc4 = mx.example4(n, 2, seed=7)
        gc5 = mx.example5(n, 2, seed=7)
        deg = max(gc4.graph.degrees().max(), gc5.graph.degrees().max())
        checks.append(("max degree n=%d" % n, deg <= 7, "deg %d" % deg))
        for gc, zname in ((gc4, "Z"), (gc5, "Zp")):
            for start in ("a", "b"):
                ok, dev = mx.balanced_check(gc.chain, gc.role_index(start),
                                            gc.roles[zname])
                checks.append(("balanced %s from %s n=%d"
                               % (zname, start, n), dev < 1e-9,
                               "dev %.2e" % dev))
        _, bd, residual = mx.bd_projection(gc5)
        checks.append(("lumping residual n=%d" % n, residual < 1e-12,
                       "%.2e" % residual))
        h = mx.hitting_pmf(bd, 0, [bd.n_states - 1])
        conv = mx.convolve(h, h)
        ok, defect, _ = mx.log_concavity_check(conv.pmf)
        checks.append(("projected conv log-concave n=%d" % n,
                       defect <= 1e-12, "defect %.2e" % defect))
        rebuilt = mx.example4(n, 2, seed=7)
        checks.append(("seeded reproducibility n=%d" % n,
                       gc4.graph.to_edge_list_text()
                       == rebuilt.graph.to_edge_list_text(), "bytes differ"))
    _report(9, 600.0, time.monotonic() - t0, checks)


def test_criterion_10_precutoff_ratio_trends():
    t0 = time.monotonic()
    n = 150
    ch = mx.example1(n)
    sep = mx.distance_curve(ch, "separation", 16 * n)
    r_sep = (mx.mixing_time_from_curve(sep, 0.1).steps
             / mx.mixing_time_from_curve(sep, 0.9).steps)
    m = 200
    cb = mx.basic_segment_chain(m)
    tv = mx.distance_curve(cb, "tv", 14 * m)
    r_tv = (mx.mixing_time_from_curve(tv, 0.1).steps
            / mx.mixing_time_from_curve(tv, 0.9).steps)
    checks = [
        ("ex1 separation ratio in [1.8, 2.2]", 1.8 <= r_sep <= 2.2,
         "%.3f" % r_sep),
        ("basic tv ratio in [1.0, 1.15]", 1.0 <= r_tv <= 1.15,
         "%.3f" % r_tv),
    ]
    _report(10, 1200.0, time.monotonic() - t0, checks)
