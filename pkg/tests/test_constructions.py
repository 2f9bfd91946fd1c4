import numpy as np
import pytest

import mixlab as mx
from mixlab.constructions import _auto_gap_threshold, example1_published_kernel
from mixlab.errors import OddDepth


@pytest.mark.parametrize("n", [5, 8, 20])
def test_example1_matches_published_table(n):
    ch = mx.example1(n)
    P, labels = example1_published_kernel(n)
    assert list(labels) == list(ch.labels)
    assert np.abs(ch.dense_kernel() - P).max() < 1e-12


def test_example1_stationary_mass_near_quarter():
    ch = mx.example1(50)
    assert ch.stationary[ch.index("z")] == pytest.approx(0.253769, abs=1e-5)


def test_example2_stationary_mass_near_two_sevenths():
    ch = mx.example2(12)
    assert ch.stationary[ch.index("z")] == pytest.approx(0.285694, abs=1e-5)


def test_example3_stationary_masses():
    ch = mx.example3(8, 10)
    assert ch.stationary[ch.index("z")] == pytest.approx(0.182206, abs=1e-5)
    assert 2 ** 8 * ch.stationary[ch.index("zp")] == pytest.approx(
        0.546619, abs=1e-5)


def test_example2_tip_mass_has_relative_precision():
    # the far tip of the quarter-speed segment carries exponentially small
    # mass; the detailed-balance solver must keep it positive and tiny
    ch = mx.example2(30)
    tip = ch.stationary[ch.index("a60")]
    assert 0 < tip < 1e-15


@pytest.mark.parametrize("builder,n", [(mx.example1, 10), (mx.example2, 8),
                                       (lambda n: mx.example3(n, 4), 6),
                                       (mx.basic_segment_chain, 10),
                                       (mx.aldous_chain, 10),
                                       (mx.ratio_two_variant, 9)])
def test_builders_give_lazy_reversible_chains(builder, n):
    ch = builder(n)
    P = ch.dense_kernel()
    assert np.diag(P).min() >= 0.5 - 1e-12
    flows = ch.stationary[:, None] * P
    assert np.abs(flows - flows.T).max() < 1e-12


def test_basic_segment_profile_frozen():
    n = 60
    ch = mx.basic_segment_chain(n)
    tv = mx.distance_curve(ch, "tv", 14 * n)
    sep = mx.distance_curve(ch, "separation", 16 * n)
    assert tv.value_at(6 * n) == pytest.approx(0.3292, abs=1e-3)
    assert tv.value_at(8 * n) == pytest.approx(0.0431, abs=1e-3)
    tmix = mx.mixing_time_from_curve(tv, 0.25).steps
    tsep = mx.mixing_time_from_curve(sep, 0.25).steps
    assert tmix == 380
    assert tsep == 761
    # separation takes twice as long as tv on this chain
    assert tsep / tmix == pytest.approx(2.0, abs=0.05)


def test_aldous_chain_profile_frozen():
    n = 40
    ch = mx.aldous_chain(n)
    tv = mx.distance_curve(ch, "tv", 14 * n)
    assert tv.value_at(8 * n) == pytest.approx(0.580807, abs=1e-4)
    assert tv.value_at(int(10.5 * n)) == pytest.approx(0.262669, abs=1e-4)
    assert tv.value_at(13 * n) == pytest.approx(0.093396, abs=1e-4)


def test_ratio_two_variant_slow_branch_mass():
    # the holding-based slow branch soaks up most of the stationary mass
    # (pi is proportional to w/(1-h)); frozen value at n=16, m=4
    ch = mx.ratio_two_variant(16)
    pi = ch.stationary
    slow = sum(pi[i] for i, lab in enumerate(ch.labels)
               if lab.startswith("s"))
    assert slow == pytest.approx(0.6614, abs=1e-3)
    roles = {lab[0] for lab in ch.labels}
    assert {"f", "s", "z"} <= roles


def test_auto_gap_threshold():
    assert _auto_gap_threshold(64) == 0.05
    assert _auto_gap_threshold(65) == 0.02
    assert _auto_gap_threshold(2048) == 0.02


@pytest.mark.parametrize("builder", [mx.example4, mx.example5])
def test_examples45_reject_odd_depth(builder):
    with pytest.raises(OddDepth):
        builder(3, 2)


def test_example4_structure():
    gc = mx.example4(2, 2, seed=7)
    assert gc.graph.degrees().max() <= 7
    assert gc.graph.is_connected()
    assert gc.expander_gap >= 0.05
    Z = gc.roles["Z"]
    for start in ("a", "b"):
        ok, dev = mx.balanced_check(gc.chain, gc.role_index(start), Z)
        assert ok and dev < 1e-9


def test_example5_structure_and_projection():
    gc = mx.example5(2, 2, seed=7)
    assert gc.graph.degrees().max() <= 7
    pm, bd, residual = mx.bd_projection(gc)
    assert residual < 1e-12
    assert bd.n_states == (gc.L + 3) * gc.n // 2 + 1
    # projected chain is birth-and-death: hitting time of the far end is
    # a log-concave convolution of geometrics
    h = mx.hitting_pmf(bd, 0, [bd.n_states - 1])
    ok, defect, unimodal = mx.log_concavity_check(h.pmf)
    assert unimodal and defect < 1e-12   # roundoff-level defect allowed


def test_example4_seeded_reproducibility():
    g1 = mx.example4(2, 2, seed=11).graph
    g2 = mx.example4(2, 2, seed=11).graph
    g3 = mx.example4(2, 2, seed=12).graph
    assert g1.to_edge_list_text() == g2.to_edge_list_text()
    assert g1.to_edge_list_text() != g3.to_edge_list_text()


def test_stretched_excision_connected_with_bound():
    sub, lower = mx.stretched_excision(mx.example4(2, 2, seed=7))
    assert sub.graph.is_connected()
    assert lower > 0
    assert sub.graph.n_vertices < mx.example4(2, 2, seed=7).graph.n_vertices
