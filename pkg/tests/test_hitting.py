import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import mixlab as mx
from mixlab.errors import NotBirthDeath, TargetMismatch
from mixlab.graphs import WeightedMultigraph
from mixlab.hitting import paths_decomposition_check
from mixlab.random_chains import named_stream


def random_bd_chain(rng, max_states=40):
    """Random lazy birth-and-death chain as a weighted path.

    Weight spread and holding are kept moderate so the hitting-time tails
    (which decay at the killed-kernel gap) stay within test-sized horizons.
    """
    n = int(rng.integers(3, max_states + 1))
    weights = np.exp(rng.uniform(-0.7, 0.7, size=n - 1))
    holding = rng.uniform(0.5, 0.6, size=n)
    labels = ["x%d" % i for i in range(n)]
    edges = [(i, i + 1, float(w), "e%d" % i) for i, w in enumerate(weights)]
    g = WeightedMultigraph(labels, edges, holding=holding)
    return g.to_chain(chain_id="bd%d" % n)


def test_hitting_pmf_is_distribution():
    ch = mx.basic_segment_chain(10)
    h = mx.hitting_pmf(ch, "a10", [ch.index("z")])
    assert h.pmf.min() >= 0
    assert abs(h.pmf.sum() + h.residual - 1.0) < 1e-9
    assert h.residual < 1e-10
    surv = h.survival()
    assert np.all(np.diff(surv) <= 1e-15)


def test_hitting_pmf_matches_absorption_oracle():
    ch = mx.basic_segment_chain(6)
    z = ch.index("z")
    h = mx.hitting_pmf(ch, "a6", [z], horizon=300)
    # direct absorption DP oracle
    P = ch.dense_kernel()
    keep = [i for i in range(ch.n_states) if i != z]
    Q = P[np.ix_(keep, keep)]
    v = np.zeros(len(keep))
    v[keep.index(ch.index("a6"))] = 1.0
    for t in range(0, 301):
        assert abs(h.survival()[t] - v.sum()) < 1e-12
        v = v @ Q


def test_convolution_commutes_and_sums():
    ch = mx.basic_segment_chain(8)
    z = [ch.index("z")]
    h1 = mx.hitting_pmf(ch, "a8", z)
    h2 = mx.hitting_pmf(ch, "b8", z)
    c12 = mx.convolve(h1, h2)
    c21 = mx.convolve(h2, h1)
    assert np.array_equal(c12.pmf, c21.pmf)
    assert abs(c12.pmf.sum() + c12.residual - 1.0) < 1e-9


def test_convolve_rejects_target_mismatch():
    ch = mx.basic_segment_chain(8)
    h1 = mx.hitting_pmf(ch, "a8", [ch.index("z")])
    h2 = mx.hitting_pmf(ch, "a8", [ch.index("b1")])
    with pytest.raises(TargetMismatch):
        mx.convolve(h1, h2)


def test_singleton_target_is_balanced():
    ch = mx.basic_segment_chain(8)
    ok, dev = mx.balanced_check(ch, "a8", [ch.index("z")])
    assert ok and dev < 1e-12


def test_stochastic_dominance_farther_start():
    ch = mx.basic_segment_chain(10)
    z = [ch.index("z")]
    far = mx.hitting_pmf(ch, "a10", z)
    near = mx.hitting_pmf(ch, "a3", z)
    ok, violation = mx.stochastic_dominance(far, near)
    assert ok, violation
    ok_rev, violation_rev = mx.stochastic_dominance(near, far)
    assert not ok_rev and violation_rev > 0.1


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_fill_representation_matches_absorption(seed):
    rng = named_stream(seed, "test-fill")
    ch = random_bd_chain(rng, max_states=20)
    rates, pmf = mx.fill_geometric_representation(ch)
    assert np.all(rates > 0) and np.all(rates <= 1)
    h = mx.hitting_pmf(ch, 0, [ch.n_states - 1],
                       horizon=len(pmf) - 1, residual_threshold=0)
    m = min(len(pmf), len(h.pmf))
    assert np.abs(pmf[:m] - h.pmf[:m]).max() < 1e-8


def test_fill_rejects_non_bd():
    ch = mx.example1(4)  # has long z-b edges off the tridiagonal band
    with pytest.raises(NotBirthDeath):
        mx.fill_geometric_representation(ch)


def test_fill_pmf_log_concave():
    rng = named_stream(5, "test-fill-lc")
    ch = random_bd_chain(rng, max_states=15)
    _, pmf = mx.fill_geometric_representation(ch)
    ok, defect, unimodal = mx.log_concavity_check(pmf)
    assert unimodal and defect < 1e-12   # roundoff-level defect allowed


def test_log_concavity_detects_violation():
    ok, defect, _ = mx.log_concavity_check([0.3, 0.05, 0.3])
    assert not ok and defect > 0


def test_tail_quantile_and_mode():
    ch = mx.basic_segment_chain(10)
    h = mx.hitting_pmf(ch, "a10", [ch.index("z")])
    tau = mx.tail_quantile(h, 0.5)
    surv = h.survival()
    assert surv[tau] <= 0.5
    assert tau == 0 or surv[tau - 1] > 0.5
    mode, mean, sd = mx.mode_and_spread(h.pmf)
    assert 0 <= mode < len(h.pmf)
    assert sd > 0
    assert abs(mean - h.mean()) < 1e-9


def test_paths_decomposition_segment():
    ch = mx.basic_segment_chain(12)
    rep = paths_decomposition_check(ch, "a12", "b12", [ch.index("z")],
                                    t_grid=[40, 120, 250])
    assert rep["separated"]
    assert rep["min_lower_slack"] >= -1e-12
    assert rep["max_identity_violation"] < 1e-9
    assert rep["max_upper_violation"] < 1e-9
