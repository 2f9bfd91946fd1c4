import numpy as np
import pytest

import mixlab as mx
from mixlab.errors import NoRoot
from mixlab.large_deviation import (LAMBDA_STAR, passage_pmf, phi, psi_grid)


def test_phi_basic_values():
    assert phi(0.0) == pytest.approx(1.0, abs=1e-14)   # mgf normalization
    assert phi(LAMBDA_STAR + 1e-9) == np.inf
    # boundary value: u = 2 sqrt(2), phi = sqrt(2)
    assert phi(LAMBDA_STAR) == pytest.approx(np.sqrt(2.0), rel=1e-9)


def test_phi_stable_for_very_negative_lambda():
    # phi ~ e^lambda / 3 as lambda -> -inf; the rationalized form keeps
    # relative precision where the naive difference cancels to zero
    lam = -30.0
    assert phi(lam) == pytest.approx(np.exp(lam) / 3.0, rel=1e-9)


def test_psi_zero_at_six():
    assert abs(mx.psi(6.0)) < 1e-10


def test_psi_endpoint_log3():
    assert mx.psi(1.0) == pytest.approx(np.log(3.0), abs=1e-8)


def test_psi_rejects_sub_unit_speed():
    with pytest.raises(ValueError):
        mx.psi(0.9)


def test_psi_derivatives_at_six():
    first, second = mx.psi_derivatives_at_6()
    assert abs(first) < 1e-5
    assert second > 0


def test_psi_matches_grid_oracle():
    for s in (1.5, 3.0, 4.5, 6.0, 9.0, 20.0):
        # the dense grid undershoots the true sup by O(spacing^2)
        assert mx.psi(s) >= psi_grid(s) - 1e-12
        assert mx.psi(s) == pytest.approx(psi_grid(s), abs=5e-6)


def test_psi_convex_on_samples():
    ss = np.linspace(1.2, 15.0, 40)
    vals = np.array([mx.psi(s) for s in ss])
    second = vals[:-2] - 2 * vals[1:-1] + vals[2:]
    assert second.min() > -1e-8


def test_solve_sM_frozen():
    s_star, s_M = mx.solve_sM(10)
    assert s_star == pytest.approx(3.875449, abs=1e-5)
    assert s_M == pytest.approx(77.508986, abs=1e-4)
    assert abs(2 * 10 * mx.psi(s_star) - np.log(2.0)) < 1e-8


def test_solve_sM_rejects_small_M():
    with pytest.raises((ValueError, NoRoot)):
        mx.solve_sM(1)


def test_passage_pmf_is_distribution():
    pmf = passage_pmf(10, 400)
    assert pmf.min() >= 0
    assert pmf[:10].sum() == 0          # needs at least N steps
    assert pmf.sum() == pytest.approx(1.0, abs=1e-6)


def test_passage_pmf_log_space_agrees():
    lin = passage_pmf(12, 300)
    log = passage_pmf(12, 300, log_space=True)
    mask = lin > 0
    assert np.abs(np.exp(log[mask]) / lin[mask] - 1.0).max() < 1e-10


def test_empirical_rate_tracks_psi():
    for s in (3.0, 4.5, 9.0):
        emp = mx.empirical_rate(200, s)
        assert abs(emp - mx.psi(s)) < 0.08   # prefactor shrinks like log N / N
