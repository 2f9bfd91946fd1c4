"""Large-deviation rate function for the lazy biased walk on the half line.

The walk steps +1 with probability 1/3, -1 with probability 1/6 and holds
with probability 1/2 (reflecting at 0).  phi is the moment generating
function of the passage time over one level; the Legendre transform Psi
governs Pr[T_N = floor(sN)] ~ exp(-N Psi(s)).
"""

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NoRoot, UnderflowGuard

LAMBDA_STAR = float(np.log(6.0 / (3.0 + 2.0 * np.sqrt(2.0))))
LAMBDA_LO = -40.0


def phi(lam):
    """One-level passage-time transform; +inf (returned as np.inf) past the
    domain boundary log(6/(3+2*sqrt(2)))."""
    if lam > LAMBDA_STAR:
        return np.inf
    u = 6.0 * np.exp(-lam) - 3.0
    disc = u * u - 8.0
    if disc < 0:
        disc = 0.0  # roundoff exactly at the boundary
    # rationalized form of (u - sqrt(u^2 - 8))/2: stable when u is huge
    return 4.0 / (u + np.sqrt(disc))


def _objective(lam, s):
    value = phi(lam)
    if not np.isfinite(value) or value <= 0:
        return -np.inf
    return lam * s - np.log(value)


def psi(s):
    """Legendre transform sup_lambda [lambda s - log phi(lambda)].

    The objective is smooth and concave on (-inf, lambda*]; the supremum is
    found by bounded scalar maximization on [LAMBDA_LO, lambda*] and
    compared against the endpoint value at lambda*.
    """
    if s < 1:
        raise ValueError("s >= 1 (the walk needs at least s steps per level)")
    res = minimize_scalar(lambda lam: -_objective(lam, s),
                          bounds=(LAMBDA_LO, LAMBDA_STAR), method="bounded",
                          options={"xatol": 1e-11})
    best = -res.fun
    best = max(best, _objective(LAMBDA_STAR, s))
    if s == 1:
        # analytic endpoint: as lambda -> -inf, phi ~ e^lambda / 3
        best = max(best, np.log(3.0))
    return float(best)


def psi_grid(s):
    """Dense-grid fallback evaluation of psi (cross-check oracle)."""
    lams = np.linspace(LAMBDA_LO, LAMBDA_STAR, 200001)
    vals = np.array([_objective(l, s) for l in lams])
    return float(vals.max())


def psi_derivatives_at_6(h=1e-3):
    """Central finite differences of psi at s = 6."""
    f = {k: psi(6.0 + k * h) for k in (-1, 0, 1)}
    first = (f[1] - f[-1]) / (2 * h)
    second = (f[1] - 2 * f[0] + f[-1]) / (h * h)
    return float(first), float(second)


def solve_sM(M):
    """Solve 2 M Psi(s) = log 2 on the decreasing branch s in (1, 6).

    Returns (s_star, s_M) with s_M = 2 M s_star.
    """
    if M < 2:
        raise ValueError("M >= 2")
    target = np.log(2.0) / (2.0 * M)
    lo, hi = 1.0 + 1e-9, 6.0
    flo, fhi = psi(lo) - target, psi(hi) - target
    if flo < 0 or fhi > 0:
        raise NoRoot("bracket [1, 6] does not straddle log2/(2M)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = psi(mid) - target
        if fmid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    s_star = 0.5 * (lo + hi)
    return s_star, 2.0 * M * s_star


def passage_pmf(N, horizon, log_space=None):
    """pmf of the first passage time to level N, t = 0..horizon.

    Absorption dynamic program on {0..N}; switches to log-space arithmetic
    when N > 600 (or when forced) since the pmf scales like exp(-N Psi).
    """
    if log_space is None:
        log_space = N > 600
    p_up, p_down, p_hold = 1.0 / 3.0, 1.0 / 6.0, 1.0 / 2.0
    if N < 2:
        raise ValueError("N >= 2")
    if not log_space:
        v = np.zeros(N)  # transient states 0..N-1
        v[0] = 1.0
        pmf = np.zeros(horizon + 1)
        for t in range(1, horizon + 1):
            nxt = np.empty_like(v)
            nxt[0] = v[0] * (p_hold + p_down) + v[1] * p_down
            nxt[1:-1] = v[:-2] * p_up + v[1:-1] * p_hold + v[2:] * p_down
            nxt[-1] = v[-2] * p_up + v[-1] * p_hold
            pmf[t] = v[-1] * p_up
            v = nxt
        return pmf
    # log-space: each state receives at most three flows
    from scipy.special import logsumexp

    NEG = -np.inf
    lv = np.full(N, NEG)
    lv[0] = 0.0
    lpmf = np.full(horizon + 1, NEG)
    lu, ld, lh = np.log(p_up), np.log(p_down), np.log(p_hold)
    lhd = np.log(p_hold + p_down)  # state 0 cannot step down
    for t in range(1, horizon + 1):
        up_flow = np.concatenate(([lv[0] + lhd], lv[:-1] + lu))
        hold_flow = lv + lh
        hold_flow[0] = NEG  # folded into lhd above
        down_flow = np.concatenate((lv[1:] + ld, [NEG]))
        with np.errstate(divide="ignore"):
            nxt = logsumexp(np.stack([up_flow, hold_flow, down_flow]), axis=0)
        lpmf[t] = lv[-1] + lu
        lv = nxt
    return lpmf


def empirical_rate(N, s, log_space=None):
    """-(1/N) log Pr[T_N = floor(sN)] from the absorption oracle."""
    t = int(np.floor(s * N))
    mode_log = log_space if log_space is not None else N > 600
    pmf = passage_pmf(N, t, log_space=mode_log)
    val = pmf[t]
    if mode_log:
        logp = val
    else:
        if val <= 0:
            raise UnderflowGuard("zero pmf at t=%d" % t)
        logp = np.log(val)
    return float(-logp / N)
