"""Cutoff detection, hitting-vs-mixing reductions, and inequality verifiers.

Every verifier returns a machine-readable slack (positive = inequality holds
with room); the suite fails iff any slack dips below -tolerance.  Asymptotic
statements are reported as finite-n trends with explicit thresholds and never
as certified limits.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from .chain import (
    distance_curve,
    default_horizon,
    evolve,
    mixing_time_from_curve,
    point_mass,
    tv_distance,
)
from .errors import HorizonExceeded, PreconditionFailed
from .hitting import (
    balanced_check,
    convolve,
    hitting_pmf,
    log_concavity_check,
    mode_and_spread,
    tail_quantile,
    _paths_all_meet_Z,
)
from .serialize import fmt17
from .spectral import cheeger_exact, eigen_summary


# ---------------------------------------------------------------------------
# cutoff sweeps
# ---------------------------------------------------------------------------

EPS_GRID = (0.05, 0.1, 0.25, 0.4, 0.45)


@dataclass
class CutoffReport:
    metric: str
    n_grid: tuple
    eps_grid: tuple
    mixing_times: dict          # n -> {eps: MixingTime}
    ratios: dict                # n -> {eps: t(eps)/t(1-eps)}
    windows: dict               # n -> {eps: t(eps) - t(1-eps)}
    verdict: str
    thresholds: str = ("cutoff-trend: max-eps ratio non-increasing within 2% "
                       "and final ratio <= 1.25; no-cutoff-trend: final ratio "
                       ">= 1.3 and not shrinking; else inconclusive")

    def max_ratio_by_n(self):
        return [max(self.ratios[n].values()) for n in self.n_grid]

    def to_json_obj(self):
        return {
            "metric": self.metric,
            "n_grid": list(self.n_grid),
            "eps_grid": list(self.eps_grid),
            "mixing_times": {str(n): {str(e): mt.steps for e, mt in d.items()}
                             for n, d in self.mixing_times.items()},
            "ratios": {str(n): {str(e): r for e, r in d.items()}
                       for n, d in self.ratios.items()},
            "windows": {str(n): {str(e): w for e, w in d.items()}
                        for n, d in self.windows.items()},
            "verdict": self.verdict,
            "thresholds": self.thresholds,
        }


def cutoff_sweep(builder, n_grid, eps_grid=EPS_GRID, metric="tv",
                 horizon_fn=None):
    """Mixing-time ratio sweep across sizes; verdict is a labeled heuristic."""
    mixing, ratios, windows = {}, {}, {}
    for n in n_grid:
        chain = builder(n)
        horizon = horizon_fn(n) if horizon_fn else default_horizon(chain)
        curve = distance_curve(chain, metric, horizon)
        per = {}
        for eps in sorted(set(eps_grid) | {1 - e for e in eps_grid}):
            per[eps] = mixing_time_from_curve(curve, eps)
        mixing[n] = per
        ratios[n] = {}
        windows[n] = {}
        for eps in eps_grid:
            lo = per[eps].steps
            hi = max(per[1 - eps].steps, 1)
            ratios[n][eps] = lo / hi
            windows[n][eps] = lo - per[1 - eps].steps
    seq = [max(ratios[n].values()) for n in n_grid]
    monotone_down = all(b <= a * 1.02 for a, b in zip(seq, seq[1:]))
    if monotone_down and seq[-1] <= 1.25:
        verdict = "cutoff-trend"
    elif seq[-1] >= 1.3 and seq[-1] >= seq[0] * 0.98:
        verdict = "no-cutoff-trend"
    else:
        verdict = "inconclusive"
    return CutoffReport(metric, tuple(n_grid), tuple(eps_grid), mixing,
                        ratios, windows, verdict)


def precutoff_ratio(report):
    """Max over eps of the largest-n ratio t(eps)/t(1-eps)."""
    n = report.n_grid[-1]
    return max(report.ratios[n].values())


# ---------------------------------------------------------------------------
# profile comparisons (mixing distance vs hitting tails)
# ---------------------------------------------------------------------------

@dataclass
class ProfileComparison:
    description: str
    sup_gap: float
    horizon: int
    details: dict = field(default_factory=dict)


def tv_profile_vs_hitting(chain, Z, sources=None, horizon=None,
                          mass_floor=0.05):
    """Compare d(t) (over the given sources) with max_x Pr_x[T_Z > t].

    Requires the target to carry stationary mass >= ``mass_floor``; applying
    the single-state version to an exponentially light target is refused.
    """
    Z = [Z] if isinstance(Z, (int, str, np.integer)) else list(Z)
    Zidx = [chain.index(z) if not isinstance(z, (int, np.integer)) else int(z)
            for z in Z]
    pi_Z = float(chain.stationary[Zidx].sum())
    if pi_Z < mass_floor:
        raise PreconditionFailed(
            "target mass %s below floor %s" % (fmt17(pi_Z), fmt17(mass_floor))
        )
    if sources is None:
        sources = range(chain.n_states)
    sources = [chain.index(s) if not isinstance(s, (int, np.integer)) else int(s)
               for s in sources]
    if horizon is None:
        horizon = default_horizon(chain)
    pi = chain.stationary
    sup_gap = 0.0
    tails = []
    tvs = []
    for x in sources:
        h = hitting_pmf(chain, x, Zidx, horizon=horizon)
        tails.append(h.survival())
        v = point_mass(chain, x).probabilities
        row_tv = np.empty(horizon + 1)
        for t in range(horizon + 1):
            if t:
                v = v @ chain.kernel
                if chain.sparse:
                    v = np.asarray(v).ravel()
            row_tv[t] = 0.5 * np.abs(v - pi).sum()
        tvs.append(row_tv)
    tail = np.max(tails, axis=0)
    d = np.max(tvs, axis=0)
    sup_gap = float(np.abs(d - tail).max())
    return ProfileComparison("worst-source TV vs hitting tail", sup_gap,
                             horizon, {"pi_Z": pi_Z})


def sep_profile_vs_hitting(chain, x, y, Z, horizon=None, mass_floor=0.05):
    """Compare d_sep(t) with the convolved hitting tail Pr[T_Z^{x,y} > t].

    Checks the computable hypotheses first (target mass, balancedness from
    x and y, every x-y path meeting Z) and names the failing one.
    """
    x = chain.index(x) if not isinstance(x, (int, np.integer)) else int(x)
    y = chain.index(y) if not isinstance(y, (int, np.integer)) else int(y)
    Zidx = [chain.index(z) if not isinstance(z, (int, np.integer)) else int(z)
            for z in (Z if hasattr(Z, "__iter__") and not isinstance(Z, str)
                      else [Z])]
    pi_Z = float(chain.stationary[Zidx].sum())
    if pi_Z < mass_floor:
        raise PreconditionFailed("hypothesis failed: target mass %s < %s"
                                 % (fmt17(pi_Z), fmt17(mass_floor)))
    for point, name in ((x, "x"), (y, "y")):
        ok, dev = balanced_check(chain, point, Zidx)
        if not ok:
            raise PreconditionFailed(
                "hypothesis failed: Z not balanced from %s (dev %s)"
                % (name, fmt17(dev)))
    if not _paths_all_meet_Z(chain, x, y, Zidx):
        raise PreconditionFailed("hypothesis failed: some x-y path avoids Z")
    if horizon is None:
        horizon = default_horizon(chain)
    hx = hitting_pmf(chain, x, Zidx, horizon=horizon)
    hy = hitting_pmf(chain, y, Zidx, horizon=horizon)
    conv = convolve(hx, hy)
    surv = np.ones(horizon + 1)
    cum = np.cumsum(conv.pmf)
    upto = min(horizon, conv.horizon)
    surv[: upto + 1] = 1.0 - cum[: upto + 1]
    sep_curve = distance_curve(chain, "separation", horizon)
    sep = np.array([v for _, v in sep_curve.samples])
    sup_gap = float(np.abs(sep - surv).max())
    return ProfileComparison("separation vs convolved hitting tail", sup_gap,
                             horizon, {"pi_Z": pi_Z})


# ---------------------------------------------------------------------------
# inequality verifiers
# ---------------------------------------------------------------------------

def verify_tv_sep_chain(chain, horizon):
    """Worst violation of the TV/separation comparison chain over t.

    Checks, for each t <= horizon:
      d(t) <= d_sep(t) <= 1 - (1 - min(2 d(floor(t/2)), 1))^2
            <= 4 d(floor(t/2)).
    Returns the most negative slack observed (>= 0 means all hold).
    """
    tv = distance_curve(chain, "tv", horizon)
    sep = distance_curve(chain, "separation", horizon)
    d = np.array([v for _, v in tv.samples])
    ds = np.array([v for _, v in sep.samples])
    worst = np.inf
    for t in range(horizon + 1):
        half = d[t // 2]
        mid = 1.0 - (1.0 - min(2.0 * half, 1.0)) ** 2
        worst = min(worst, ds[t] - d[t], mid - ds[t], 4.0 * half - mid)
    return float(worst)


def verify_sep_from_tv_rel(chain, eps, horizon=None):
    """t_sep(1-eps) <= 2 t_mix(1-2 sqrt(eps)) + 2 t_rel log(1/eps).

    Returns the slack (RHS - LHS, in steps).
    """
    if not 0 < eps < 0.25:
        raise ValueError("eps in (0, 1/4)")
    if horizon is None:
        horizon = default_horizon(chain)
    while True:
        sep = distance_curve(chain, "separation", horizon)
        tv = distance_curve(chain, "tv", horizon)
        t_sep = mixing_time_from_curve(sep, 1.0 - eps)
        t_mix = mixing_time_from_curve(tv, 1.0 - 2.0 * np.sqrt(eps))
        if t_sep.reached and t_mix.reached:
            break
        if horizon >= 200_000:
            raise HorizonExceeded("increase the horizon for eps=%s" % eps)
        horizon = min(horizon * 4, 200_000)
    t_rel = eigen_summary(chain).t_rel
    rhs = 2.0 * t_mix.steps + 2.0 * t_rel * np.log(1.0 / eps)
    return float(rhs - t_sep.steps)


def verify_overlap_lower_bound(chain, samples=100, rng=None, max_time=100):
    """P^{s+t}(x,y)/pi(y) >= (1 - ||P_x^t - P_y^s||_TV)^2 on random tuples.

    Returns the most negative slack over the sample.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    P = chain.dense_kernel()
    n = chain.n_states
    powers = [np.eye(n)]
    for _ in range(2 * max_time):
        powers.append(powers[-1] @ P)
    pi = chain.stationary
    worst = np.inf
    for _ in range(samples):
        x = int(rng.integers(n))
        y = int(rng.integers(n))
        s = int(rng.integers(0, max_time + 1))
        t = int(rng.integers(0, max_time + 1))
        lhs = powers[s + t][x, y] / pi[y]
        tv = 0.5 * np.abs(powers[t][x] - powers[s][y]).sum()
        rhs = (1.0 - tv) ** 2
        worst = min(worst, lhs - rhs)
    return float(worst)


def binomial_tv(t, s):
    """TV(Bin(t, 1/2), Bin(t+s, 1/2)) by direct pmf summation."""
    if s == 0:
        return 0.0
    k = np.arange(0, t + s + 1)
    p1 = binom.pmf(k, t, 0.5)
    p2 = binom.pmf(k, t + s, 0.5)
    return float(0.5 * np.abs(p1 - p2).sum())


def verify_window_binomial(chain, t, s, curve=None):
    """d(t) - d(t+s) <= TV(Bin(t,1/2), Bin(t+s,1/2)) for lazy chains.

    Returns a dict with both sides and the slack; also reports the binomial
    TV at a sqrt(t) shift, the mechanism behind square-root-wide windows.
    """
    if curve is None:
        curve = distance_curve(chain, "tv", t + s)
    d_t = curve.value_at(t)
    d_ts = curve.value_at(t + s)
    bound = binomial_tv(t, s)
    root_shift = int(np.sqrt(t)) if t else 0
    return {
        "lhs": d_t - d_ts,
        "bound": bound,
        "slack": bound - (d_t - d_ts),
        "sqrt_shift_tv": binomial_tv(t, root_shift),
    }


def lp_mixing_comparison(chain, p_list, a_list, horizon=None,
                         horizon_cap=200_000):
    """Relations between lp mixing times.

    For p > 2:  t_{l2}(a) <= t_{lp}(a) <= 2 t_{l2}(sqrt(a)).
    For p in (1, 2), with m = ceil(p / (2(p-1))):
                t_{l2}(a^m)/m <= t_{lp}(a) <= t_{l2}(a).
    Returns the most negative slack and the per-(p, a) rows.  The horizon is
    doubled (up to ``horizon_cap``) when a slow chain has not reached the
    smallest target yet.
    """
    if horizon is None:
        horizon = default_horizon(chain)
    while True:
        try:
            return _lp_mixing_once(chain, p_list, a_list, horizon)
        except HorizonExceeded:
            if horizon >= horizon_cap:
                raise
            horizon = min(horizon * 4, horizon_cap)


def _lp_mixing_once(chain, p_list, a_list, horizon):
    l2 = distance_curve(chain, "lp", horizon, p=2)
    rows = []
    worst = np.inf
    for p in p_list:
        lp = distance_curve(chain, "lp", horizon, p=p)
        for a in a_list:
            tp = mixing_time_from_curve(lp, a)
            if p > 2:
                t2 = mixing_time_from_curve(l2, a)
                t2root = mixing_time_from_curve(l2, np.sqrt(a))
                if not (tp.reached and t2.reached and t2root.reached):
                    raise HorizonExceeded("lp comparison needs longer horizon")
                slacks = (tp.steps - t2.steps, 2 * t2root.steps - tp.steps)
            else:
                m = int(np.ceil(p / (2.0 * (p - 1.0))))
                t2m = mixing_time_from_curve(l2, a ** m)
                t2 = mixing_time_from_curve(l2, a)
                if not (tp.reached and t2.reached and t2m.reached):
                    raise HorizonExceeded("lp comparison needs longer horizon")
                slacks = (tp.steps - t2m.steps / m, t2.steps - tp.steps)
            worst = min(worst, *slacks)
            rows.append({"p": p, "a": a, "t_lp": tp.steps,
                         "slacks": slacks})
    return float(worst), rows


def hit_vs_mix_sandwich(chain, x, Z, p, eps, horizon=None):
    """Two-sided relation between d_x and the hitting tail quantile of Z.

    With t = tau_{x,Z}(p) (least t with Pr_x[T_Z > t] <= p):
      * d_x(max(t - s_eps, 0)) > p - eps always,
        s_eps = ceil(t_rel log(pi(Z^c)/eps) / pi(Z));
      * d_x(t + r_eps) <= p + eps when Z is balanced seen from x,
        r_eps = ceil(t_rel log(pi(Z^c)/(pi(Z) eps^2)) / 2).
    Returns a report dict with both slacks (positive = holds).
    """
    x = chain.index(x) if not isinstance(x, (int, np.integer)) else int(x)
    Zidx = [chain.index(z) if not isinstance(z, (int, np.integer)) else int(z)
            for z in (Z if hasattr(Z, "__iter__") and not isinstance(Z, str)
                      else [Z])]
    pi = chain.stationary
    pi_Z = float(pi[Zidx].sum())
    t_rel = eigen_summary(chain).t_rel
    h = hitting_pmf(chain, x, Zidx, horizon=horizon)
    t_hit = tail_quantile(h, p)
    s_eps = int(np.ceil(t_rel * np.log((1 - pi_Z) / eps) / pi_Z))
    r_eps = int(np.ceil(t_rel * np.log((1 - pi_Z) / (pi_Z * eps * eps)) / 2))
    s_prime = max(t_hit - s_eps, 0)
    d_low = tv_distance(evolve(chain, point_mass(chain, x), s_prime),
                        chain.stationary)
    report = {"t_hit": t_hit, "s_eps": s_eps, "r_eps": r_eps,
              "pi_Z": pi_Z}
    if p - eps <= 0:
        report["lower"] = {"vacuous": True, "slack": float("inf")}
    else:
        report["lower"] = {"vacuous": False, "d": d_low,
                           "slack": d_low - (p - eps)}
    ok, dev = balanced_check(chain, x, Zidx)
    if not ok:
        raise PreconditionFailed(
            "Z not balanced seen from x (deviation %s)" % fmt17(dev))
    d_up = tv_distance(evolve(chain, point_mass(chain, x), t_hit + r_eps),
                       chain.stationary)
    report["upper"] = {"d": d_up, "slack": (p + eps) - d_up}
    return report


def window_one_analysis(gc, delta=1):
    """Mechanism behind narrow separation windows on the projected chain.

    Projects the inner part of an example-5 graph to the distance chain,
    forms T^{a,b} of the far fiber (convolution of two one-sided hitting
    times), verifies log-concavity, and reports the geometric growth rate
    alpha = min pmf(t+1)/pmf(t) below the mode minus delta*n (alpha > 1 is
    the growth that pins the transition to an O(1) window).
    """
    from .constructions import bd_projection

    _, bd, _ = bd_projection(gc)
    last = bd.n_states - 1
    h = hitting_pmf(bd, 0, [last])
    conv = convolve(h, h)
    pmf = conv.pmf
    ok, defect, unimodal = log_concavity_check(pmf)
    if not ok:
        raise PreconditionFailed("projected hitting pmf not log-concave "
                                 "(defect %s)" % fmt17(defect))
    mode, mean, sd = mode_and_spread(pmf)
    t_lo = 2 * last  # support starts at twice the one-sided distance
    t_hi = max(mode - delta * gc.n, t_lo + 1)
    ratios = [pmf[t + 1] / pmf[t] for t in range(t_lo, t_hi)
              if pmf[t] > 1e-12]
    alpha = min(ratios) if ratios else float("nan")
    surv = 1.0 - np.cumsum(pmf)
    return {
        "log_concave": ok,
        "unimodal": unimodal,
        "mode": mode,
        "mean": mean,
        "sd": sd,
        "alpha": float(alpha),
        "survival_at_mode": float(surv[mode]),
        "lazy_ratio_floor": float(min(ratios)) if ratios else None,
    }


# ---------------------------------------------------------------------------
# the verification suite
# ---------------------------------------------------------------------------

def run_verification_suite(seed=1, n_chains=25, horizon=200, tol=1e-9,
                           only=None):
    """Seeded universal-inequality suite on random reversible lazy chains.

    Returns a list of {check_id, params, slack, pass} rows; the suite as a
    whole passes iff every row does.  ``only`` filters check ids by prefix.
    """
    from .random_chains import named_stream, random_reversible_lazy_chain

    rows = []

    def add(check_id, params, slack, tolerance=tol):
        if only and not check_id.startswith(only):
            return
        rows.append({
            "check_id": check_id,
            "params": params,
            "slack": float(slack),
            "pass": bool(slack >= -tolerance),
        })

    rng = named_stream(seed, "verify-suite")
    for i in range(n_chains):
        chain = random_reversible_lazy_chain(rng, max_states=25,
                                             chain_id="rand%d" % i)
        n = chain.n_states
        add("tv_sep_chain", {"chain": i, "states": n},
            verify_tv_sep_chain(chain, horizon))
        worst_lp, _ = lp_mixing_comparison(chain, [1.5, 4, np.inf],
                                           [0.5, 0.25], horizon=horizon)
        add("lp_mixing", {"chain": i, "states": n}, worst_lp)
        add("overlap_lower", {"chain": i, "states": n},
            verify_overlap_lower_bound(chain, samples=20, rng=rng))
        # stationary hitting tail at a random target set and time
        from .spectral import hitting_from_stationary_tail

        A = sorted(rng.choice(n, size=max(1, n // 3), replace=False).tolist())
        t = int(rng.integers(0, 101))
        lhs, rhs = hitting_from_stationary_tail(chain, A, t)
        add("stationary_hit_tail", {"chain": i, "A": A, "t": t}, rhs - lhs)
        add("sep_from_tv_rel", {"chain": i, "eps": 0.04},
            verify_sep_from_tv_rel(chain, 0.04, horizon=horizon * 4))
        if n <= 14:
            est = cheeger_exact(chain)
            lam2 = eigen_summary(chain).lambda2
            gap = 1.0 - lam2
            add("cheeger_sandwich",
                {"chain": i, "phi": est.exact},
                min(gap - est.exact ** 2 / 2.0, 2.0 * est.exact - gap))
        t0 = int(rng.integers(1, horizon // 2))
        s0 = int(rng.integers(0, horizon // 2))
        win = verify_window_binomial(chain, t0, s0)
        add("binomial_window", {"chain": i, "t": t0, "s": s0}, win["slack"])
    return rows


def suite_passed(rows):
    return all(r["pass"] for r in rows)
