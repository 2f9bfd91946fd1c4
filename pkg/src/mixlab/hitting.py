"""Hitting-time distributions and the machinery built on them.

Hitting pmfs are computed by absorbing-vector iteration: make the target set
absorbing, push the source distribution one step at a time and record the
newly absorbed mass (split by landing state, which gives balancedness checks
for free).  No matrix inversions.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.signal
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .chain import DistributionVector, evolve, point_mass
from .errors import (
    ComplexEigenvalue,
    EmptyTargetSet,
    HorizonCap,
    NotBirthDeath,
    PreconditionFailed,
    TargetMismatch,
)
from .serialize import fmt17
from .spectral import eigen_summary

HARD_CAP = 10 ** 7


@dataclass(frozen=True)
class HittingDistribution:
    """pmf of T_Z from a source, truncated at ``horizon`` with ``residual``."""

    source: object
    target: tuple
    pmf: np.ndarray  # pmf[t] = Pr[T_Z = t], t = 0..horizon
    horizon: int
    residual: float

    def __post_init__(self):
        total = float(self.pmf.sum() + self.residual)
        if abs(total - 1.0) > 1e-12:
            raise ValueError("pmf + residual = %s != 1" % fmt17(total))

    def survival(self):
        """Pr[T > t] for t = 0..horizon."""
        return 1.0 - np.cumsum(self.pmf)

    def mean(self):
        t = np.arange(self.horizon + 1)
        return float((t * self.pmf).sum())

    def to_csv(self):
        surv = self.survival()
        lines = ["t,pmf,survival"]
        for t in range(self.horizon + 1):
            lines.append("%d,%s,%s" % (t, fmt17(self.pmf[t]), fmt17(surv[t])))
        return "\n".join(lines) + "\n"

    def to_json_obj(self):
        return {
            "target": list(self.target),
            "horizon": self.horizon,
            "residual": self.residual,
            "pmf": [float(v) for v in self.pmf],
        }


@dataclass(frozen=True)
class AbsorptionProfile:
    """Joint law of (T_Z, X_{T_Z}): per-step absorbed mass by landing state."""

    target: tuple
    matrix: np.ndarray  # (horizon+1, |Z|)

    def landing_totals(self):
        return self.matrix.sum(axis=0)


@dataclass(frozen=True)
class ConvolvedHitting:
    """pmf of T_Z^{x,y}: sum of two independent hitting times."""

    pmf: np.ndarray
    horizon: int
    residual: float
    components: tuple

    def survival(self):
        return 1.0 - np.cumsum(self.pmf)


def _source_vector(chain, source):
    if isinstance(source, DistributionVector):
        return source.probabilities.copy()
    return point_mass(chain, source).probabilities


def hitting_pmf(chain, source, Z, horizon=None, residual_threshold=1e-12,
                cap=HARD_CAP, want_profile=False):
    """Hitting-time pmf of target set Z from ``source``.

    With ``horizon=None`` the iteration extends until the residual drops
    below ``residual_threshold`` (raising ``HorizonCap`` at the hard cap).
    """
    Z = sorted({chain.index(z) if not isinstance(z, (int, np.integer)) else int(z)
                for z in (Z if hasattr(Z, "__iter__") and not isinstance(Z, str) else [Z])})
    if not Z:
        raise EmptyTargetSet("empty target set")
    n = chain.n_states
    zmask = np.zeros(n, dtype=bool)
    zmask[Z] = True
    keep = np.where(~zmask)[0]
    v = _source_vector(chain, source)

    pmf = [float(v[zmask].sum())]  # T = 0 mass
    profile = [v[Z].copy()] if want_profile else None
    v = v[keep]

    P = chain.kernel
    if chain.sparse:
        P = P.tocsc()
        Q = P[keep][:, keep].tocsr()
        R = P[keep][:, Z].tocsr()
    else:
        Q = P[np.ix_(keep, keep)]
        R = P[np.ix_(keep, Z)]

    t = 0
    auto = horizon is None
    limit = cap if auto else int(horizon)
    while t < limit:
        t += 1
        absorbed = v @ R
        if chain.sparse:
            absorbed = np.asarray(absorbed).ravel()
        v = v @ Q
        if chain.sparse:
            v = np.asarray(v).ravel()
        pmf.append(float(absorbed.sum()))
        if want_profile:
            profile.append(absorbed)
        if auto and v.sum() < residual_threshold:
            break
    residual = float(v.sum())
    if auto and residual >= residual_threshold:
        raise HorizonCap(
            "residual %s at hard cap %d" % (fmt17(residual), cap)
        )
    pmf = np.array(pmf)
    # tidy the accountancy so that pmf + residual is exactly 1 (the absorbed
    # and surviving masses can disagree with 1 by accumulated rounding)
    exact_residual = float(1.0 - pmf.sum())
    if abs(exact_residual - residual) > 1e-10:
        raise AssertionError("mass leak: %s" % fmt17(exact_residual - residual))
    residual = exact_residual
    hd = HittingDistribution(source, tuple(Z), pmf, len(pmf) - 1, residual)
    if want_profile:
        return hd, AbsorptionProfile(tuple(Z), np.array(profile))
    return hd


def convolve(h1, h2):
    """Exact discrete convolution of two hitting distributions.

    The summation order is made canonical (inputs sorted by length, then by
    byte content) so that convolve(h1, h2) == convolve(h2, h1) exactly.
    """
    if tuple(h1.target) != tuple(h2.target):
        raise TargetMismatch("targets differ: %s vs %s" % (h1.target, h2.target))
    a, b = h1.pmf, h2.pmf
    if (len(a), a.tobytes()) > (len(b), b.tobytes()):
        a, b = b, a
    pmf = np.convolve(a, b)
    horizon = len(pmf) - 1
    residual = float(1.0 - pmf.sum())
    return ConvolvedHitting(pmf, horizon, residual, (h1, h2))


def balanced_check(chain, x, Z, horizon=None, tol=1e-9, mass_floor=1e-12):
    """Is Z balanced seen from x?

    Checks | Pr_x[X_t = z | T_Z = t] - pi_Z(z) | at every t whose pmf mass
    exceeds ``mass_floor``; balanced iff the max deviation is <= ``tol``.
    """
    hd, profile = hitting_pmf(chain, x, Z, horizon=horizon, want_profile=True)
    pi = chain.stationary
    pi_z = pi[list(hd.target)]
    pi_z = pi_z / pi_z.sum()
    worst = 0.0
    for t in range(hd.horizon + 1):
        mass = hd.pmf[t]
        if mass <= mass_floor:
            continue
        landing = profile.matrix[t] / mass
        worst = max(worst, float(np.abs(landing - pi_z).max()))
    return worst <= tol, worst


def stochastic_dominance(h1, h2, slack=1e-12):
    """Does T under h1 stochastically dominate T under h2?

    Compares survival functions pointwise on the common support; mass beyond
    either horizon is counted as surviving.
    """
    if tuple(h1.target) != tuple(h2.target):
        raise TargetMismatch("targets differ")
    n = max(len(h1.pmf), len(h2.pmf))
    s1 = np.ones(n)
    s2 = np.ones(n)
    s1[: len(h1.pmf)] = h1.survival()
    s1[len(h1.pmf):] = h1.residual
    s2[: len(h2.pmf)] = h2.survival()
    s2[len(h2.pmf):] = h2.residual
    violation = float(np.maximum(s2 - s1, 0.0).max())
    return violation <= slack, violation


def _paths_all_meet_Z(chain, x, y, Z):
    """True iff every x -> y path in the support graph meets Z."""
    n = chain.n_states
    zset = set(Z)
    keep = [i for i in range(n) if i not in zset]
    if x in zset or y in zset:
        return True
    P = chain.dense_kernel() if not chain.sparse else chain.kernel.toarray()
    sub = (P[np.ix_(keep, keep)] > 0).astype(int)
    ncomp, labels = connected_components(sp.csr_matrix(sub), directed=False)
    return labels[keep.index(x)] != labels[keep.index(y)]


def paths_decomposition_check(chain, x, y, Z, t_grid, horizon=None):
    """Check the hitting-time decomposition of P^t(x,y)/pi(y) through Z.

    Verifies, at each t in ``t_grid``:

    * lower bounds: P^t(x,y)/pi(y) >= sum_k Pr[T_Z^{x,y} = k] g(t-k)/pi(Z)
      >= Pr[T_Z^{x,y} <= t], where g(s) = Pr_{pi_Z}[X_s in Z];
    * when every x -> y path meets Z, the first bound is an equality;
    * the general upper bound with the t_rel error term
      (1/2) t_rel max_k Pr[T^{x,y}_Z = k] sqrt((1 - pi(Z))/pi(Z)).

    Requires Z balanced seen from both x and y.
    """
    x = chain.index(x) if not isinstance(x, (int, np.integer)) else int(x)
    y = chain.index(y) if not isinstance(y, (int, np.integer)) else int(y)
    for point, name in ((x, "x"), (y, "y")):
        ok, dev = balanced_check(chain, point, Z, horizon=horizon)
        if not ok:
            raise PreconditionFailed(
                "Z not balanced seen from %s (deviation %s)" % (name, fmt17(dev))
            )
    hx = hitting_pmf(chain, x, Z, horizon=horizon)
    hy = hitting_pmf(chain, y, Z, horizon=horizon)
    conv = convolve(hx, hy)
    Zidx = list(hx.target)
    pi = chain.stationary
    pi_Z = float(pi[Zidx].sum())

    t_max = max(t_grid)
    # g(s) = Pr_{pi_Z}[X_s in Z]
    start = np.zeros(chain.n_states)
    start[Zidx] = pi[Zidx] / pi_Z
    g = np.empty(t_max + 1)
    v = start
    g[0] = 1.0
    for s in range(1, t_max + 1):
        v = v @ chain.kernel
        if chain.sparse:
            v = np.asarray(v).ravel()
        g[s] = float(v[Zidx].sum())

    t_rel = eigen_summary(chain).t_rel if chain.n_states <= 2000 else None
    max_mass = float(conv.pmf.max())
    err = None
    if t_rel is not None and np.isfinite(t_rel):
        err = 0.5 * t_rel * max_mass * np.sqrt((1.0 - pi_Z) / pi_Z)

    separated = _paths_all_meet_Z(chain, x, y, Zidx)

    row_x = point_mass(chain, x)
    report = {
        "separated": separated,
        "rows": [],
        "min_lower_slack": np.inf,
        "max_identity_violation": 0.0,
        "max_upper_violation": 0.0,
    }
    current_t = 0
    vec = row_x.probabilities
    for t in sorted(t_grid):
        while current_t < t:
            vec = vec @ chain.kernel
            if chain.sparse:
                vec = np.asarray(vec).ravel()
            current_t += 1
        lhs = float(vec[y]) / pi[y]
        kk = np.arange(0, min(t, conv.horizon) + 1)
        mid = float((conv.pmf[kk] * g[t - kk] / pi_Z).sum())
        low = float(conv.pmf[kk].sum())
        report["rows"].append({"t": t, "ratio": lhs, "decomposition": mid,
                               "cdf": low})
        report["min_lower_slack"] = min(report["min_lower_slack"],
                                        lhs - mid, mid - low)
        if separated:
            report["max_identity_violation"] = max(
                report["max_identity_violation"], abs(lhs - mid))
        if err is not None:
            report["max_upper_violation"] = max(
                report["max_upper_violation"], lhs - (mid + err))
    return report


def fill_geometric_representation(bd_chain, horizon=None):
    """Geometric-convolution form of the hitting time of the last state.

    For a lazy birth-and-death chain on states 0..n-1 started at 0, the
    hitting time of n-1 is distributed as a sum of independent geometrics
    whose rates are the nonzero eigenvalues of I - P', P' being the kernel
    with the last state made absorbing.  Returns (rates, pmf) with the pmf
    truncated at ``horizon`` (default: extends until residual < 1e-12).
    """
    P = bd_chain.dense_kernel()
    n = bd_chain.n_states
    mask = np.abs(P) > 0
    off = np.argwhere(mask & ~np.eye(n, dtype=bool))
    if np.any(np.abs(off[:, 0] - off[:, 1]) > 1):
        raise NotBirthDeath("kernel has entries beyond the tridiagonal band")
    if bd_chain.laziness_floor < 0.5 - 1e-12:
        raise NotBirthDeath("chain is not lazy")
    # killed kernel: remove the absorbing last state
    sub = P[: n - 1, : n - 1]
    d = np.diag(sub).copy()
    up = np.array([np.sqrt(P[i, i + 1] * P[i + 1, i]) for i in range(n - 2)])
    if np.any(np.array([P[i, i + 1] * P[i + 1, i] for i in range(n - 2)]) < 0):
        raise ComplexEigenvalue("negative off-diagonal product")
    lam = scipy.linalg.eigh_tridiagonal(d, up, eigvals_only=True) if n > 2 \
        else np.array([sub[0, 0]])
    beta = 1.0 - lam  # rates of the geometrics, in (0, 1]
    if np.any(beta <= 0) or np.any(beta > 1 + 1e-12):
        raise ComplexEigenvalue("geometric rates outside (0, 1]")
    beta = np.minimum(beta, 1.0)

    if horizon is None:
        # mean + enough multiples of the slowest rate to push the residual
        # below 1e-12, then refine by actual tail mass
        horizon = int((1.0 / beta).sum() + 40.0 / beta.min()) + 10
    pmf = np.zeros(horizon + 1)
    pmf[0] = 1.0
    for b in np.sort(beta)[::-1]:
        # convolving with a geometric(b) is the linear recurrence
        # out[t] = (1-b) out[t-1] + b pmf[t-1], i.e. an IIR filter
        pmf = scipy.signal.lfilter([0.0, b], [1.0, -(1.0 - b)], pmf)
    return beta, pmf


def log_concavity_check(pmf, mass_floor=1e-12):
    """mu(t)^2 >= mu(t-1) mu(t+1) on the support; also reports unimodality."""
    p = np.asarray(pmf, dtype=float)
    worst = 0.0
    for t in range(1, len(p) - 1):
        if p[t] <= mass_floor:
            continue
        defect = p[t - 1] * p[t + 1] - p[t] ** 2
        if defect > 0:
            worst = max(worst, defect / p[t] ** 2)
    support = np.where(p > mass_floor)[0]
    unimodal = True
    if support.size:
        seg = p[support[0]: support[-1] + 1]
        peak = int(np.argmax(seg))
        unimodal = bool(np.all(np.diff(seg[: peak + 1]) >= -1e-15)
                        and np.all(np.diff(seg[peak:]) <= 1e-15))
    return worst == 0.0, worst, unimodal


def tail_quantile(h, p):
    """tau(p): least t with Pr[T > t] <= p."""
    if not 0 < p < 1:
        raise ValueError("p must be in (0, 1)")
    surv = h.survival()
    idx = np.where(surv <= p)[0]
    if idx.size == 0:
        raise HorizonCap("survival stays above %s within horizon" % fmt17(p))
    return int(idx[0])


def mode_and_spread(pmf):
    """(mode, mean, sd) of a pmf on 0..len-1; mode ties break to smallest t."""
    p = np.asarray(pmf, dtype=float)
    t = np.arange(len(p))
    mode = int(np.argmax(p))  # argmax returns the first (smallest) maximizer
    mean = float((t * p).sum())
    var = float(((t - mean) ** 2 * p).sum())
    return mode, mean, np.sqrt(max(var, 0.0))
