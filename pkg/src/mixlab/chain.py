"""Finite reversible chains: distributions, distances, mixing times.

The central object is :class:`ChainSpec`, an immutable bundle of state labels,
a row-stochastic kernel and the stationary distribution.  Kernels may be dense
``numpy`` arrays or ``scipy.sparse`` CSR matrices; all distance computations
that need every pair (separation, dbar) insist on dense kernels below a
configurable state-count guard.

Distances implemented: total variation, separation, dbar (worst pair TV) and
the stationary-weighted ``lp`` family.  Worst-case curves are non-increasing
in t for lazy reversible chains and the curve type enforces that.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (
    DenseLimitExceeded,
    DimensionMismatch,
    NonStochasticRow,
    NotIrreducible,
    NotReversible,
    ZeroStationaryMass,
)
from .serialize import fmt17

DENSE_LIMIT = 2000


def _is_sparse(kernel):
    return sp.issparse(kernel)


@dataclass(frozen=True)
class ChainSpec:
    """A finite reversible Markov chain.

    Fields
    ------
    states : tuple of labels (opaque, hashable)
    kernel : (n, n) row-stochastic matrix (ndarray or CSR)
    stationary : (n,) probability vector, reversible for the kernel
    laziness_floor : min diagonal entry of the kernel
    is_lazy : whether the chain was constructed/validated as lazy
    chain_id : short identifier used in serialized outputs
    """

    states: tuple
    kernel: object
    stationary: np.ndarray
    laziness_floor: float
    is_lazy: bool = False
    chain_id: str = "chain"

    @property
    def n_states(self):
        return len(self.states)

    @property
    def labels(self):
        return self.states

    @property
    def sparse(self):
        return _is_sparse(self.kernel)

    def index(self, label):
        """Index of a state label (linear scan; labels are few)."""
        return self.states.index(label)

    def dense_kernel(self):
        if self.sparse:
            return np.asarray(self.kernel.todense())
        return self.kernel


@dataclass(frozen=True)
class DistributionVector:
    probabilities: np.ndarray
    time_index: int = 0

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < -1e-15):
            raise ValueError("negative probability entry")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities do not sum to 1 within 1e-12")
        object.__setattr__(self, "probabilities", p)


def point_mass(chain, x):
    """Point-mass DistributionVector at state index or label ``x``."""
    if not isinstance(x, (int, np.integer)):
        x = chain.index(x)
    p = np.zeros(chain.n_states)
    p[x] = 1.0
    return DistributionVector(p, 0)


def _check_rows(kernel, tol):
    n = kernel.shape[0]
    if kernel.shape != (n, n):
        raise NonStochasticRow("kernel is not square")
    if _is_sparse(kernel):
        data = kernel.data
        rowsum = np.asarray(kernel.sum(axis=1)).ravel()
    else:
        data = kernel
        rowsum = kernel.sum(axis=1)
    if np.any(data < -tol) or np.any(data > 1 + tol):
        raise NonStochasticRow("kernel entries outside [0, 1]")
    bad = np.where(np.abs(rowsum - 1.0) > tol)[0]
    if bad.size:
        raise NonStochasticRow(
            "row %d sums to %s" % (bad[0], fmt17(rowsum[bad[0]]))
        )


def _check_irreducible(kernel):
    adj = kernel > 0
    if not _is_sparse(adj):
        adj = sp.csr_matrix(adj)
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    if ncomp != 1:
        raise NotIrreducible("%d communicating classes" % ncomp)


def _check_reversible(kernel, pi, tol):
    if _is_sparse(kernel):
        flow = sp.diags(pi) @ kernel
        dev = abs(flow - flow.T)
        worst = dev.max() if dev.nnz else 0.0
    else:
        flow = pi[:, None] * kernel
        worst = np.abs(flow - flow.T).max()
    if worst > tol:
        raise NotReversible("detailed balance violated by %s" % fmt17(worst))
    return worst


def stationary_distribution(kernel=None, weights=None):
    """Stationary distribution from a kernel (solve pi P = pi) or weights.

    With ``weights`` given, simply normalizes them (the conductance-model
    stationary law).  With a kernel, solves the linear system; requires
    irreducibility.
    """
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if np.any(w <= 0):
            raise ZeroStationaryMass("weights must be strictly positive")
        return w / w.sum()
    _check_irreducible(kernel)
    n = kernel.shape[0]
    if _is_sparse(kernel) and n > DENSE_LIMIT:
        # power-ish refinement: solve with sparse eigs on P^T
        from scipy.sparse.linalg import eigs

        vals, vecs = eigs(kernel.T.tocsc().astype(float), k=1, sigma=1.0001)
        pi = np.real(vecs[:, 0])
    else:
        dense = np.asarray(kernel.todense()) if _is_sparse(kernel) else kernel
        # pi (P - I) = 0 with sum(pi) = 1, solved by least squares
        A = np.vstack([dense.T - np.eye(n), np.ones((1, n))])
        b = np.zeros(n + 1)
        b[-1] = 1.0
        pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.abs(pi)
    return pi / pi.sum()


def stationary_via_detailed_balance(kernel):
    """Exact stationary law of a reversible kernel by ratio propagation.

    Sets mu(root) = 1 and walks the transition graph, fixing
    mu(y) = mu(x) P(x,y) / P(y,x) along tree edges.  Unlike a least-squares
    solve, whose absolute error floor (~1e-16) swamps exponentially small
    masses, every entry here is correct to relative rounding error.  The
    kernel must actually be reversible (build_chain verifies this after).
    """
    dense = np.asarray(kernel.todense()) if _is_sparse(kernel) else kernel
    n = dense.shape[0]
    _check_irreducible(dense)
    mu = np.zeros(n)
    mu[0] = 1.0
    seen = [False] * n
    seen[0] = True
    stack = [0]
    while stack:
        x = stack.pop()
        for y in np.nonzero(dense[x])[0]:
            if not seen[y]:
                if dense[y, x] <= 0:
                    raise NotReversible("one-way transition %d -> %d" % (x, y))
                mu[y] = mu[x] * dense[x, y] / dense[y, x]
                seen[y] = True
                stack.append(int(y))
    return mu / mu.sum()


def build_chain(kernel, labels=None, stationary=None, require_lazy=False,
                chain_id="chain", tol=1e-9):
    """Validate a kernel and assemble a :class:`ChainSpec`.

    Raises ``NonStochasticRow`` / ``NotIrreducible`` / ``NotReversible`` per
    the validation that fails first.  When ``stationary`` is supplied (e.g.
    from conductances) it is verified rather than recomputed.
    """
    if not _is_sparse(kernel):
        kernel = np.asarray(kernel, dtype=float)
    _check_rows(kernel, max(tol, 1e-12))
    _check_irreducible(kernel)
    if stationary is None:
        pi = stationary_distribution(kernel)
    else:
        pi = np.asarray(stationary, dtype=float)
        pi = pi / pi.sum()
    _check_reversible(kernel, pi, tol)
    diag = kernel.diagonal() if _is_sparse(kernel) else np.diag(kernel)
    floor = float(diag.min())
    is_lazy = floor >= 0.5 - 1e-12
    if require_lazy and not is_lazy:
        raise NotReversible("chain not lazy: min diagonal %s" % fmt17(floor))
    if labels is None:
        labels = tuple(range(kernel.shape[0]))
    return ChainSpec(tuple(labels), kernel, pi, floor, is_lazy, chain_id)


# --- evolution --------------------------------------------------------------

def evolve(chain, start, t):
    """start . P^t by t successive vector-matrix products.

    One multiplication per step so that composing evolve(k1) and evolve(k2)
    follows the same floating-point path as evolve(k1 + k2).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    v = start.probabilities.copy()
    P = chain.kernel
    for _ in range(int(t)):
        v = v @ P
        if chain.sparse:
            v = np.asarray(v).ravel()
    return DistributionVector(v, start.time_index + int(t))


def kernel_power_sweep(chain, t_max, dense_limit=DENSE_LIMIT):
    """Yield P^1, ..., P^{t_max} as dense matrices (repeated multiplication)."""
    n = chain.n_states
    if n > dense_limit:
        raise DenseLimitExceeded(
            "%d states exceeds dense guard %d" % (n, dense_limit)
        )
    P = chain.dense_kernel()
    M = np.eye(n)
    for _ in range(int(t_max)):
        M = M @ P
        yield M


def _kernel_power(chain, t, dense_limit=DENSE_LIMIT):
    """Dense P^t by binary powering (for single-time queries)."""
    n = chain.n_states
    if n > dense_limit:
        raise DenseLimitExceeded(
            "%d states exceeds dense guard %d" % (n, dense_limit)
        )
    return np.linalg.matrix_power(chain.dense_kernel(), int(t))


# --- distances --------------------------------------------------------------

def _as_prob(mu):
    if isinstance(mu, DistributionVector):
        return mu.probabilities
    return np.asarray(mu, dtype=float)


def tv_distance(mu, nu):
    """Total-variation distance, computed by three equivalent formulas.

    Returns half the l1 norm; asserts agreement with 1 - sum(min) and with
    the maximal signed excess within 1e-14.
    """
    a = _as_prob(mu)
    b = _as_prob(nu)
    if a.shape != b.shape:
        raise DimensionMismatch("dimension %s vs %s" % (a.shape, b.shape))
    diff = a - b
    half_l1 = 0.5 * np.abs(diff).sum()
    # 1 - sum(min) picks up any mass defect of the inputs; correct for it so
    # the three forms are compared on equal footing.
    one_minus_min = 1.0 - np.minimum(a, b).sum() - 0.5 * (2.0 - a.sum() - b.sum())
    pos_excess = diff[diff > 0].sum() - 0.5 * (a.sum() - b.sum())
    if abs(half_l1 - one_minus_min) > 1e-14 or abs(half_l1 - pos_excess) > 1e-14:
        raise AssertionError("TV formulas disagree beyond 1e-14")
    return float(half_l1)


def lp_distance(mu, nu, pi, p):
    """Stationary-weighted lp distance ||mu - nu||_{p, pi}.

    For p = 1 this equals twice the total-variation distance.
    """
    a = _as_prob(mu)
    b = _as_prob(nu)
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= 0):
        raise ZeroStationaryMass("pi must be strictly positive")
    ratio = np.abs(a - b) / pi
    if p == np.inf:
        return float(ratio.max())
    if p <= 1:
        if p == 1:
            return float((pi * ratio).sum())
        raise ValueError("p must be in (1, inf] (p = 1 allowed as 2 TV)")
    return float((pi * ratio ** p).sum() ** (1.0 / p))


def worst_tv_from(chain, x, t):
    """d_x(t): TV distance of the time-t law from x to pi."""
    dist = evolve(chain, point_mass(chain, x), t)
    return tv_distance(dist, chain.stationary)


def worst_tv(chain, t):
    """d(t): max over starting states of d_x(t)."""
    Mt = _kernel_power(chain, t)
    return float(0.5 * np.abs(Mt - chain.stationary[None, :]).sum(axis=1).max())


def separation(chain, t, pairs=None, dense_limit=DENSE_LIMIT):
    """Separation distance 1 - min_{x,y} P^t(x,y)/pi(y), clamped to [0, 1].

    Exact below the dense guard.  With ``pairs`` (list of (x, y) index
    pairs) only those ratios are scanned; the result is then an UPPER bound
    on the exact minimum ratio, i.e. a lower bound on d_sep, and the
    returned pair ``(value, exact)`` carries ``exact=False``.
    """
    pi = chain.stationary
    if pairs is None:
        Mt = _kernel_power(chain, t, dense_limit=dense_limit)
        ratio = (Mt / pi[None, :]).min()
        return min(max(1.0 - ratio, 0.0), 1.0), True
    sources = sorted({x for x, _ in pairs})
    rows = {}
    for x in sources:
        rows[x] = evolve(chain, point_mass(chain, x), t).probabilities
    ratio = min(rows[x][y] / pi[y] for x, y in pairs)
    return min(max(1.0 - ratio, 0.0), 1.0), False


def dbar(chain, t, dense_limit=DENSE_LIMIT):
    """Max over state pairs of TV between the two time-t laws."""
    Mt = _kernel_power(chain, t, dense_limit=dense_limit)
    worst = 0.0
    for i in range(chain.n_states):
        d = 0.5 * np.abs(Mt[i + 1:] - Mt[i][None, :]).sum(axis=1)
        if d.size:
            worst = max(worst, float(d.max()))
    return worst


# --- curves and mixing times ------------------------------------------------

@dataclass
class DistanceCurve:
    """A (time -> distance) curve for one metric on one chain."""

    metric: str
    samples: list  # list of (t, value)
    horizon: int
    chain_id: str = "chain"
    exact: bool = True

    def __post_init__(self):
        if self.metric in ("tv", "separation", "dbar"):
            vals = [v for _, v in self.samples]
            if any(v < -1e-12 or v > 1 + 1e-12 for v in vals):
                raise ValueError("%s values outside [0,1]" % self.metric)
            for (t0, v0), (t1, v1) in zip(self.samples, self.samples[1:]):
                if v1 > v0 + 1e-10:
                    raise ValueError(
                        "%s curve increases at t=%d by %s"
                        % (self.metric, t1, fmt17(v1 - v0))
                    )

    def value_at(self, t):
        for ts, v in self.samples:
            if ts == t:
                return v
        raise KeyError(t)

    def to_csv(self):
        lines = ["t,value,metric,chain_id"]
        for t, v in self.samples:
            lines.append("%d,%s,%s,%s" % (t, fmt17(v), self.metric, self.chain_id))
        return "\n".join(lines) + "\n"

    def to_json_obj(self):
        return {
            "metric": self.metric,
            "horizon": self.horizon,
            "samples": [[t, v] for t, v in self.samples],
        }


def default_horizon(chain, slow_coefficient=20):
    """Default scan horizon: 20 n steps (n = state count), overridable."""
    return slow_coefficient * chain.n_states


def distance_curve(chain, metric, horizon, p=None, dense_limit=DENSE_LIMIT):
    """Exact worst-case distance curve on t = 0..horizon.

    Uses a single dense power iteration so each extra time step costs one
    matrix multiplication.
    """
    n = chain.n_states
    if n > dense_limit:
        raise DenseLimitExceeded(
            "%d states exceeds dense guard %d" % (n, dense_limit)
        )
    pi = chain.stationary
    P = chain.dense_kernel()
    M = np.eye(n)
    samples = []
    for t in range(int(horizon) + 1):
        if t > 0:
            M = M @ P
        if metric == "tv":
            val = float(0.5 * np.abs(M - pi[None, :]).sum(axis=1).max())
        elif metric == "separation":
            val = min(max(1.0 - float((M / pi[None, :]).min()), 0.0), 1.0)
        elif metric == "dbar":
            val = 0.0
            for i in range(n):
                d = 0.5 * np.abs(M[i + 1:] - M[i][None, :]).sum(axis=1)
                if d.size:
                    val = max(val, float(d.max()))
        elif metric == "lp":
            ratios = np.abs(M - pi[None, :]) / pi[None, :]
            if p == np.inf:
                val = float(ratios.max())
            else:
                val = float(((pi[None, :] * ratios ** p).sum(axis=1) ** (1.0 / p)).max())
        else:
            raise ValueError("unknown metric %r" % metric)
        samples.append((t, val))
    name = "lp(%s)" % p if metric == "lp" else metric
    return DistanceCurve(name, samples, int(horizon), chain.chain_id)


@dataclass(frozen=True)
class MixingTime:
    steps: int
    reached: bool
    eps: float
    metric: str


def mixing_time_from_curve(curve, eps):
    """Least t on the curve with value <= eps (scan step 1)."""
    for t, v in curve.samples:
        if v <= eps:
            return MixingTime(t, True, eps, curve.metric)
    return MixingTime(curve.horizon, False, eps, curve.metric)


def mixing_time(chain, eps, metric="tv", p=None, horizon=None, curve=None):
    """epsilon-mixing time under a metric; unreached flag if beyond horizon."""
    if not 0 < eps:
        raise ValueError("eps must be positive")
    if eps >= 1 and metric in ("tv", "separation", "dbar"):
        return MixingTime(0, True, eps, metric)
    if curve is None:
        if horizon is None:
            horizon = default_horizon(chain)
        curve = distance_curve(chain, metric, horizon, p=p)
    return mixing_time_from_curve(curve, eps)
