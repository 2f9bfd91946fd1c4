"""Graphs, weighted multigraphs and the chains walked on them.

Two graph flavours:

* :class:`GraphSpec` — a simple graph with labeled vertices and a role map,
  carrier of the lazy simple random walk.
* :class:`WeightedMultigraph` — labeled conductances with parallel edges
  allowed; the induced chain moves to a neighbour with probability
  (1 - holding) * w(x,y)/w(x) and is reversible for pi ~ w(x)/(1 - h(x)).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path

from .chain import ChainSpec, build_chain
from .errors import Disconnected, ExpanderSearchExhausted
from .serialize import fmt17


@dataclass
class GraphSpec:
    """Simple undirected graph with string vertex labels and named roles."""

    labels: list                 # vertex labels, index = vertex id
    edges: list                  # sorted list of (u, v) index pairs, u < v
    roles: dict = field(default_factory=dict)  # name -> index or list of indices

    @property
    def n_vertices(self):
        return len(self.labels)

    def degrees(self):
        deg = np.zeros(self.n_vertices, dtype=int)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency(self):
        n = self.n_vertices
        rows = [u for u, v in self.edges] + [v for u, v in self.edges]
        cols = [v for u, v in self.edges] + [u for u, v in self.edges]
        return sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n, n)
        )

    def distances_from(self, sources):
        """BFS distances (in edges) from a set of vertex indices."""
        adj = self.adjacency()
        d = shortest_path(adj, method="D", unweighted=True, indices=sources)
        if d.ndim == 2:
            d = d.min(axis=0)
        return d

    def is_connected(self):
        ncomp, _ = connected_components(self.adjacency(), directed=False)
        return ncomp == 1

    def to_edge_list_text(self):
        lines = []
        for u, v in self.edges:
            lines.append("%s %s %s" % (self.labels[u], self.labels[v], fmt17(1.0)))
        return "\n".join(lines) + "\n"

    def roles_json_obj(self):
        out = {}
        for name, val in self.roles.items():
            if isinstance(val, (list, tuple, np.ndarray)):
                out[name] = [self.labels[i] for i in val]
            else:
                out[name] = self.labels[val]
        return out


@dataclass
class WeightedMultigraph:
    """Conductance network; parallel edges allowed (kept as distinct edges)."""

    labels: list
    edges: list                  # list of (u, v, weight, edge_id)
    roles: dict = field(default_factory=dict)
    holding: np.ndarray = None   # per-vertex holding probability, default 1/2

    @property
    def n_vertices(self):
        return len(self.labels)

    def vertex_weights(self):
        w = np.zeros(self.n_vertices)
        for u, v, wt, _ in self.edges:
            w[u] += wt
            w[v] += wt
        return w

    def to_edge_list_text(self):
        lines = []
        for u, v, wt, eid in self.edges:
            lines.append("%s %s %s" % (self.labels[u], self.labels[v], fmt17(wt)))
        return "\n".join(lines) + "\n"

    def to_chain(self, chain_id="weighted"):
        """Reversible chain: P(x,y) = (1 - h(x)) w(x,y)/w(x).

        Parallel edges contribute their summed conductance.  Stationary law
        pi(x) ~ w(x)/(1 - h(x)), supplied exactly rather than re-solved.
        """
        n = self.n_vertices
        h = self.holding if self.holding is not None else np.full(n, 0.5)
        W = np.zeros((n, n))
        for u, v, wt, _ in self.edges:
            W[u, v] += wt
            W[v, u] += wt
        wx = W.sum(axis=1)
        if np.any(wx <= 0):
            raise Disconnected("isolated vertex")
        P = (1.0 - h)[:, None] * W / wx[:, None]
        np.fill_diagonal(P, np.diag(P) + h)
        pi = wx / (1.0 - h)
        pi = pi / pi.sum()
        return build_chain(P, labels=tuple(self.labels), stationary=pi,
                           chain_id=chain_id, tol=1e-9)


def lazy_srw_chain(g, chain_id="srw", sparse_threshold=600):
    """Lazy simple random walk on a connected simple graph.

    P(x,y) = 1[x=y]/2 + 1[adjacent]/(2 deg x); pi(x) = deg(x)/(2 |E|).
    Kernels above ``sparse_threshold`` vertices are stored sparse.
    """
    if not g.is_connected():
        raise Disconnected("graph is not connected")
    n = g.n_vertices
    deg = g.degrees()
    adj = g.adjacency()
    inv = 1.0 / (2.0 * deg)
    P = sp.diags(inv) @ adj + sp.eye(n) * 0.5
    pi = deg / (2.0 * len(g.edges))
    if n <= sparse_threshold:
        P = np.asarray(P.todense())
    else:
        P = sp.csr_matrix(P)
    return build_chain(P, labels=tuple(g.labels), stationary=pi,
                       chain_id=chain_id, tol=1e-9)


def _three_matchings(m, rng):
    """Union of 3 uniformly random perfect matchings on m vertices."""
    edges = set()
    simple = True
    for _ in range(3):
        perm = rng.permutation(m)
        for i in range(0, m, 2):
            u, v = int(perm[i]), int(perm[i + 1])
            if u > v:
                u, v = v, u
            if (u, v) in edges:
                simple = False
            edges.add((u, v))
    return sorted(edges), simple


def expander_3regular(m, seed=0, gap_threshold=0.05, max_resamples=100):
    """Seeded 3-regular expander: 3 perfect matchings, verified spectrally.

    Resamples deterministically from the seed stream until the graph is
    simple, connected, and the lazy SRW spectral gap (1 - lambda2) reaches
    ``gap_threshold``.  Returns (GraphSpec, achieved_gap).
    """
    from .spectral import eigen_summary

    if m % 2 or m < 4:
        raise ValueError("m must be even and >= 4")
    rng = np.random.default_rng(seed)
    for _ in range(max_resamples):
        edges, simple = _three_matchings(m, rng)
        if not simple:
            continue
        g = GraphSpec(labels=["x%d" % i for i in range(m)], edges=edges)
        if not g.is_connected():
            continue
        chain = lazy_srw_chain(g, chain_id="expander%d" % m,
                               sparse_threshold=10 ** 9)
        if m <= 4096:
            summary = eigen_summary(chain)
            gap = 1.0 - summary.lambda2
        else:
            from scipy.sparse.linalg import eigsh

            A = g.adjacency() / 6.0 + sp.eye(m) * 0.5
            vals = eigsh(A, k=2, which="LA", return_eigenvectors=False)
            gap = 1.0 - float(np.sort(vals)[0])
        if gap >= gap_threshold:
            return g, gap
    raise ExpanderSearchExhausted(
        "no 3-regular graph with gap >= %s in %d resamples"
        % (fmt17(gap_threshold), max_resamples)
    )
