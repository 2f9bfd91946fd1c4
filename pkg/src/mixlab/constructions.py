"""Every chain and graph construction used by the experiments.

Small chains (biased segments, the three weighted examples, the ratio-2
variant) are built from explicit conductances or transition tables and
validated by ``build_chain``.  The tree/expander graph family is assembled in
four steps:

1. ``build_H1``  — binary tree of depth n rooted at ``a`` with every edge in
   the first n/2 generations stretched into an L-edge path;
2. ``build_H2``  — n extra generations below the leaves with a 4-children /
   2-parents wiring whose fresh index draws make the bottom layer balanced
   seen from anywhere in H1;
3. ``build_Tn``  — depth-n binary tree whose two depth-(n-1) subtrees get
   their leaves merged pairwise by label; the first subtree (both, for the
   primed variant) gains an edge between every sibling pair of internal
   vertices, which slows that route down;
4. ``build_H4``  — a seeded 3-regular expander capping the merged leaf set.

``example4``/``example5`` glue the pieces exactly as the big-graph
experiments require, with deterministic labels so builds are byte-stable.
"""

import itertools

import numpy as np

from .chain import build_chain, stationary_via_detailed_balance
from .errors import Disconnected, NotLumpable, OddDepth, SizeOverflow
from .graphs import (
    GraphSpec,
    WeightedMultigraph,
    expander_3regular,
    lazy_srw_chain,
)
from dataclasses import dataclass

VERTEX_CAP = 50_000


# ---------------------------------------------------------------------------
# segment-style chains
# ---------------------------------------------------------------------------

def basic_segment_chain(n):
    """Biased lazy walk on a segment of length 2n with the mass at center z.

    Conductances halve away from z, so away from the endpoints the walk
    moves toward z with probability 1/3 and away with 1/6 (holding 1/2).
    """
    if n < 2:
        raise ValueError("n >= 2")
    labels = ["a%d" % i for i in range(n, 0, -1)] + ["z"] + \
             ["b%d" % i for i in range(1, n + 1)]
    idx = {lab: i for i, lab in enumerate(labels)}
    edges = []
    for i in range(1, n + 1):
        lo = "z" if i == 1 else "a%d" % (i - 1)
        edges.append((idx["a%d" % i], idx[lo], 2.0 ** -i, "eA%d" % i))
        lo = "z" if i == 1 else "b%d" % (i - 1)
        edges.append((idx["b%d" % i], idx[lo], 2.0 ** -i, "eB%d" % i))
    g = WeightedMultigraph(labels, edges, roles={"a": idx["a%d" % n],
                                                 "b": idx["b%d" % n],
                                                 "z": idx["z"]})
    return g.to_chain(chain_id="basic%d" % n)


def aldous_chain(n):
    """Biased walk toward z with two parallel branches of different speeds.

    b sits at distance n from z.  The two branches between z and the branch
    point have length ceil(n/2); the remaining segment plus the top branch
    run at quarter speed (holding 3/4), the bottom branch at holding 1/2.
    The total-variation profile drops in two stages, near 9n and 12n.
    """
    if n < 4:
        raise ValueError("n >= 4")
    h = -(-n // 2)          # branch length
    seg = n - h             # branch point to b
    labels = ["z"]
    labels += ["t%d" % j for j in range(1, h)]       # slow branch interior
    labels += ["f%d" % j for j in range(1, h)]       # fast branch interior
    labels += ["v"]                                   # branch point
    labels += ["s%d" % j for j in range(1, seg)]     # segment interior
    labels += ["b"]
    idx = {lab: i for i, lab in enumerate(labels)}

    def branch_label(pfx, j):
        if j == 0:
            return "z"
        if j == h:
            return "v"
        return "%s%d" % (pfx, j)

    def seg_label(j):
        if j == 0:
            return "v"
        if j == seg:
            return "b"
        return "s%d" % j

    edges = []
    for j in range(1, h + 1):
        edges.append((idx[branch_label("t", j)], idx[branch_label("t", j - 1)],
                      2.0 ** -j, "t%d" % j))
        edges.append((idx[branch_label("f", j)], idx[branch_label("f", j - 1)],
                      2.0 ** -j, "f%d" % j))
    for j in range(1, seg + 1):
        edges.append((idx[seg_label(j)], idx[seg_label(j - 1)],
                      2.0 ** -(h + j), "s%d" % j))
    holding = np.full(len(labels), 0.5)
    for lab in labels:
        if lab[0] in "tsb":      # top branch, segment and b hold with 3/4
            holding[idx[lab]] = 0.75
    g = WeightedMultigraph(labels, edges, holding=holding,
                           roles={"b": idx["b"], "z": idx["z"],
                                  "branch_point": idx["v"]})
    return g.to_chain(chain_id="aldous%d" % n)


def example1(n):
    """Two geometric-weight segments around z plus long edges to one side.

    Weights: w(e_k^A) = w(e_k^B) = 2^{-k}; long edges z-b_k carry
    3 * 2^{-(k+1)}/(n-1) for k < n and 2^{-n}/(n-1) for k = n, with the long
    edge to b_1 parallel to the segment edge.  Lazy with holding 1/2.
    """
    if n < 2:
        raise ValueError("n >= 2")
    labels = ["a%d" % i for i in range(n, 0, -1)] + ["z"] + \
             ["b%d" % i for i in range(1, n + 1)]
    idx = {lab: i for i, lab in enumerate(labels)}
    edges = []
    for k in range(1, n + 1):
        lo = "z" if k == 1 else "a%d" % (k - 1)
        edges.append((idx["a%d" % k], idx[lo], 2.0 ** -k, "eA%d" % k))
        lo = "z" if k == 1 else "b%d" % (k - 1)
        edges.append((idx["b%d" % k], idx[lo], 2.0 ** -k, "eB%d" % k))
    for k in range(1, n):
        edges.append((idx["z"], idx["b%d" % k],
                      3.0 * 2.0 ** -(k + 1) / (n - 1), "eL%d" % k))
    edges.append((idx["z"], idx["b%d" % n], 2.0 ** -n / (n - 1), "eL%d" % n))
    g = WeightedMultigraph(labels, edges, roles={"a": idx["a%d" % n],
                                                 "b": idx["b%d" % n],
                                                 "z": idx["z"]})
    return g.to_chain(chain_id="ex1_%d" % n)


def example1_published_kernel(n):
    """The published transition table of example 1, assembled literally.

    Independent oracle for the conductance construction.  The z -> a_1 entry
    is (n-1)/(4n+2-2^{-(n-3)}): with the exponent -(n-3) the z row sums to
    exactly 1 and detailed balance holds, which pins the formula.
    """
    labels = ["a%d" % i for i in range(n, 0, -1)] + ["z"] + \
             ["b%d" % i for i in range(1, n + 1)]
    idx = {lab: i for i, lab in enumerate(labels)}
    N = len(labels)
    P = np.zeros((N, N))
    for i in range(N):
        P[i, i] = 0.5
    D = 2 * n + 1 - 2.0 ** -(n - 2)
    P[idx["a%d" % n], idx["a%d" % (n - 1) if n > 1 else "z"]] = 0.5
    for i in range(1, n):
        down = "z" if i == 1 else "a%d" % (i - 1)
        P[idx["a%d" % i], idx[down]] = 1.0 / 3.0
        P[idx["a%d" % i], idx["a%d" % (i + 1)]] = 1.0 / 6.0
    for i in range(2, n + 1):
        P[idx["b%d" % i], idx["z"]] = 1.0 / (2 * n)
    for i in range(2, n):
        P[idx["b%d" % i], idx["b%d" % (i - 1)]] = (1.0 / 3.0) * (1 - 1.0 / n)
        P[idx["b%d" % i], idx["b%d" % (i + 1)]] = (1.0 / 6.0) * (1 - 1.0 / n)
    P[idx["b%d" % n], idx["b%d" % (n - 1)]] = 0.5 - 1.0 / (2 * n)
    P[idx["b1"], idx["z"]] = 1.0 / (2 * n) + (1.0 / 3.0) * (1 - 1.0 / n)
    P[idx["b1"], idx["b2"]] = (1.0 / 6.0) * (1 - 1.0 / n)
    P[idx["z"], idx["b1"]] = (2 * n + 1) / (4.0 * D)
    P[idx["z"], idx["a1"]] = (n - 1) / (4 * n + 2 - 2.0 ** -(n - 3))
    for k in range(2, n):
        P[idx["z"], idx["b%d" % k]] = 3.0 / (2.0 ** (k + 1) * D)
    P[idx["z"], idx["b%d" % n]] = 1.0 / (2.0 ** n * D)
    return P, labels


def example2(n):
    """Segments A and B at quarter speed plus a fast shortcut C to b_n.

    Transition table chain: holding 3/4 off C, 1/2 on C; b_n sends 1/12 to
    each of its three neighbours, which is the unique reversible choice.
    """
    if n < 2:
        raise ValueError("n >= 2")
    labels = ["z"] + ["a%d" % i for i in range(1, 2 * n + 1)] + \
             ["b%d" % i for i in range(1, 2 * n + 1)] + \
             ["c%d" % i for i in range(1, n)]
    idx = {lab: i for i, lab in enumerate(labels)}
    N = len(labels)
    P = np.zeros((N, N))

    def setp(x, y, p):
        P[idx[x], idx[y]] = p

    setp("z", "a1", 1 / 12)
    setp("z", "b1", 1 / 12)
    setp("z", "c1", 1 / 12)
    for s in "ab":
        for i in range(1, 2 * n):
            down = "z" if i == 1 else "%s%d" % (s, i - 1)
            if s == "b" and i == n:
                continue
            setp("%s%d" % (s, i), down, 1 / 6)
            setp("%s%d" % (s, i), "%s%d" % (s, i + 1), 1 / 12)
        setp("%s%d" % (s, 2 * n), "%s%d" % (s, 2 * n - 1), 1 / 4)
    # the junction b_n: all three neighbours at 1/12
    setp("b%d" % n, "b%d" % (n - 1) if n > 1 else "z", 1 / 12)
    setp("b%d" % n, "b%d" % (n + 1), 1 / 12)
    setp("b%d" % n, "c%d" % (n - 1), 1 / 12)
    for j in range(1, n):
        down = "z" if j == 1 else "c%d" % (j - 1)
        up = "b%d" % n if j == n - 1 else "c%d" % (j + 1)
        setp("c%d" % j, down, 1 / 3)
        setp("c%d" % j, up, 1 / 6)
    for i in range(N):
        P[i, i] = 1.0 - P[i].sum()
    pi = stationary_via_detailed_balance(P)
    return build_chain(P, labels=tuple(labels), stationary=pi,
                       chain_id="ex2_%d" % n, tol=1e-9)


def example3(n, M):
    """Long segments A, B into z' plus a slow branch C and fast branch D to z.

    Holding 3/4 on C, 1/2 elsewhere.  The z' row reads 1/6 toward each of
    c_{n-1}, d_{n-1} and 1/12 toward a_1, b_1 (the unique stochastic,
    reversible completion of the published rates).
    """
    if n < 2 or M < 2:
        raise ValueError("n >= 2 and M >= 2")
    labels = ["z", "zp"] + \
             ["a%d" % i for i in range(1, M * n + 1)] + \
             ["b%d" % i for i in range(1, M * n + 1)] + \
             ["c%d" % j for j in range(1, n)] + \
             ["d%d" % j for j in range(1, n)]
    idx = {lab: i for i, lab in enumerate(labels)}
    N = len(labels)
    P = np.zeros((N, N))

    def setp(x, y, p):
        P[idx[x], idx[y]] = p

    setp("z", "c1" if n > 1 else "zp", 1 / 4)
    setp("z", "d1" if n > 1 else "zp", 1 / 4)
    setp("zp", "c%d" % (n - 1), 1 / 6)
    setp("zp", "d%d" % (n - 1), 1 / 6)
    setp("zp", "a1", 1 / 12)
    setp("zp", "b1", 1 / 12)
    for s in "ab":
        for i in range(1, M * n):
            down = "zp" if i == 1 else "%s%d" % (s, i - 1)
            setp("%s%d" % (s, i), down, 1 / 3)
            setp("%s%d" % (s, i), "%s%d" % (s, i + 1), 1 / 6)
        setp("%s%d" % (s, M * n), "%s%d" % (s, M * n - 1), 1 / 2)
    for j in range(1, n):
        down = "z" if j == 1 else "c%d" % (j - 1)
        up = "zp" if j == n - 1 else "c%d" % (j + 1)
        setp("c%d" % j, down, 1 / 6)
        setp("c%d" % j, up, 1 / 12)
        down = "z" if j == 1 else "d%d" % (j - 1)
        up = "zp" if j == n - 1 else "d%d" % (j + 1)
        setp("d%d" % j, down, 1 / 3)
        setp("d%d" % j, up, 1 / 6)
    for i in range(N):
        P[i, i] = 1.0 - P[i].sum()
    pi = stationary_via_detailed_balance(P)
    return build_chain(P, labels=tuple(labels), stationary=pi,
                       chain_id="ex3_%d_%d" % (n, M), tol=1e-9)


def ratio_two_variant(n):
    """Two branches of length ceil(sqrt(n)) between z' and z, one slowed.

    Segment conductances halve toward the far ends; branch conductances are
    scaled by 2^m so that from z' the walk enters a branch with probability
    1/3.  The slow branch holds with 1 - 1/(2m), giving speed 1/(6m),
    m = ceil(sqrt(n)).  Total-variation mixing happens in two waves (6n and
    12n) while separation has cutoff near 12n.
    """
    if n < 4:
        raise ValueError("n >= 4")
    m = int(np.ceil(np.sqrt(n)))
    K = 2.0 ** m
    labels = ["z"]
    labels += ["f%d" % j for j in range(1, m)]
    labels += ["s%d" % j for j in range(1, m)]
    labels += ["zp"]
    labels += ["a%d" % i for i in range(1, n + 1)]
    labels += ["b%d" % i for i in range(1, n + 1)]
    idx = {lab: i for i, lab in enumerate(labels)}

    def br(pfx, j):
        if j == 0:
            return "z"
        if j == m:
            return "zp"
        return "%s%d" % (pfx, j)

    edges = []
    for j in range(1, m + 1):
        edges.append((idx[br("f", j)], idx[br("f", j - 1)], K * 2.0 ** -j,
                      "f%d" % j))
        edges.append((idx[br("s", j)], idx[br("s", j - 1)], K * 2.0 ** -j,
                      "s%d" % j))
    for s in "ab":
        for i in range(1, n + 1):
            down = "zp" if i == 1 else "%s%d" % (s, i - 1)
            edges.append((idx["%s%d" % (s, i)], idx[down], 2.0 ** -i,
                          "%s%d" % (s, i)))
    holding = np.full(len(labels), 0.5)
    for j in range(1, m):
        holding[idx["s%d" % j]] = 1.0 - 1.0 / (2 * m)
    g = WeightedMultigraph(labels, edges, holding=holding,
                           roles={"a": idx["a%d" % n], "b": idx["b%d" % n],
                                  "z": idx["z"], "zp": idx["zp"]})
    return g.to_chain(chain_id="ratio2_%d" % n)


# ---------------------------------------------------------------------------
# tree / expander graph family
# ---------------------------------------------------------------------------

class _GB:
    """Incremental labeled-graph builder."""

    def __init__(self):
        self.labels = []
        self.index = {}
        self.edges = set()

    def vertex(self, label):
        if label not in self.index:
            self.index[label] = len(self.labels)
            self.labels.append(label)
        return self.index[label]

    def edge(self, l1, l2):
        u, v = self.vertex(l1), self.vertex(l2)
        if u == v:
            raise ValueError("self loop at %s" % l1)
        self.edges.add((min(u, v), max(u, v)))

    def graph(self, roles):
        return GraphSpec(list(self.labels), sorted(self.edges), roles)


def _check_even(n):
    if n % 2:
        raise OddDepth("depth n must be even, got %d" % n)
    if n < 2:
        raise OddDepth("depth n must be >= 2")


def _add_tree_part(gb, pfx, n, L):
    """Stretched binary tree (step 1).  Returns the ordered leaf labels."""
    root = pfx + "r"
    gb.vertex(root)
    for g in range(1, n + 1):
        for bits in itertools.product("01", repeat=g):
            path = "".join(bits)
            node = pfx + "t" + path
            parent = root if g == 1 else pfx + "t" + path[:-1]
            if g <= n // 2 and L > 1:
                prev = parent
                for j in range(1, L):
                    mid = pfx + "m" + path + "." + str(j)
                    gb.edge(prev, mid)
                    prev = mid
                gb.edge(prev, node)
            else:
                gb.edge(parent, node)
    leaves = [pfx + "t" + "".join(bits)
              for bits in itertools.product("01", repeat=n)]
    return root, leaves


def _add_layers(gb, pfx, n, leaves, bottom_namer=None):
    """Step-2 layers below the 2^n leaves.  Returns the bottom layer labels.

    Layer m holds one vertex per (i_1..i_m, k) with i's in [4] and k in
    [2^{n-m}]; vertex (prefix, i, k) hangs from the two layer-(m-1)
    vertices (prefix, 2k-1) and (prefix, 2k).  ``bottom_namer(i)`` renames
    the bottom layer (used to merge two graphs along it).
    """
    bottom_index = {prefix: i for i, prefix in
                    enumerate(itertools.product("1234", repeat=n))}

    def name(mm, prefix, k):
        if mm == n and bottom_namer is not None:
            return bottom_namer(bottom_index[prefix])
        return "%su%d:%s:%d" % (pfx, mm, "".join(str(i) for i in prefix), k)

    for mm in range(1, n + 1):
        for prefix in itertools.product("1234", repeat=mm):
            for k in range(1, 2 ** (n - mm) + 1):
                child = name(mm, prefix, k)
                if mm == 1:
                    parents = [leaves[2 * k - 2], leaves[2 * k - 1]]
                else:
                    parents = [name(mm - 1, prefix[:-1], 2 * k - 1),
                               name(mm - 1, prefix[:-1], 2 * k)]
                for p in parents:
                    gb.edge(child, p)
    bottom = [name(n, prefix, 1)
              for prefix in itertools.product("1234", repeat=n)]
    return bottom


def _add_T_copy(gb, pfx, n, variant, root_label, leaf_namer):
    """Step-3 tree glued at ``root_label``; returns its merged-leaf labels.

    ``variant`` 1 adds sibling edges in the first subtree only; variant 2 in
    both.  Leaves of the two subtrees are merged pairwise by their path
    suffix; ``leaf_namer(suffix)`` names the merged vertices.
    """
    def node(path):
        return root_label if not path else pfx + "n" + path

    for g in range(1, n):
        for bits in itertools.product("01", repeat=g):
            path = "".join(bits)
            gb.edge(node(path[:-1]), node(path))
    merged = []
    for bits in itertools.product("01", repeat=n - 1):
        suffix = "".join(bits)
        leaf = leaf_namer(suffix)
        gb.edge(node("0" + suffix[:-1]) if n > 1 else node(""), leaf)
        gb.edge(node("1" + suffix[:-1]) if n > 1 else node(""), leaf)
        merged.append(leaf)
    sibling_roots = "01" if variant == 2 else "0"
    for g in range(1, n - 1):
        for bits in itertools.product("01", repeat=g):
            p = "".join(bits)
            if p[0] in sibling_roots:
                gb.edge(node(p + "0"), node(p + "1"))
    return merged


def _add_side(gb, pfx, n, L, upto, variant=1, bottom_namer=None,
              zleaf_namer=None):
    """Add one H-family side into ``gb``; returns a role dict.

    ``upto`` in {1, 2, 3}: stop after the stretched tree, after the layers,
    or after the glued step-3 trees.  ``bottom_namer``/``zleaf_namer``
    override vertex names for the shared merge sets.
    """
    root, leaves = _add_tree_part(gb, pfx, n, L)
    roles = {"root": root, "leaves": leaves}
    if upto == 1:
        return roles
    bottom = _add_layers(gb, pfx, n, leaves, bottom_namer=bottom_namer)
    roles["L2n"] = bottom
    if upto == 2:
        return roles
    zleaves = []
    for q, v in enumerate(bottom):
        def namer(suffix, q=q):
            if zleaf_namer is not None:
                return zleaf_namer(q, suffix)
            return "%sz%d:%s" % (pfx, q, suffix)
        zleaves.extend(_add_T_copy(gb, "%sc%d" % (pfx, q), n, variant, v,
                                   namer))
    roles["Z"] = zleaves
    return roles


def build_H1(n, L):
    _check_even(n)
    gb = _GB()
    roles = _add_side(gb, "", n, L, upto=1)
    return gb.graph({"a": gb.index[roles["root"]],
                     "leaves": [gb.index[x] for x in roles["leaves"]]})


def build_H2(n, L):
    _check_even(n)
    gb = _GB()
    roles = _add_side(gb, "", n, L, upto=2)
    return gb.graph({"a": gb.index[roles["root"]],
                     "leaves": [gb.index[x] for x in roles["leaves"]],
                     "L2n": [gb.index[x] for x in roles["L2n"]]})


def build_Tn(n, variant=1):
    """Standalone step-3 tree (variant 2 is the symmetric primed version)."""
    _check_even(n)
    gb = _GB()
    gb.vertex("R")
    merged = _add_T_copy(gb, "", n, variant, "R", lambda s: "F" + s)
    return gb.graph({"root": gb.index["R"],
                     "merged_leaves": [gb.index[x] for x in merged]})


def build_Tn_prime(n):
    return build_Tn(n, variant=2)


def build_H3(n, L, variant=1):
    _check_even(n)
    gb = _GB()
    roles = _add_side(gb, "", n, L, upto=3, variant=variant)
    return gb.graph({"a": gb.index[roles["root"]],
                     "L2n": [gb.index[x] for x in roles["L2n"]],
                     "Z": [gb.index[x] for x in roles["Z"]]})



def _auto_gap_threshold(m):
    """Verified-gap target for the 3-regular cap.

    The lazy SRW gap of a 3-regular graph cannot exceed 1/2 - sqrt(2)/3 +
    o(1) (about 0.029) as the graph grows, so the 0.05 default is only
    reachable for small vertex counts; larger caps target 0.02, well inside
    what near-Ramanujan random samples achieve.
    """
    return 0.05 if m <= 64 else 0.02

def build_H4(n, L, variant=1, seed=0, gap_threshold=None):
    _check_even(n)
    gb = _GB()
    roles = _add_side(gb, "", n, L, upto=3, variant=variant)
    zidx = [gb.index[x] for x in roles["Z"]]
    if gap_threshold is None:
        gap_threshold = _auto_gap_threshold(len(zidx))
    exp_graph, gap = expander_3regular(len(zidx), seed=seed,
                                       gap_threshold=gap_threshold)
    for (u, v) in exp_graph.edges:
        gb.edge(roles["Z"][u], roles["Z"][v])
    g = gb.graph({"a": gb.index[roles["root"]],
                  "L2n": [gb.index[x] for x in roles["L2n"]],
                  "Z": zidx})
    return g, gap


@dataclass
class GraphChain:
    """A graph-based chain with its construction parameters."""

    graph: GraphSpec
    chain: object
    n: int
    L: int
    seed: int = 0
    expander_gap: float = None

    @property
    def roles(self):
        return self.graph.roles

    def role_index(self, name):
        return self.graph.roles[name]


def _finish_graph_chain(gb, roles, n, L, seed, gap, chain_id):
    g = gb.graph(roles)
    if g.n_vertices > VERTEX_CAP:
        raise SizeOverflow("%d vertices exceeds cap %d"
                           % (g.n_vertices, VERTEX_CAP))
    deg = g.degrees()
    if deg.max() > 7:
        raise AssertionError("degree bound 7 violated: %d" % deg.max())
    chain = lazy_srw_chain(g, chain_id=chain_id)
    return GraphChain(g, chain, n, L, seed, gap)


def example4(n, L, seed=0, gap_threshold=None):
    """Two step-3 graphs glued along their bottom leaf sets, expander-capped.

    The side rooted at ``a`` uses the symmetric (primed) trees; the side
    rooted at ``b`` the asymmetric ones, so hitting the capped set Z from b
    splits over a fast and a slow route while from a it concentrates.
    """
    _check_even(n)
    gb = _GB()

    def zshared(q, suffix):
        return "Z%d:%s" % (q, suffix)

    ra = _add_side(gb, "A:", n, L, upto=3, variant=2, zleaf_namer=zshared)
    rb = _add_side(gb, "B:", n, L, upto=3, variant=1, zleaf_namer=zshared)
    assert ra["Z"] == rb["Z"]
    zlabels = ra["Z"]
    if gap_threshold is None:
        gap_threshold = _auto_gap_threshold(len(zlabels))
    exp_graph, gap = expander_3regular(len(zlabels), seed=seed,
                                       gap_threshold=gap_threshold)
    for (u, v) in exp_graph.edges:
        gb.edge(zlabels[u], zlabels[v])
    roles = {"a": gb.index[ra["root"]], "b": gb.index[rb["root"]],
             "Z": [gb.index[x] for x in zlabels],
             "A_L2n": [gb.index[x] for x in ra["L2n"]],
             "B_L2n": [gb.index[x] for x in rb["L2n"]]}
    return _finish_graph_chain(gb, roles, n, L, seed, gap,
                               "ex4_%d_%d_s%d" % (n, L, seed))


def example5(n, L, seed=0, gap_threshold=None):
    """A capped step-4 graph and a plain step-2 graph sharing their bottom
    layer Z' (4^n vertices), roots a and b."""
    _check_even(n)
    gb = _GB()

    def zp_shared(i):
        return "Zp:%d" % i

    ra = _add_side(gb, "A:", n, L, upto=3, variant=1, bottom_namer=zp_shared)
    zlabels = ra["Z"]
    if gap_threshold is None:
        gap_threshold = _auto_gap_threshold(len(zlabels))
    exp_graph, gap = expander_3regular(len(zlabels), seed=seed,
                                       gap_threshold=gap_threshold)
    for (u, v) in exp_graph.edges:
        gb.edge(zlabels[u], zlabels[v])
    rb = _add_side(gb, "B:", n, L, upto=2, bottom_namer=zp_shared)
    assert ra["L2n"] == rb["L2n"]
    roles = {"a": gb.index[ra["root"]], "b": gb.index[rb["root"]],
             "Z": [gb.index[x] for x in zlabels],
             "Zp": [gb.index[x] for x in ra["L2n"]]}
    return _finish_graph_chain(gb, roles, n, L, seed, gap,
                               "ex5_%d_%d_s%d" % (n, L, seed))


def stretched_excision(gc):
    """Induced subgraph after deleting everything within Ln/2 + 1 of a or b.

    Returns (GraphChain, cheeger_lower_bound).  The bound is the certified
    (1 - lambda2)/2 of the lazy walk on the remaining graph.
    """
    g = gc.graph
    cutoff = gc.L * gc.n // 2 + 1
    dist = g.distances_from([g.roles["a"], g.roles["b"]])
    keep = np.where(dist > cutoff)[0]
    keep_set = set(int(i) for i in keep)
    remap = {int(old): new for new, old in enumerate(keep)}
    edges = sorted((remap[u], remap[v]) for u, v in g.edges
                   if u in keep_set and v in keep_set)
    labels = [g.labels[i] for i in keep]
    roles = {}
    for name, val in g.roles.items():
        if isinstance(val, (list, tuple)):
            kept = [remap[i] for i in val if i in keep_set]
            if len(kept) == len(val):
                roles[name] = kept
        elif val in keep_set:
            roles[name] = remap[val]
    sub = GraphSpec(labels, edges, roles)
    if not sub.is_connected():
        raise Disconnected("excised graph is disconnected")
    chain = lazy_srw_chain(sub, chain_id=gc.chain.chain_id + "_hat")
    if sub.n_vertices <= 2000:
        from .spectral import eigen_summary

        lam2 = eigen_summary(chain).lambda2
    else:
        from scipy.sparse.linalg import eigsh

        S = _sym_sparse(chain)
        vals = eigsh(S, k=2, which="LA", return_eigenvectors=False)
        lam2 = float(np.sort(vals)[0])
    lower = (1.0 - lam2) / 2.0
    return GraphChain(sub, chain, gc.n, gc.L, gc.seed), lower


def _sym_sparse(chain):
    import scipy.sparse as sp

    root = np.sqrt(chain.stationary)
    D = sp.diags(root)
    Dinv = sp.diags(1.0 / root)
    S = D @ chain.kernel @ Dinv
    return (S + S.T) / 2.0


@dataclass
class ProjectionMap:
    """Distance-to-{a,b} lumping of the inner part of an example-5 graph."""

    fibers: list          # fibers[d] = list of vertex indices at distance d
    vertex_to_state: dict


def bd_projection(gc, tol=1e-12):
    """Project the radius-(L+3)n/2 neighbourhood of {a, b} onto distances.

    The projection of the lazy walk is Markovian because every vertex at a
    given distance has the same number of neighbours one step closer and one
    step further; the check below verifies that (raising ``NotLumpable``
    otherwise) and returns the tridiagonal projected chain.
    """
    g = gc.graph
    D = (gc.L + 3) * gc.n // 2
    dist = g.distances_from([g.roles["a"], g.roles["b"]])
    keep = np.where(dist <= D)[0]
    keep_set = set(int(i) for i in keep)
    remap = {int(old): new for new, old in enumerate(keep)}
    edges = sorted((remap[u], remap[v]) for u, v in g.edges
                   if u in keep_set and v in keep_set)
    labels = [g.labels[i] for i in keep]
    sub = GraphSpec(labels, edges, {})
    chain = lazy_srw_chain(sub, chain_id=gc.chain.chain_id + "_inner",
                           sparse_threshold=10 ** 9)
    sub_dist = dist[keep].astype(int)
    fibers = [list(np.where(sub_dist == d)[0]) for d in range(D + 1)]
    P = chain.dense_kernel()
    n_states = D + 1
    proj = np.zeros((n_states, n_states))
    worst = 0.0
    for d, fiber in enumerate(fibers):
        block = np.zeros((len(fiber), n_states))
        for dd in range(n_states):
            block[:, dd] = P[np.ix_(fiber, fibers[dd])].sum(axis=1)
        ref = block[0]
        worst = max(worst, float(np.abs(block - ref[None, :]).max()))
        proj[d] = ref
    if worst > tol:
        raise NotLumpable("lumping deviation %.3e" % worst)
    pm = ProjectionMap(fibers, {int(v): int(sub_dist[v])
                                for v in range(len(labels))})
    bd = build_chain(proj, labels=tuple("d%d" % d for d in range(n_states)),
                     chain_id=gc.chain.chain_id + "_proj", tol=1e-9)
    return pm, bd, worst
