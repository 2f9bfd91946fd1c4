"""Seeded random reversible lazy chains for the verification suites.

Chains are drawn as conductance networks: a random spanning tree plus a few
extra edges, log-uniform weights, and a per-vertex holding probability in
[1/2, 0.9].  This gives reversible lazy kernels with a wide spread of
stationary masses and relaxation times.
"""

import numpy as np

from .graphs import WeightedMultigraph


def random_reversible_lazy_chain(rng, max_states=25, min_states=2,
                                 chain_id=None):
    n = int(rng.integers(min_states, max_states + 1))
    edges = []
    # random spanning tree: attach each vertex to a random earlier one
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v))
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u != v and (min(u, v), max(u, v)) not in [(min(a, b), max(a, b))
                                                     for a, b in edges]:
            edges.append((min(u, v), max(u, v)))
    weights = np.exp(rng.uniform(-3, 3, size=len(edges)))
    holding = rng.uniform(0.5, 0.9, size=n)
    labels = ["s%d" % i for i in range(n)]
    wedges = [(u, v, float(w), "e%d" % i)
              for i, ((u, v), w) in enumerate(zip(edges, weights))]
    g = WeightedMultigraph(labels, wedges, holding=holding)
    cid = chain_id or "rand%d" % n
    return g.to_chain(chain_id=cid)


def named_stream(seed, name):
    """Independent RNG stream derived from (seed, name).

    New consumers get new names and never shift existing streams.
    """
    import zlib

    child = np.random.SeedSequence([int(seed) & (2 ** 64 - 1),
                                    zlib.crc32(name.encode())])
    return np.random.default_rng(child)
