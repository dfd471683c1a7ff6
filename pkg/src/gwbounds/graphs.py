"""Random graphs, hop-count metrics, isomorphic pair synthesis and 1-WL.

Seeds may be integers or tuples of integers; each generation attempt draws
from ``PCG64(SeedSequence([*seed, attempt]))`` so a ``(model, n, seed)``
triple always reproduces the same graph.

Conventions fixed here:

* Barabasi-Albert starts from a star on ``m + 1`` nodes (node 0 is the hub)
  and attaches every further node to ``m`` distinct existing nodes chosen
  with probability proportional to their degree, giving ``m (n - m)`` edges.
* Watts-Strogatz and random-regular draws that come out disconnected are
  redrawn with the next attempt index, at most 100 times.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .exceptions import DomainError, GWBoundsError, ValidationError
from .spaces import MmSpace, StructuredSpace

MAX_RR_RESTARTS = 10_000
MAX_REDRAWS = 100


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    edges: frozenset
    node_features: np.ndarray = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValidationError(f"self-loop at node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u}, {v}) out of range for n = {self.n}")
            e = (min(u, v), max(u, v))
            if e in norm:
                raise ValidationError(f"duplicate edge {e}")
            norm.add(e)
        object.__setattr__(self, "edges", frozenset(norm))
        if self.node_features is not None:
            F = np.asarray(self.node_features, dtype=np.float64)
            if F.ndim == 1:
                F = F[:, None]
            if F.shape[0] != self.n:
                raise ValidationError("node_features must have one row per node")
            object.__setattr__(self, "node_features", F)

    def neighbors(self):
        adj = [[] for _ in range(self.n)]
        for u, v in sorted(self.edges):
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def degrees(self):
        deg = np.zeros(self.n, dtype=int)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency(self):
        if not self.edges:
            return csr_matrix((self.n, self.n))
        e = np.array(sorted(self.edges))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))

    def is_connected(self):
        return connected_components(self.adjacency(), directed=False)[0] == 1

    def relabeled(self, perm):
        """Node ``i`` of the result is node ``perm[i]`` of this graph."""
        perm = np.asarray(perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(self.n)
        edges = {(int(inv[u]), int(inv[v])) for u, v in self.edges}
        F = None if self.node_features is None else self.node_features[perm]
        return Graph(self.n, frozenset(edges), F, dict(self.metadata))

    def to_json(self):
        obj = {"n": self.n, "edges": [list(e) for e in sorted(self.edges)]}
        if self.node_features is not None:
            obj["features"] = self.node_features.tolist()
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(int(obj["n"]), frozenset(tuple(e) for e in obj["edges"]),
                   obj.get("features"))


@dataclass(frozen=True)
class GraphModel:
    """``kind`` is ``"ws"`` (k, p_e), ``"ba"`` (m) or ``"rr"`` (R)."""

    kind: str
    k: int = 4
    p_e: float = 0.1
    m: int = 5
    R: int = 3
    feature_kind: str = "none"
    p_b: float = 0.5

    def __post_init__(self):
        if self.kind not in ("ws", "ba", "rr"):
            raise DomainError(f"unknown graph model {self.kind!r}")
        if self.feature_kind not in ("none", "normal1d", "bernoulli"):
            raise DomainError(f"unknown feature kind {self.feature_kind!r}")
        if not 0 <= self.p_e <= 1 or not 0 <= self.p_b <= 1:
            raise DomainError("probabilities must lie in [0, 1]")

    def check(self, n):
        if self.kind == "ws" and not (self.k % 2 == 0 and 0 < self.k < n):
            raise DomainError(f"WS needs an even k with 0 < k < n, got k={self.k}, n={n}")
        if self.kind == "ba" and not (1 <= self.m < n):
            raise DomainError(f"BA needs 1 <= m < n, got m={self.m}, n={n}")
        if self.kind == "rr" and not ((self.R * n) % 2 == 0 and 0 <= self.R < n):
            raise DomainError(f"RR needs R*n even and R < n, got R={self.R}, n={n}")


def _rng(seed, attempt):
    entropy = list(seed) if isinstance(seed, (tuple, list)) else [seed]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([*entropy, attempt])))


def _watts_strogatz(n, k, p_e, rng):
    adj = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in adj[u] or rng.random() >= p_e:
                continue
            if len(adj[u]) >= n - 1:
                continue
            candidates = [w for w in range(n) if w != u and w not in adj[u]]
            w = candidates[rng.integers(len(candidates))]
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    return {(u, v) for u in range(n) for v in adj[u] if u < v}


def _barabasi_albert(n, m, rng):
    edges = {(0, v) for v in range(1, m + 1)}
    deg = np.zeros(n)
    deg[0] = m
    deg[1:m + 1] = 1
    for v in range(m + 1, n):
        prob = deg[:v] / deg[:v].sum()
        targets = rng.choice(v, size=m, replace=False, p=prob)
        for t in targets:
            edges.add((int(t), v))
            deg[t] += 1
        deg[v] = m
    return edges


def _random_regular(n, R, rng):
    stubs = np.repeat(np.arange(n), R)
    for _ in range(MAX_RR_RESTARTS):
        perm = rng.permutation(stubs)
        pairs = perm.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        edges = {(int(min(u, v)), int(max(u, v))) for u, v in pairs}
        if len(edges) == len(pairs):
            return edges
    raise GWBoundsError(f"pairing model found no simple {R}-regular graph in "
                        f"{MAX_RR_RESTARTS} restarts")


def _features(model, n, rng):
    if model.feature_kind == "normal1d":
        return rng.standard_normal((n, 1))
    if model.feature_kind == "bernoulli":
        return (rng.random((n, 1)) < model.p_b).astype(np.float64)
    return None


def generate(model, n, seed):
    """Draw a graph from ``model`` with ``n`` nodes; features drawn after topology."""
    model.check(n)
    for attempt in range(MAX_REDRAWS):
        rng = _rng(seed, attempt)
        if model.kind == "ws":
            edges = _watts_strogatz(n, model.k, model.p_e, rng)
        elif model.kind == "ba":
            edges = _barabasi_albert(n, model.m, rng)
        else:
            edges = _random_regular(n, model.R, rng)
        g = Graph(n, frozenset(edges))
        if model.kind == "ba" or n == 1 or g.is_connected():
            return Graph(n, g.edges, _features(model, n, rng), {"attempts": attempt + 1})
    raise GWBoundsError(f"no connected {model.kind} graph after {MAX_REDRAWS} draws")


def shortest_path_metric(g, largest_component=False):
    """Hop-count metric of ``g`` with the uniform measure.

    A disconnected graph is an error unless ``largest_component`` is set,
    in which case only the largest connected component is kept.
    """
    A = g.adjacency()
    D = shortest_path(A, method="D", directed=False, unweighted=True)
    if np.isinf(D).any():
        if not largest_component:
            raise ValidationError("graph is disconnected; hop distances are infinite")
        _, labels = connected_components(A, directed=False)
        keep = np.flatnonzero(labels == np.bincount(labels).argmax())
        D = D[np.ix_(keep, keep)]
    return MmSpace(D)


def structured_space(g, largest_component=False):
    mm = shortest_path_metric(g, largest_component)
    F = g.node_features
    if F is not None and mm.n != g.n:
        A = g.adjacency()
        _, labels = connected_components(A, directed=False)
        F = F[labels == np.bincount(labels).argmax()]
    return StructuredSpace(mm, F)


def make_graph_pair(model, n, seed, isomorphic):
    """Two graphs from ``model``: a relabelled copy, or two independent draws."""
    g1 = generate(model, n, (*_as_tuple(seed), 1))
    if isomorphic:
        perm = _rng((*_as_tuple(seed), 3), 0).permutation(n)
        g2 = g1.relabeled(perm)
    else:
        g2 = generate(model, n, (*_as_tuple(seed), 2))
    return g1, g2, bool(isomorphic)


def make_pair(model, n, seed, isomorphic):
    g1, g2, label = make_graph_pair(model, n, seed, isomorphic)
    return structured_space(g1), structured_space(g2), label


def _as_tuple(seed):
    return tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)


# ---------------------------------------------------------------------------
# Weisfeiler-Lehman


def _initial_colors(g1, g2, labels, bins):
    if labels == "degree":
        return [tuple([int(d)]) for d in g1.degrees()], [tuple([int(d)]) for d in g2.degrees()]
    if labels == "feature-binned":
        if g1.node_features is None or g2.node_features is None:
            raise ValidationError("feature-binned labels need node features on both graphs")
        both = np.vstack([g1.node_features, g2.node_features])
        lo, hi = both.min(axis=0), both.max(axis=0)
        span = np.where(hi > lo, hi - lo, 1.0)
        idx = np.clip(np.floor((both - lo) / span * bins), 0, bins - 1).astype(int)
        cols = [tuple(row) for row in idx]
        return cols[:g1.n], cols[g1.n:]
    raise DomainError(f"unknown WL labelling {labels!r}")


def wl_refinement(g1, g2, iterations=5, labels="degree", bins=10):
    """Joint 1-WL colour refinement.

    Returns ``"not-isomorphic"`` as soon as the colour histograms of the two
    graphs differ, ``"possibly-isomorphic"`` otherwise.
    """
    if iterations < 0:
        raise DomainError("iterations must be >= 0")
    c1, c2 = _initial_colors(g1, g2, labels, bins)
    adj1, adj2 = g1.neighbors(), g2.neighbors()
    for rnd in range(iterations + 1):
        palette = {}
        c1 = [palette.setdefault(c, len(palette)) for c in c1]
        c2 = [palette.setdefault(c, len(palette)) for c in c2]
        if sorted(c1) != sorted(c2):
            return "not-isomorphic"
        if rnd == iterations:
            break
        c1 = [(c1[u], tuple(sorted(c1[v] for v in adj1[u]))) for u in range(g1.n)]
        c2 = [(c2[u], tuple(sorted(c2[v] for v in adj2[u]))) for u in range(g2.n)]
    return "possibly-isomorphic"
