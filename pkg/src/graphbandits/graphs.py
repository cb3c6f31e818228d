"""Undirected feedback graphs with self-loops, and the quantities the learner
theory needs from them: strong observability, independence numbers, and the
graph-theoretic variance certificate

    sum_{v in U} p(v)^{1+b} / P(v)  <=  alpha(G)^{1-b},
    P(v) = sum_{u in N(v)} p(u),

valid for any b in [0,1] and any nonempty set U of self-looped nodes.

Nodes are 0..K-1 in the API. The text serialization (`K <int>` header, one
`i j` pair per line) is 1-indexed, with self-loops written as `i i`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDistribution, InvalidParams, InvalidSubset, SizeLimitExceeded

SIMPLEX_TOL = 1e-9


class FeedbackGraph:
    """Immutable undirected graph over K nodes, self-loops allowed.

    Stores a read-only boolean adjacency matrix; adj[i, j] means action j is
    observed when action i is played. Symmetry is enforced at construction.
    """

    __slots__ = ("adj", "_strongly_observable")

    def __init__(self, adj: np.ndarray):
        adj = np.asarray(adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
            raise InvalidParams(f"adjacency must be square and nonempty, got shape {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise InvalidParams("adjacency must be symmetric (undirected graph)")
        adj = adj.copy()
        adj.setflags(write=False)
        self.adj = adj
        self._strongly_observable = None

    @property
    def K(self) -> int:
        return self.adj.shape[0]

    @property
    def self_loops(self) -> np.ndarray:
        return np.diagonal(self.adj)

    def neighbors(self, i: int) -> np.ndarray:
        """Ids of N(i), including i itself when the self-loop is present."""
        return np.flatnonzero(self.adj[i])

    def neighborhood_sums(self, p: np.ndarray) -> np.ndarray:
        """P(i) = sum of p over N(i), for all i at once."""
        return self.adj @ p

    @property
    def strongly_observable(self) -> bool:
        if self._strongly_observable is None:
            self._strongly_observable = validate_strong_observability(self)
        return self._strongly_observable

    @classmethod
    def from_edges(cls, K: int, edges) -> "FeedbackGraph":
        """Build from 0-based (i, j) pairs; (i, i) adds a self-loop."""
        adj = np.zeros((K, K), dtype=bool)
        for i, j in edges:
            if not (0 <= i < K and 0 <= j < K):
                raise InvalidParams(f"edge ({i},{j}) out of range for K={K}")
            adj[i, j] = adj[j, i] = True
        return cls(adj)

    def __eq__(self, other) -> bool:
        return isinstance(other, FeedbackGraph) and np.array_equal(self.adj, other.adj)

    def __hash__(self) -> int:
        return hash((self.K, self.adj.tobytes()))

    def __repr__(self) -> str:
        return f"FeedbackGraph(K={self.K}, edges={int(np.count_nonzero(self.adj))} entries)"


@dataclass(frozen=True)
class IndependenceCertificate:
    """Independence number claim plus the witness set that backs it.

    method "exact" certifies alpha == alpha(G); "greedy-lower-bound" only
    certifies alpha(G) >= alpha. witness is always an independent set of the
    claimed size (self-loops ignored).
    """

    alpha: int
    witness: tuple[int, ...]
    method: str


def validate_strong_observability(g: FeedbackGraph) -> bool:
    """True iff every node either sees itself or is seen by all other nodes.

    In the undirected case "seen by all others" means adjacent to every other
    node, so a node without a self-loop must have a full off-diagonal row.
    """
    adj = g.adj
    K = g.K
    loop = np.diagonal(adj)
    off_degree = adj.sum(axis=1) - loop
    return bool(np.all(loop | (off_degree == K - 1)))


def independence_number(g: FeedbackGraph, mode: str = "exact", exact_limit: int = 40) -> IndependenceCertificate:
    """Independence number of g (self-loops ignored).

    mode "exact" runs branch-and-bound (max clique on the complement with a
    greedy-coloring bound) and refuses graphs above exact_limit nodes. mode
    "greedy" returns a min-degree greedy independent set, whose size is a
    lower bound on alpha(G).
    """
    if mode == "exact":
        if g.K > exact_limit:
            raise SizeLimitExceeded(f"K={g.K} exceeds exact_limit={exact_limit}")
        size, members = _max_clique_complement(g)
        return IndependenceCertificate(size, tuple(sorted(members)), "exact")
    if mode == "greedy":
        members = _greedy_independent_set(g)
        return IndependenceCertificate(len(members), tuple(sorted(members)), "greedy-lower-bound")
    raise InvalidParams(f"unknown mode {mode!r}")


def _max_clique_complement(g: FeedbackGraph):
    """Maximum independent set of g as a maximum clique of the complement.

    Tomita-style search: candidates are greedily colored and visited in
    reverse color order, pruning branches where |R| + color <= best so far.
    Bitmask candidate sets keep the inner loop cheap at desk scale.
    """
    K = g.K
    off = g.adj & ~np.eye(K, dtype=bool)
    comp = ~off & ~np.eye(K, dtype=bool)
    cadj = [
        int.from_bytes(np.packbits(comp[i], bitorder="little").tobytes(), "little")
        for i in range(K)
    ]

    best_size = 0
    best_set: list[int] = []
    cur: list[int] = []

    def color_sort(pmask: int):
        order: list[int] = []
        bounds: list[int] = []
        color = 0
        rest = pmask
        while rest:
            color += 1
            avail = rest
            while avail:
                v = (avail & -avail).bit_length() - 1
                bit = 1 << v
                avail &= ~cadj[v]
                avail &= ~bit
                rest &= ~bit
                order.append(v)
                bounds.append(color)
        return order, bounds

    def expand(pmask: int):
        nonlocal best_size, best_set
        order, bounds = color_sort(pmask)
        for idx in range(len(order) - 1, -1, -1):
            if len(cur) + bounds[idx] <= best_size:
                return
            v = order[idx]
            cur.append(v)
            sub = pmask & cadj[v]
            if sub:
                expand(sub)
            elif len(cur) > best_size:
                best_size = len(cur)
                best_set = cur.copy()
            cur.pop()
            pmask &= ~(1 << v)

    expand((1 << K) - 1)
    return best_size, best_set


def _greedy_independent_set(g: FeedbackGraph) -> list[int]:
    """Min-degree greedy: pick the lowest-degree live node (lowest id on ties),
    drop its closed neighborhood, repeat."""
    K = g.K
    off = g.adj & ~np.eye(K, dtype=bool)
    alive = np.ones(K, dtype=bool)
    picked: list[int] = []
    while alive.any():
        deg = (off & alive).sum(axis=1)
        deg = np.where(alive, deg, K + 1)
        v = int(np.argmin(deg))
        picked.append(v)
        alive &= ~off[v]
        alive[v] = False
    return picked


def check_distribution(p, K: int | None = None) -> np.ndarray:
    """Validate p as a probability vector; returns it as a float64 array."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or (K is not None and p.shape[0] != K):
        raise InvalidDistribution(f"expected a length-{K} probability vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise InvalidDistribution("probabilities must be finite and nonnegative")
    if abs(float(p.sum()) - 1.0) > SIMPLEX_TOL:
        raise InvalidDistribution(f"probabilities sum to {p.sum()!r}, off the simplex")
    return p


def variance_certificate(g: FeedbackGraph, p, b: float, U=None):
    """Evaluate sum_{v in U} p(v)^{1+b} / P(v) and certify it constructively.

    Returns (value, greedy_set) where greedy_set S is an independent set with
    value <= sum_{v in S} p(v)^b <= alpha(G)^{1-b}. S comes from the greedy
    rule run on the subgraph induced by U: repeatedly take the live node
    maximizing p(v)^b / sum_{u in N_{G[U]}(v)} p(u) (scores frozen at the
    start; ties to the lowest id) and delete its closed neighborhood.

    U defaults to all self-looped nodes and must be a nonempty set of
    self-looped nodes; p must be on the simplex; b in [0, 1].
    """
    p = check_distribution(p, g.K)
    if not (0.0 <= b <= 1.0):
        raise InvalidParams(f"b must lie in [0,1], got {b}")
    loops = g.self_loops
    if U is None:
        nodes = np.flatnonzero(loops)
        if nodes.size == 0:
            raise InvalidSubset("graph has no self-looped nodes")
    else:
        nodes = np.array(sorted(set(int(v) for v in U)), dtype=np.intp)
        if nodes.size == 0:
            raise InvalidSubset("U must be nonempty")
        if np.any(nodes < 0) or np.any(nodes >= g.K):
            raise InvalidSubset("U contains node ids out of range")
        if not np.all(loops[nodes]):
            raise InvalidSubset("every node of U must have a self-loop")

    P = g.neighborhood_sums(p)
    pu = p[nodes]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = pu ** (1.0 + b) / P[nodes]
    value = float(np.where(pu > 0.0, terms, 0.0).sum())

    # Greedy certificate on G[U]; denominators are the induced neighborhood
    # sums, fixed once (removal only shrinks the candidate pool).
    adj_u = g.adj[np.ix_(nodes, nodes)]
    P_u = adj_u @ pu
    num = pu ** b
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = num / P_u
    scores = np.where(num == 0.0, 0.0, scores)

    alive = np.ones(nodes.size, dtype=bool)
    chosen: list[int] = []
    while alive.any():
        masked = np.where(alive, scores, -np.inf)
        v = int(np.argmax(masked))
        chosen.append(int(nodes[v]))
        alive &= ~adj_u[v]
        alive[v] = False
    return value, tuple(sorted(chosen))


def generate_graph(kind: str, K: int, sizes=None, prob: float | None = None,
                   seed: int | None = None, hubs: int = 1) -> FeedbackGraph:
    """Construct one of the stock strongly observable families.

    bandit            self-loops only.
    experts           complete graph including self-loops.
    disjoint_cliques  cliques of the given sizes (must sum to K), self-loops on.
    erdos_renyi       each off-diagonal pair independently with prob; all
                      self-loops forced, so the result stays strongly observable.
    no_selfloop_star  `hubs` nodes without self-loops joined to everything;
                      the rest carry self-loops and no edges among themselves.
    """
    if K < 1:
        raise InvalidParams(f"K must be >= 1, got {K}")
    if kind == "bandit":
        return FeedbackGraph(np.eye(K, dtype=bool))
    if kind == "experts":
        return FeedbackGraph(np.ones((K, K), dtype=bool))
    if kind == "disjoint_cliques":
        if not sizes or any(int(s) < 1 for s in sizes) or sum(int(s) for s in sizes) != K:
            raise InvalidParams(f"sizes must be positive and sum to K={K}, got {sizes}")
        adj = np.zeros((K, K), dtype=bool)
        start = 0
        for s in sizes:
            s = int(s)
            adj[start:start + s, start:start + s] = True
            start += s
        return FeedbackGraph(adj)
    if kind == "erdos_renyi":
        if prob is None or not (0.0 <= prob <= 1.0):
            raise InvalidParams(f"erdos_renyi needs prob in [0,1], got {prob}")
        rng = np.random.default_rng(0 if seed is None else seed)
        upper = np.triu(rng.random((K, K)) < prob, k=1)
        adj = upper | upper.T
        np.fill_diagonal(adj, True)
        return FeedbackGraph(adj)
    if kind == "no_selfloop_star":
        if not (1 <= hubs <= K):
            raise InvalidParams(f"hubs must be in [1, K], got {hubs}")
        adj = np.zeros((K, K), dtype=bool)
        adj[:hubs, :] = True
        adj[:, :hubs] = True
        np.fill_diagonal(adj, True)
        adj[np.arange(hubs), np.arange(hubs)] = False
        return FeedbackGraph(adj)
    raise InvalidParams(f"unknown graph kind {kind!r}")


def format_edge_list(g: FeedbackGraph) -> str:
    """Serialize to the 1-indexed edge-list text format (`K <int>` header)."""
    lines = [f"K {g.K}"]
    ii, jj = np.nonzero(np.triu(g.adj))
    for i, j in zip(ii.tolist(), jj.tolist()):
        lines.append(f"{i + 1} {j + 1}")
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> FeedbackGraph:
    """Parse the edge-list text format; inverse of format_edge_list."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("K"):
        raise InvalidParams("edge list must start with a 'K <int>' header")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "K":
        raise InvalidParams(f"malformed header {lines[0]!r}")
    try:
        K = int(head[1])
    except ValueError as exc:
        raise InvalidParams(f"malformed header {lines[0]!r}") from exc
    if K < 1:
        raise InvalidParams(f"K must be >= 1, got {K}")
    adj = np.zeros((K, K), dtype=bool)
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise InvalidParams(f"malformed edge line {ln!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise InvalidParams(f"malformed edge line {ln!r}") from exc
        if not (1 <= i <= K and 1 <= j <= K):
            raise InvalidParams(f"edge {ln!r} out of range for K={K}")
        adj[i - 1, j - 1] = adj[j - 1, i - 1] = True
    return FeedbackGraph(adj)
