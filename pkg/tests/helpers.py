"""Shared oracles and random-instance builders for the test suite.

Everything here is deliberately independent of the library's internals:
independence numbers by subset enumeration, certificate values by direct
formula evaluation, graphs built as raw adjacency matrices.
"""

import itertools

import numpy as np

from graphbandits.graphs import FeedbackGraph


def brute_alpha(adj: np.ndarray) -> int:
    """Independence number by enumerating subsets, largest first."""
    K = adj.shape[0]
    off = adj & ~np.eye(K, dtype=bool)
    for r in range(K, 0, -1):
        for comb in itertools.combinations(range(K), r):
            if not off[np.ix_(comb, comb)].any():
                return r
    return 0


def certificate_value(adj: np.ndarray, p: np.ndarray, b: float, nodes) -> float:
    """Direct evaluation of sum_{v in U} p(v)^(1+b) / P(v)."""
    P = adj @ p
    total = 0.0
    for v in nodes:
        if p[v] > 0.0:
            total += p[v] ** (1.0 + b) / P[v]
    return total


def random_graph_all_loops(rng: np.random.Generator, K: int, density: float | None = None) -> FeedbackGraph:
    """Random undirected graph with every self-loop present."""
    d = rng.random() if density is None else density
    upper = np.triu(rng.random((K, K)) < d, k=1)
    adj = upper | upper.T
    np.fill_diagonal(adj, True)
    return FeedbackGraph(adj)


def random_strongly_observable(rng: np.random.Generator, K: int, density: float | None = None) -> FeedbackGraph:
    """Random strongly observable graph where some nodes may lack self-loops.

    Nodes chosen to be loopless get joined to every other node, which is the
    only way a loopless node stays strongly observable in the undirected case.
    Guarantees at least one self-loop when K >= 2 so both estimator branches
    stay meaningful.
    """
    g = random_graph_all_loops(rng, K, density)
    adj = g.adj.copy()
    adj.setflags(write=True)
    n_loopless = int(rng.integers(0, max(1, K)))
    loopless = rng.choice(K, size=n_loopless, replace=False) if n_loopless else np.array([], dtype=int)
    if K >= 2 and len(loopless) == K:
        loopless = loopless[:-1]
    for v in loopless:
        adj[v, :] = True
        adj[:, v] = True
        adj[v, v] = False
    return FeedbackGraph(adj)


def random_simplex(rng: np.random.Generator, K: int, floor: float = 0.0) -> np.ndarray:
    """Dirichlet(1) draw, optionally mixed with uniform mass to bound min p."""
    p = rng.dirichlet(np.ones(K))
    if floor > 0.0:
        p = (1.0 - K * floor) * p + floor
    return p / p.sum()


def ftrl_objective(p: np.ndarray, L: np.ndarray, q: float, eta: float) -> float:
    """eta*<L,p> + psi_q(p), evaluated directly."""
    p = np.asarray(p, dtype=float)
    return eta * float(L @ p) + (1.0 - float(np.power(p, q).sum())) / (1.0 - q)


def ftrl_oracle_k2(L, q: float, eta: float) -> np.ndarray:
    """K=2 FTRL minimizer by bounded scalar minimization of the objective."""
    from scipy.optimize import minimize_scalar

    L = np.asarray(L, dtype=float)
    res = minimize_scalar(
        lambda x: ftrl_objective(np.array([x, 1.0 - x]), L, q, eta),
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return np.array([res.x, 1.0 - res.x])


def ftrl_oracle_k3(L, q: float, eta: float) -> np.ndarray:
    """K=3 FTRL minimizer by nested scalar minimization.

    The objective is jointly strictly convex, so g(x) = min_y F(x, y, 1-x-y)
    is convex in x and both stages are one-dimensional bounded minimizations
    of convex functions. Entirely independent of the KKT solver.
    """
    from scipy.optimize import minimize_scalar

    L = np.asarray(L, dtype=float)

    def inner(x: float):
        hi = 1.0 - x
        if hi <= 0.0:
            return ftrl_objective(np.array([x, 0.0, 0.0]), L, q, eta), 0.0
        res = minimize_scalar(
            lambda y: ftrl_objective(np.array([x, y, hi - y]), L, q, eta),
            bounds=(0.0, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return res.fun, float(res.x)

    outer = minimize_scalar(
        lambda x: inner(x)[0],
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": 1e-10},
    )
    x = float(outer.x)
    _, y = inner(x)
    return np.array([x, y, 1.0 - x - y])
