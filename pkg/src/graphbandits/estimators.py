"""Importance-weighted loss estimators for graph feedback.

Playing I_t under distribution p reveals the losses of every neighbor of
I_t. Writing P(i) = sum_{j in N(i)} p(j) for the probability that i's loss
is observed, the plain estimator is

    est(i) = loss(i) / P(i) * 1{I_t in N(i)},

unbiased whenever every node has a self-loop. The shifted variant handles
strongly observable graphs with loopless nodes: with S the loopless set and
J = {i in S : p(i) > 1/2} (at most one node),

    est(i) = (loss(i) - 1) / P(i) * 1{I_t in N(i)} + 1     for i in J,

and the plain rule elsewhere. Both are exactly unbiased; the shifted rule
keeps the second moment controlled for the one action that may have
probability above 1/2 while being observed only with probability 1 - p(i).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateProbability,
    InvalidParams,
    MissingSelfLoop,
    NotStronglyObservable,
)
from .graphs import FeedbackGraph, check_distribution

P_FLOOR = 1e-300


@dataclass(frozen=True)
class RoundObservation:
    """What one round reveals: the action played and the losses of its neighbors.

    observed maps node id -> loss for exactly the nodes of N(chosen).
    """

    chosen: int
    graph: FeedbackGraph
    observed: dict

    def __post_init__(self):
        g = self.graph
        if not (0 <= self.chosen < g.K):
            raise InvalidParams(f"chosen action {self.chosen} out of range for K={g.K}")
        want = set(g.neighbors(self.chosen).tolist())
        got = set(self.observed)
        if got != want:
            raise InvalidParams(
                f"observed keys {sorted(got)} must be exactly N({self.chosen}) = {sorted(want)}"
            )
        for i, v in self.observed.items():
            if not (0.0 <= float(v) <= 1.0):
                raise InvalidParams(f"loss at node {i} must lie in [0,1], got {v}")


def make_observation(graph: FeedbackGraph, chosen: int, losses) -> RoundObservation:
    """Observation for playing `chosen` against a full loss vector."""
    losses = np.asarray(losses, dtype=np.float64)
    idx = graph.neighbors(chosen)
    return RoundObservation(chosen, graph, {int(i): float(losses[i]) for i in idx})


def neighborhood_prob(g: FeedbackGraph, p, i: int) -> float:
    """P(i) = sum of p over N(i): the chance the played action reveals i."""
    p = check_distribution(p, g.K)
    return float(g.adj[i] @ p)


def _importance_weighted(obs: RoundObservation, p: np.ndarray) -> np.ndarray:
    g = obs.graph
    P = g.neighborhood_sums(p)
    idx = g.neighbors(obs.chosen)
    Pn = P[idx]
    if np.any(Pn < P_FLOOR):
        bad = int(idx[int(np.argmin(Pn))])
        raise DegenerateProbability(f"P({bad}) underflowed below {P_FLOOR}")
    values = np.zeros(g.K)
    values[idx] = np.array([obs.observed[int(i)] for i in idx]) / Pn
    return values


def estimate_basic(obs: RoundObservation, p) -> np.ndarray:
    """Plain importance-weighted estimate; every node must have a self-loop."""
    g = obs.graph
    p = check_distribution(p, g.K)
    loops = g.self_loops
    if not loops.all():
        raise MissingSelfLoop(f"node {int(np.flatnonzero(~loops)[0])} has no self-loop")
    return _importance_weighted(obs, p)


def estimate_shifted(obs: RoundObservation, p) -> np.ndarray:
    """Shifted estimate for strongly observable graphs (loopless nodes allowed).

    Reduces to estimate_basic, bit for bit, when every self-loop is present.
    """
    g = obs.graph
    p = check_distribution(p, g.K)
    if not g.strongly_observable:
        raise NotStronglyObservable("shifted estimator needs a strongly observable graph")
    values = _importance_weighted(obs, p)
    loopless = np.flatnonzero(~g.self_loops)
    for j in loopless:
        if p[j] > 0.5:
            # at most one such node exists; rewrite its entry with the
            # shifted rule so the estimate stays 1 when j goes unobserved
            if g.adj[obs.chosen, j]:
                Pj = float(g.adj[j] @ p)
                if Pj < P_FLOOR:
                    raise DegenerateProbability(f"P({int(j)}) underflowed below {P_FLOOR}")
                values[j] = (obs.observed[int(j)] - 1.0) / Pj + 1.0
            else:
                values[j] = 1.0
    return values
