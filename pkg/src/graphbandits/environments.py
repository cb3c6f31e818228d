"""Loss/graph stream environments, including the multitask-bandit family.

Environments are oblivious: every loss vector and graph choice is realized
at build time from a seeded PCG64 stream, so a stream can be replayed,
serialized, and compared across learners. Loss draws never depend on graph
parameters, which makes cross-graph comparisons at a fixed seed paired.

The multitask-bandit (MTB) family instantiates the regret lower bound: with
M = floor(log_alpha K) games, actions are base-alpha digit vectors; game i's
feedback graph partitions actions into alpha disjoint self-looped cliques by
their i-th digit, so alpha(G^i) = alpha exactly. Each round draws a game i
uniformly, then one Bernoulli loss per clique with mean 1/2, lowered by eps
on the clique whose digit matches the target action. Losses are constant on
cliques, so feedback within a clique reveals nothing about the others. With

    eps = min(1/4, sqrt(2 M alpha / (c T)) / 4),    c = 8 ln(4/3),

no learner can beat Theta(sqrt(alpha T log_alpha K)) regret on the family.
The constant c is the tight Bernoulli KL bound kl(1/2, 1/2-eps) <= c eps^2
for eps <= 1/4 (natural log); it is exposed for experimentation.

When K is not an exact power of alpha, the excess actions clone the
designated action (digit vector all zeros): same loss entries, same
adjacency rows, hence the same cliques, keeping alpha(G^i) = alpha.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidParams
from .graphs import FeedbackGraph, format_edge_list, generate_graph, independence_number, parse_edge_list

KL_CONSTANT = 8.0 * math.log(4.0 / 3.0)

LOSS_KINDS = ("constant", "bernoulli", "gap_bernoulli", "shifting_gap")
ENVIRONMENT_KINDS = ("fixed_adversarial", "time_varying", "mtb_lower_bound")


class Environment:
    """A fixed stream of T rounds: (graph, loss vector in [0,1]^K)."""

    def __init__(self, graphs: list[FeedbackGraph], graph_ids, losses):
        if not graphs:
            raise InvalidParams("environment needs at least one graph")
        K = graphs[0].K
        if any(g.K != K for g in graphs):
            raise InvalidParams("all graphs in a stream must share K")
        graph_ids = np.asarray(graph_ids, dtype=np.int64)
        losses = np.asarray(losses, dtype=np.float64)
        if graph_ids.ndim != 1 or losses.shape != (graph_ids.size, K):
            raise InvalidParams(
                f"need graph_ids (T,) and losses (T,K); got {graph_ids.shape} and {losses.shape}"
            )
        if graph_ids.size < 1:
            raise InvalidParams("environment needs at least one round")
        if graph_ids.min() < 0 or graph_ids.max() >= len(graphs):
            raise InvalidParams("graph_ids reference unknown graphs")
        if not np.all(np.isfinite(losses)) or losses.min() < 0.0 or losses.max() > 1.0:
            raise InvalidParams("losses must lie in [0,1]")
        self.graphs = list(graphs)
        self.graph_ids = graph_ids
        self.losses = losses
        self._alpha_by_graph: list[int] | None = None

    @property
    def K(self) -> int:
        return self.graphs[0].K

    @property
    def T(self) -> int:
        return int(self.graph_ids.size)

    def round(self, t: int):
        """(graph, losses) for round t, 1-based."""
        if not (1 <= t <= self.T):
            raise InvalidParams(f"round t must lie in [1, {self.T}], got {t}")
        return self.graphs[self.graph_ids[t - 1]], self.losses[t - 1]

    def graph_alphas(self) -> list[int]:
        """Exact independence number of each distinct graph (cached)."""
        if self._alpha_by_graph is None:
            self._alpha_by_graph = [independence_number(g).alpha for g in self.graphs]
        return self._alpha_by_graph

    def round_alphas(self) -> np.ndarray:
        return np.asarray(self.graph_alphas(), dtype=np.float64)[self.graph_ids]

    def best_fixed_action(self) -> int:
        return int(np.argmin(self.losses.sum(axis=0)))

    def best_fixed_loss(self) -> float:
        return float(self.losses.sum(axis=0).min())


class MtbEnvironment(Environment):
    """Multitask-bandit stream; one graph per game, clique-constant losses."""

    def __init__(self, graphs, graph_ids, losses, alpha, M, epsilon, digit_map, target_digits):
        super().__init__(graphs, graph_ids, losses)
        self.alpha = int(alpha)
        self.M = int(M)
        self.epsilon = float(epsilon)
        self.digit_map = digit_map  # (K, M) int array; row = action's digits
        self.target_digits = tuple(int(d) for d in target_digits)
        self.target_index = int(sum(d * alpha**i for i, d in enumerate(self.target_digits)))

    def expected_uniform_regret_per_round(self) -> float:
        """Exact per-round regret of the uniform policy against the target.

        eps * (1 - 1/alpha) when K is a power of alpha; the digit-count form
        below also covers cloned excess actions.
        """
        agree = 0.0
        for i in range(self.M):
            agree += float(np.mean(self.digit_map[:, i] == self.target_digits[i]))
        return self.epsilon * (1.0 - agree / self.M)


def mtb_build(K: int, alpha: int, T: int, target_action=None, seed=0,
              kl_constant: float = KL_CONSTANT) -> MtbEnvironment:
    """Realize T rounds of the multitask-bandit environment.

    target_action is the digit vector (length floor(log_alpha K), entries in
    [0, alpha)) of the action the environment favors; None draws it uniformly
    from the build stream. The unclipped gap eps needs
    T >= alpha * log_alpha(K) / (4 ln(4/3)); below that, eps clips to 1/4.
    """
    if not isinstance(alpha, (int, np.integer)) or alpha < 2:
        raise InvalidParams(f"alpha must be an integer >= 2, got {alpha}")
    if K < alpha:
        raise InvalidParams(f"need K >= alpha, got K={K}, alpha={alpha}")
    if T < 1:
        raise InvalidParams(f"T must be >= 1, got {T}")
    if kl_constant <= 0.0:
        raise InvalidParams(f"kl_constant must be positive, got {kl_constant}")

    M = 1
    while alpha ** (M + 1) <= K:
        M += 1
    base = alpha**M

    rng = np.random.default_rng(seed)
    if target_action is None:
        target_digits = rng.integers(0, alpha, size=M)
    else:
        target_digits = np.asarray(target_action, dtype=np.int64)
        if target_digits.shape != (M,) or target_digits.min() < 0 or target_digits.max() >= alpha:
            raise InvalidParams(
                f"target_action must be {M} digits in [0,{alpha}), got {target_action}"
            )

    digit_map = np.zeros((K, M), dtype=np.int64)
    actions = np.arange(base)
    for i in range(M):
        digit_map[:base, i] = (actions // alpha**i) % alpha
    # excess actions clone the designated action 0 (all-zero digits)

    graphs = [
        FeedbackGraph(digit_map[:, i][:, None] == digit_map[:, i][None, :])
        for i in range(M)
    ]

    eps = min(0.25, 0.25 * math.sqrt(2.0 * M * alpha / (kl_constant * T)))

    game_ids = rng.integers(0, M, size=T)
    mu = np.full((T, alpha), 0.5)
    mu[np.arange(T), target_digits[game_ids]] -= eps
    gammas = (rng.random((T, alpha)) < mu).astype(np.float64)
    losses = np.take_along_axis(gammas, digit_map[:, game_ids].T, axis=1)

    return MtbEnvironment(graphs, game_ids, losses, alpha, M, eps, digit_map, target_digits)


def mtb_round(env: MtbEnvironment, t: int):
    """(graph, losses) of round t; alias for env.round(t)."""
    return env.round(t)


# ------------------------------------------------------------------ spec-driven


def _build_graph(gspec: dict, K: int) -> FeedbackGraph:
    if not isinstance(gspec, dict) or "kind" not in gspec:
        raise InvalidParams(f"graph spec needs a 'kind', got {gspec!r}")
    kind = gspec["kind"]
    kwargs = {}
    if "sizes" in gspec:
        kwargs["sizes"] = gspec["sizes"]
    if "prob" in gspec:
        kwargs["prob"] = gspec["prob"]
    if "seed" in gspec:
        kwargs["seed"] = gspec["seed"]
    if "hubs" in gspec:
        kwargs["hubs"] = gspec["hubs"]
    return generate_graph(kind, K, **kwargs)


def _loss_matrix(lspec: dict, K: int, T: int, rng: np.random.Generator) -> np.ndarray:
    if not isinstance(lspec, dict) or "kind" not in lspec:
        raise InvalidParams(f"loss spec needs a 'kind', got {lspec!r}")
    kind = lspec["kind"]
    if kind == "constant":
        values = np.asarray(lspec.get("values"), dtype=np.float64)
        if values.shape != (K,):
            raise InvalidParams(f"constant losses need {K} values")
        return np.tile(values, (T, 1))
    if kind == "bernoulli":
        means = np.asarray(lspec.get("means"), dtype=np.float64)
        if means.shape != (K,) or means.min() < 0.0 or means.max() > 1.0:
            raise InvalidParams(f"bernoulli needs {K} means in [0,1]")
        return (rng.random((T, K)) < means).astype(np.float64)
    if kind == "gap_bernoulli":
        base = float(lspec.get("base", 0.5))
        gap = float(lspec.get("gap", 0.1))
        best = int(lspec.get("best", 0))
        if not (0 <= best < K) or not (0.0 <= base - gap and base <= 1.0):
            raise InvalidParams(f"gap_bernoulli params out of range: {lspec}")
        means = np.full(K, base)
        means[best] = base - gap
        return (rng.random((T, K)) < means).astype(np.float64)
    if kind == "shifting_gap":
        base = float(lspec.get("base", 0.5))
        gap = float(lspec.get("gap", 0.1))
        period = int(lspec.get("period", max(1, T // 10)))
        if period < 1 or not (0.0 <= base - gap and base <= 1.0):
            raise InvalidParams(f"shifting_gap params out of range: {lspec}")
        means = np.full((T, K), base)
        best = (np.arange(T) // period) % K
        means[np.arange(T), best] -= gap
        return (rng.random((T, K)) < means).astype(np.float64)
    raise InvalidParams(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")


def build_environment(spec: dict, seed: int | None = None) -> Environment:
    """Realize an environment from its config dict.

    `seed` is the per-run seed; it is combined with the spec's own base seed
    so distinct runs see fresh draws while a fixed (spec, seed) pair is fully
    deterministic.
    """
    if not isinstance(spec, dict):
        raise InvalidParams(f"environment spec must be a dict, got {type(spec)}")
    kind = spec.get("kind")
    if kind not in ENVIRONMENT_KINDS:
        raise InvalidParams(f"environment kind must be one of {ENVIRONMENT_KINDS}, got {kind!r}")
    try:
        K = int(spec["K"])
        T = int(spec["T"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParams(f"environment spec needs integer K and T: {exc}") from exc
    if K < 1 or T < 1:
        raise InvalidParams(f"need K >= 1 and T >= 1, got K={K}, T={T}")
    entropy = [int(spec.get("seed", 0))]
    if seed is not None:
        entropy.append(int(seed))
    ss = np.random.SeedSequence(entropy)

    if kind == "mtb_lower_bound":
        if "alpha" not in spec:
            raise InvalidParams("mtb_lower_bound needs 'alpha'")
        return mtb_build(
            K,
            int(spec["alpha"]),
            T,
            target_action=spec.get("target"),
            seed=ss,
            kl_constant=float(spec.get("kl_constant", KL_CONSTANT)),
        )

    if kind == "fixed_adversarial":
        if "graph" not in spec:
            raise InvalidParams("fixed_adversarial needs a 'graph' spec")
        graphs = [_build_graph(spec["graph"], K)]
    else:
        gspecs = spec.get("graphs")
        if not gspecs:
            raise InvalidParams("time_varying needs a nonempty 'graphs' list")
        graphs = [_build_graph(gs, K) for gs in gspecs]

    graph_ids = np.arange(T, dtype=np.int64) % len(graphs)
    losses = _loss_matrix(spec.get("losses", {}), K, T, np.random.default_rng(ss))
    return Environment(graphs, graph_ids, losses)


# ----------------------------------------------------------------------- replay


def write_replay(env: Environment, path) -> None:
    """Serialize a realized stream as JSON lines: header record, then rounds."""
    path = Path(path)
    with path.open("w") as fh:
        header = {
            "kind": "header",
            "K": env.K,
            "T": env.T,
            "graphs": {str(i): format_edge_list(g) for i, g in enumerate(env.graphs)},
        }
        fh.write(json.dumps(header) + "\n")
        for t in range(1, env.T + 1):
            rec = {
                "t": t,
                "graph_id": int(env.graph_ids[t - 1]),
                "losses": env.losses[t - 1].tolist(),
            }
            fh.write(json.dumps(rec) + "\n")


def read_replay(path) -> Environment:
    """Parse a replay file back into an Environment."""
    path = Path(path)
    with path.open() as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise InvalidParams(f"replay file {path} is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise InvalidParams(f"replay header is not valid JSON: {exc}") from exc
    if header.get("kind") != "header" or "graphs" not in header:
        raise InvalidParams("replay must start with a header record carrying the graphs")
    try:
        K = int(header["K"])
        T = int(header["T"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParams(f"replay header needs integer K and T: {exc}") from exc
    gmap = header["graphs"]
    try:
        graphs = [parse_edge_list(gmap[str(i)]) for i in range(len(gmap))]
    except KeyError as exc:
        raise InvalidParams(f"graph ids must be contiguous from 0: missing {exc}") from exc
    if len(lines) - 1 != T:
        raise InvalidParams(f"expected {T} round records, found {len(lines) - 1}")
    graph_ids = np.empty(T, dtype=np.int64)
    losses = np.empty((T, K), dtype=np.float64)
    for n, ln in enumerate(lines[1:]):
        try:
            rec = json.loads(ln)
        except json.JSONDecodeError as exc:
            raise InvalidParams(f"bad round record on line {n + 2}: {exc}") from exc
        if int(rec.get("t", -1)) != n + 1:
            raise InvalidParams(f"round records must be ordered by t; line {n + 2} is t={rec.get('t')}")
        graph_ids[n] = int(rec["graph_id"])
        row = np.asarray(rec["losses"], dtype=np.float64)
        if row.shape != (K,):
            raise InvalidParams(f"round {n + 1} has {row.size} losses, expected {K}")
        losses[n] = row
    return Environment(graphs, graph_ids, losses)
