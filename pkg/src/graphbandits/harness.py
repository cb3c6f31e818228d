"""Experiment driver: run/sweep/verify over learners and environments.

run() couples one learner to one realized loss stream per seed and accounts
realized regret against the best fixed action in hindsight. sweep() fans a
(K, alpha, T, learner) grid times seeds over a work pool (each task owns its
learner and stream) and merges one CSV-ready summary table deterministically.
verify() re-checks the library's analytic guarantees numerically and returns
machine-readable reports instead of raising.

All randomness flows from per-seed SeedSequence spawns: one child seeds the
environment draw, the other the learner's action sampling, so streams are
reproducible byte for byte and loss realizations stay paired across learners
and graph choices at a fixed seed.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .environments import Environment, MtbEnvironment, build_environment, read_replay
from .errors import ConfigError, GraphBanditsError, SizeLimitExceeded
from .estimators import estimate_basic, estimate_shifted, make_observation
from .ftrl import kkt_residual, solve_ftrl, tsallis_entropy
from .graphs import (
    FeedbackGraph,
    independence_number,
    validate_strong_observability,
    variance_certificate,
)
from .learners import DoublingQFTRL, QTsallisFTRL, UniformPolicy, tune, variance_quantity

LEARNER_KINDS = ("qftrl_thm1", "qftrl_thm2", "doubling", "uniform_baseline")

# Leading constant of the doubling learner's regret guarantee:
# 4 sqrt(6e) (sqrt(pi) + sqrt(4 - 2 ln 2)) / ln 2.
DOUBLING_C = (
    4.0
    * math.sqrt(6.0 * math.e)
    * (math.sqrt(math.pi) + math.sqrt(4.0 - 2.0 * math.log(2.0)))
    / math.log(2.0)
)

# One round record per played round; b_value/entropy are diagnostics from the
# selection-time distribution (null for the uniform baseline).
RECORD_FIELDS = ("t", "action", "graph_id", "loss", "b_value", "epoch", "entropy")

VERIFY_SUITES = ("lemma1", "estimators", "solver", "doubling")


@dataclass
class RegretSummary:
    """Per-seed accounting of one run."""

    learner: str
    K: int
    T: int
    seed: int
    total_loss: float
    best_fixed_action: int
    best_fixed_loss: float
    regret: float
    bound: float | None
    bound_ratio: float | None
    alpha_bar: float
    q: float | None
    eta: float | None
    restarts: int
    target_regret: float | None = None
    lower_const: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    config: dict
    summaries: list[RegretSummary]
    records: list[dict]  # one dict of column arrays per seed, RECORD_FIELDS keys


def validate_run_config(config: dict) -> dict:
    """Normalize and validate a run config; raises ConfigError."""
    if not isinstance(config, dict):
        raise ConfigError(f"run config must be a dict, got {type(config).__name__}")
    out = dict(config)
    env = out.get("environment")
    if not isinstance(env, dict):
        raise ConfigError("run config needs an 'environment' dict")
    learner = out.get("learner")
    if not isinstance(learner, dict):
        raise ConfigError("run config needs a 'learner' dict")
    kind = learner.get("kind")
    if kind not in LEARNER_KINDS:
        raise ConfigError(f"learner kind must be one of {LEARNER_KINDS}, got {kind!r}")
    extra = set(learner) - {"kind", "alpha", "q", "eta"}
    if extra:
        raise ConfigError(f"unknown learner fields {sorted(extra)}")
    if "q" in learner and not (0.0 < float(learner["q"]) < 1.0):
        raise ConfigError(f"q override must lie in (0,1), got {learner['q']}")
    if "eta" in learner and not float(learner["eta"]) > 0.0:
        raise ConfigError(f"eta override must be positive, got {learner['eta']}")
    if "alpha" in learner:
        a = learner["alpha"]
        if not isinstance(a, (int, np.integer)) or a < 1:
            raise ConfigError(f"alpha override must be an integer >= 1, got {a!r}")
    if "seeds" in out:
        seeds = out["seeds"]
    elif "seed" in out:
        seeds = [out["seed"]]
    else:
        seeds = [0]
    if not isinstance(seeds, (list, tuple)) or len(seeds) == 0:
        raise ConfigError("seeds must be a nonempty list")
    try:
        out["seeds"] = [int(s) for s in seeds]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seeds must be integers: {exc}") from exc
    fmt = out.get("format", "jsonl")
    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"format must be 'csv' or 'jsonl', got {fmt!r}")
    out["format"] = fmt
    return out


def _realize_environment(env_spec: dict, seed: int) -> Environment:
    try:
        if env_spec.get("kind") == "replay":
            if "path" not in env_spec:
                raise ConfigError("replay environment needs a 'path'")
            return read_replay(env_spec["path"])
        return build_environment(env_spec, seed=seed)
    except ConfigError:
        raise
    except (GraphBanditsError, OSError) as exc:
        raise ConfigError(f"cannot realize environment: {exc}") from exc


def _constant_alpha(env: Environment) -> int | None:
    alphas = env.graph_alphas()
    return alphas[0] if len(set(alphas)) == 1 else None


def make_learner(learner_spec: dict, env: Environment, rng: np.random.Generator):
    """Instantiate the configured learner against env; returns the policy.

    Tuned variants receive the environment's exact independence number (their
    informational assumption); the doubling learner sees only K and T, and the
    uniform baseline nothing at all.
    """
    kind = learner_spec["kind"]
    K, T = env.K, env.T
    if kind == "uniform_baseline":
        return UniformPolicy(K, rng)
    if kind == "doubling":
        return DoublingQFTRL(K, T, rng)
    if kind == "qftrl_thm1":
        for i, g in enumerate(env.graphs):
            if not g.self_loops.all():
                raise ConfigError(
                    f"qftrl_thm1 requires self-loops on every action; graph {i} lacks some"
                )
        variant, estimator = "self_loops", "basic"
    else:  # qftrl_thm2
        for i, g in enumerate(env.graphs):
            if not validate_strong_observability(g):
                raise ConfigError(f"graph {i} is not strongly observable")
        variant, estimator = "general", "shifted"
    alpha = learner_spec.get("alpha")
    if alpha is None:
        alpha = _constant_alpha(env)
        if alpha is None:
            raise ConfigError(
                f"{kind} tuning needs one independence number, but the stream's "
                f"alpha varies; pass learner.alpha explicitly or use 'doubling'"
            )
    params = tune(K, alpha, T, variant)
    q = float(learner_spec.get("q", params.q))
    eta = float(learner_spec.get("eta", params.eta))
    return QTsallisFTRL(K, q, eta, estimator=estimator, rng=rng)


def regret_bound(kind: str, K: int, T: int, alpha: int | None,
                  round_alphas: np.ndarray | None) -> float | None:
    """Expected-regret guarantee for the learner kind, None if not covered."""
    if kind == "uniform_baseline":
        return None
    if kind == "doubling":
        if round_alphas is None:
            return None
        a_bar = float(round_alphas.mean())
        inner = float((round_alphas * (2.0 + math.log(K / a_bar))).sum())
        return DOUBLING_C * math.sqrt(inner) + math.log2(a_bar)
    if alpha is None:
        return None
    lead = 2.0 if kind == "qftrl_thm1" else 6.0
    return lead * math.sqrt(math.e * alpha * T * (2.0 + math.log(K / alpha)))


def mtb_lower_const(alpha: int, T: int, K: int) -> float:
    """Leading term of the minimax lower bound on the MTB family."""
    return math.sqrt(alpha * T * math.log(K) / math.log(alpha)) / (18.0 * math.sqrt(2.0))


def run_single(env: Environment, learner_spec: dict, seed: int):
    """Play one seeded stream; returns (records, RegretSummary)."""
    ss = np.random.SeedSequence(seed)
    env_ss, learner_ss = ss.spawn(2)
    del env_ss  # env was realized by the caller from the same spawn order
    learner = make_learner(learner_spec, env, np.random.default_rng(learner_ss))

    T, K = env.T, env.K
    t_col = np.arange(1, T + 1, dtype=np.int64)
    action_col = np.empty(T, dtype=np.int64)
    loss_col = np.empty(T, dtype=np.float64)
    b_col = np.full(T, np.nan)
    epoch_col = np.zeros(T, dtype=np.int64)
    entropy_col = np.full(T, np.nan)

    for t in range(1, T + 1):
        try:
            g, losses = env.round(t)
            p_sel = learner.p
            q_sel = getattr(learner, "q", None)
            epoch_col[t - 1] = getattr(learner, "r", 0)
            action = learner.select_action()
            if q_sel is not None:
                b_col[t - 1] = variance_quantity(g, p_sel, q_sel)
                entropy_col[t - 1] = tsallis_entropy(p_sel, q_sel)
            learner.update(make_observation(g, action, losses))
        except GraphBanditsError as exc:
            raise type(exc)(f"round {t}: {exc}") from exc
        action_col[t - 1] = action
        loss_col[t - 1] = losses[action]

    records = {
        "t": t_col,
        "action": action_col,
        "graph_id": env.graph_ids.copy(),
        "loss": loss_col,
        "b_value": b_col,
        "epoch": epoch_col,
        "entropy": entropy_col,
    }

    try:
        round_alphas = env.round_alphas()
        alpha_bar = float(round_alphas.mean())
        const_alpha = _constant_alpha(env)
    except SizeLimitExceeded:
        round_alphas, alpha_bar, const_alpha = None, float("nan"), None

    kind = learner_spec["kind"]
    total_loss = float(loss_col.sum())
    best_fixed_loss = env.best_fixed_loss()
    regret = total_loss - best_fixed_loss
    bound = regret_bound(kind, K, T, const_alpha, round_alphas)
    summary = RegretSummary(
        learner=kind,
        K=K,
        T=T,
        seed=seed,
        total_loss=total_loss,
        best_fixed_action=env.best_fixed_action(),
        best_fixed_loss=best_fixed_loss,
        regret=regret,
        bound=bound,
        bound_ratio=(regret / bound) if bound else None,
        alpha_bar=alpha_bar,
        q=getattr(learner, "q", None),
        eta=getattr(learner, "eta", None),
        restarts=getattr(learner, "restarts", 0),
    )
    if isinstance(env, MtbEnvironment):
        summary.target_regret = total_loss - float(env.losses[:, env.target_index].sum())
        summary.lower_const = mtb_lower_const(env.alpha, T, K)
    return records, summary


def run(config: dict, out=None) -> RunResult:
    """Execute the configured run for every seed; optionally write outputs."""
    config = validate_run_config(config)
    summaries: list[RegretSummary] = []
    records_by_seed: list[dict] = []
    for seed in config["seeds"]:
        ss = np.random.SeedSequence(seed)
        env_ss, _ = ss.spawn(2)
        env = _realize_environment(config["environment"], int(env_ss.generate_state(1)[0]))
        records, summary = run_single(env, config["learner"], seed)
        records_by_seed.append(records)
        summaries.append(summary)
    result = RunResult(config=config, summaries=summaries, records=records_by_seed)
    if out is not None:
        write_run_outputs(result, out, config["format"])
    return result


# -------------------------------------------------------------------- writers


def _round_rows(records: dict):
    T = records["t"].size
    for n in range(T):
        yield {
            "t": int(records["t"][n]),
            "action": int(records["action"][n]),
            "graph_id": int(records["graph_id"][n]),
            "loss": float(records["loss"][n]),
            "b_value": None if math.isnan(records["b_value"][n]) else float(records["b_value"][n]),
            "epoch": int(records["epoch"][n]),
            "entropy": None if math.isnan(records["entropy"][n]) else float(records["entropy"][n]),
        }


def write_records_jsonl(records: dict, path) -> None:
    with Path(path).open("w") as fh:
        for row in _round_rows(records):
            fh.write(json.dumps(row) + "\n")


def write_records_csv(records: dict, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(RECORD_FIELDS))
        writer.writeheader()
        for row in _round_rows(records):
            writer.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v)
                             for k, v in row.items()})


def _summary_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def write_summaries_csv(rows: list[dict], path) -> None:
    if not rows:
        raise ConfigError("no summary rows to write")
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _summary_cell(v) for k, v in row.items()})


def write_summaries_jsonl(rows: list[dict], path) -> None:
    with Path(path).open("w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def write_run_outputs(result: RunResult, out, fmt: str = "jsonl") -> list[Path]:
    """records_seed<seed>.<fmt> per seed + summary.<csv|jsonl>; returns paths."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for seed, records in zip(result.config["seeds"], result.records):
        path = out / f"records_seed{seed}.{fmt}"
        if fmt == "csv":
            write_records_csv(records, path)
        else:
            write_records_jsonl(records, path)
        written.append(path)
    rows = [s.as_dict() for s in result.summaries]
    if fmt == "csv":
        spath = out / "summary.csv"
        write_summaries_csv(rows, spath)
    else:
        spath = out / "summary.jsonl"
        write_summaries_jsonl(rows, spath)
    written.append(spath)
    return written


# ---------------------------------------------------------------------- sweep


def clique_sizes(K: int, alpha: int) -> list[int]:
    """Split K nodes into alpha cliques as evenly as possible."""
    if not (1 <= alpha <= K):
        raise ConfigError(f"need 1 <= alpha <= K, got alpha={alpha}, K={K}")
    base, rem = divmod(K, alpha)
    return [base + 1] * rem + [base] * (alpha - rem)


def _sweep_cell_config(cell: dict, sweep_cfg: dict) -> dict:
    K, alpha, T = cell["K"], cell["alpha"], cell["T"]
    losses = sweep_cfg.get("losses", {"kind": "gap_bernoulli", "gap": 0.1, "best": 0, "base": 0.5})
    return {
        "environment": {
            "kind": "fixed_adversarial",
            "K": K,
            "T": T,
            "graph": {"kind": "disjoint_cliques", "sizes": clique_sizes(K, alpha)},
            "losses": losses,
            "seed": int(sweep_cfg.get("env_seed", 0)),
        },
        "learner": {"kind": cell["learner"]},
    }


def _sweep_task(args) -> dict:
    cell, sweep_cfg, seed = args
    cfg = _sweep_cell_config(cell, sweep_cfg)
    ss = np.random.SeedSequence(seed)
    env_ss, _ = ss.spawn(2)
    env = _realize_environment(cfg["environment"], int(env_ss.generate_state(1)[0]))
    _, summary = run_single(env, cfg["learner"], seed)
    row = {"K": cell["K"], "alpha": cell["alpha"], "T": cell["T"]}
    row.update(summary.as_dict())
    return row


def validate_sweep_config(config: dict) -> dict:
    if not isinstance(config, dict):
        raise ConfigError(f"sweep config must be a dict, got {type(config).__name__}")
    grid = config.get("grid")
    if not isinstance(grid, dict):
        raise ConfigError("sweep config needs a 'grid' dict")
    for key in ("K", "alpha", "T", "learner"):
        vals = grid.get(key)
        if not isinstance(vals, (list, tuple)) or len(vals) == 0:
            raise ConfigError(f"grid.{key} must be a nonempty list")
    for kind in grid["learner"]:
        if kind not in LEARNER_KINDS:
            raise ConfigError(f"unknown learner kind {kind!r} in grid")
    seeds = config.get("seeds")
    if not isinstance(seeds, (list, tuple)) or len(seeds) == 0:
        raise ConfigError("sweep config needs a nonempty 'seeds' list")
    return config


def sweep(config: dict, out=None, workers: int | None = None) -> list[dict]:
    """Run the grid x seeds, merge deterministically, optionally write CSV.

    workers > 1 fans tasks over a process pool; each task owns its learner,
    environment, and summary row, and the merge order is the (cell, seed)
    product order regardless of completion order.
    """
    config = validate_sweep_config(config)
    grid = config["grid"]
    cells = [
        {"K": int(K), "alpha": int(a), "T": int(T), "learner": kind}
        for K, a, T, kind in itertools.product(grid["K"], grid["alpha"], grid["T"], grid["learner"])
    ]
    tasks = [(cell, config, int(seed)) for cell in cells for seed in config["seeds"]]
    for cell in cells:  # fail fast on impossible cells before spawning workers
        clique_sizes(cell["K"], cell["alpha"])
    if workers is None:
        workers = int(config.get("workers", 1))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_task, tasks))
    else:
        rows = [_sweep_task(t) for t in tasks]
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        write_summaries_csv(rows, out / "sweep.csv")
    return rows


# --------------------------------------------------------------------- verify


def _all_selfloop_graphs(K: int):
    """Every undirected graph on K labeled nodes, all self-loops present."""
    pairs = [(i, j) for i in range(K) for j in range(i + 1, K)]
    for bits in range(1 << len(pairs)):
        adj = np.eye(K, dtype=bool)
        for n, (i, j) in enumerate(pairs):
            if bits >> n & 1:
                adj[i, j] = adj[j, i] = True
        yield FeedbackGraph(adj)


def verify_lemma1(max_k: int = 6, points: int = 200, seed: int = 0) -> dict:
    """Exhaustive variance-certificate check over all self-looped graphs.

    For every graph on K <= max_k nodes, `points` random simplex vectors and
    b in {0, 0.25, 0.5, 0.75, 1}: sum_v p(v)^(1+b)/P(v) <= alpha^(1-b) + 1e-9,
    with equality within 1e-12 at p uniform on a maximum independent set.
    variance_certificate itself is spot-checked on a subsample.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    bs = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    worst_slack = -math.inf
    worst_tight = 0.0
    graphs = checks = 0
    failures = []
    for K in range(1, max_k + 1):
        for g in _all_selfloop_graphs(K):
            graphs += 1
            cert = independence_number(g)
            alpha = cert.alpha
            p = rng.dirichlet(np.ones(K), size=points)  # (points, K)
            P = p @ g.adj  # all self-loops: P >= p > 0
            ratios = p / P
            for b in bs:
                vals = (p**b * ratios).sum(axis=1)
                slack = float(vals.max() - alpha ** (1.0 - b))
                worst_slack = max(worst_slack, slack)
                checks += points
                if slack > 1e-9:
                    failures.append(f"K={K} graph#{graphs} b={b}: slack {slack:.3e}")
            # tightness at p uniform on a maximum independent set
            pu = np.zeros(K)
            pu[list(cert.witness)] = 1.0 / alpha
            Pu = g.adj @ pu
            mask = pu > 0
            for b in bs:
                val = float((pu[mask] ** (1.0 + b) / Pu[mask]).sum())
                gap = abs(val - alpha ** (1.0 - b))
                worst_tight = max(worst_tight, gap)
                if gap > 1e-12:
                    failures.append(f"K={K} graph#{graphs} b={b}: tightness gap {gap:.3e}")
            if graphs % 64 == 0:  # certified public operation, spot-checked
                b = float(rng.choice(bs))
                value, S = variance_certificate(g, p[0], b)
                pb = p[0][list(S)] ** b if S else np.array([0.0])
                if value > float(pb.sum()) + 1e-9 or value > alpha ** (1.0 - b) + 1e-9:
                    failures.append(f"K={K} graph#{graphs}: certificate chain broken")
    return {
        "suite": "lemma1",
        "passed": not failures,
        "graphs": graphs,
        "checks": checks,
        "worst_slack": worst_slack,
        "worst_tightness_gap": worst_tight,
        "failures": failures[:20],
        "seconds": round(time.perf_counter() - t0, 3),
    }


def _analytic_moments(g: FeedbackGraph, p: np.ndarray, losses: np.ndarray, estimator):
    """E[est] and E[est^2] coordinatewise, averaging over the drawn action."""
    K = g.K
    mean = np.zeros(K)
    second = np.zeros(K)
    for j in range(K):
        if p[j] == 0.0:
            continue
        est = estimator(make_observation(g, j, losses), p)
        mean += p[j] * est
        second += p[j] * est**2
    return mean, second


def verify_estimators(instances: int = 1000, max_k: int = 12, seed: int = 0) -> dict:
    """Unbiasedness and second-moment bound for both estimators."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_bias = 0.0
    worst_second = -math.inf
    failures = []
    for n in range(instances):
        K = int(rng.integers(2, max_k + 1))
        shifted = bool(n % 2)
        adj = np.asarray(rng.random((K, K)) < 0.4)
        adj |= adj.T
        np.fill_diagonal(adj, True)
        if shifted:
            # strip some self-loops but keep strong observability
            drop = rng.random(K) < 0.3
            for i in np.nonzero(drop)[0]:
                adj[i] = True
                adj[:, i] = True
                adj[i, i] = False
        g = FeedbackGraph(adj)
        p = rng.dirichlet(np.full(K, 0.5))
        p = np.maximum(p, 1e-6)
        p /= p.sum()
        losses = rng.random(K)
        est = estimate_shifted if shifted else estimate_basic
        mean, second = _analytic_moments(g, p, losses, est)
        bias = float(np.abs(mean - losses).max())
        worst_bias = max(worst_bias, bias)
        if bias > 1e-10:
            failures.append(f"instance {n}: bias {bias:.3e}")
        P = g.neighborhood_sums(p)
        loopless = ~g.self_loops
        J = loopless & (p > 0.5)
        ok = ~J
        margin = float((second[ok] - 1.0 / P[ok]).max())
        worst_second = max(worst_second, margin)
        if margin > 1e-10:
            failures.append(f"instance {n}: second moment excess {margin:.3e}")
    return {
        "suite": "estimators",
        "passed": not failures,
        "instances": instances,
        "worst_bias": worst_bias,
        "worst_second_moment_excess": worst_second,
        "failures": failures[:20],
        "seconds": round(time.perf_counter() - t0, 3),
    }


def verify_solver(instances: int = 1000, seed: int = 0) -> dict:
    """KKT residual and shift invariance of the simplex solver."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    qs = (0.5, 0.66, 0.9)
    worst_kkt = 0.0
    worst_shift = 0.0
    failures = []
    for n in range(instances):
        K = int(rng.integers(2, 17))
        q = qs[n % 3]
        scale = 10.0 ** rng.uniform(-2, 3)
        L = rng.normal(0.0, scale, size=K)
        eta = 10.0 ** rng.uniform(-3, 1)
        p, lam = solve_ftrl(L, q, eta)
        res = kkt_residual(L, q, eta, p, lam)
        worst_kkt = max(worst_kkt, res)
        if res > 1e-8 or abs(p.sum() - 1.0) > 1e-9 or p.min() <= 0.0:
            failures.append(f"instance {n}: kkt {res:.3e}")
        shift = rng.normal(0.0, scale)
        p2, _ = solve_ftrl(L + shift, q, eta)
        diff = float(np.abs(p - p2).max())
        worst_shift = max(worst_shift, diff)
        if diff > 1e-8:
            failures.append(f"instance {n}: shift drift {diff:.3e}")
    return {
        "suite": "solver",
        "passed": not failures,
        "instances": instances,
        "worst_kkt_residual": worst_kkt,
        "worst_shift_invariance": worst_shift,
        "failures": failures[:20],
        "seconds": round(time.perf_counter() - t0, 3),
    }


def verify_doubling(T: int = 2000, seeds: int = 3, seed0: int = 0) -> dict:
    """Structural checks of the restart schedule on an alternating stream."""
    t0 = time.perf_counter()
    failures = []
    spec = {
        "kind": "time_varying",
        "K": 8,
        "T": T,
        "graphs": [{"kind": "experts"}, {"kind": "bandit"}],
        "losses": {"kind": "gap_bernoulli", "gap": 0.1, "best": 0, "base": 0.5},
    }
    config = {"environment": spec, "learner": {"kind": "doubling"}}
    max_restarts = 0
    for seed in range(seed0, seed0 + seeds):
        result = run({**config, "seeds": [seed]})
        records, summary = result.records[0], result.summaries[0]
        a_bar = summary.alpha_bar
        cap = max(1, math.ceil(math.log2(a_bar)))
        distinct = len(np.unique(records["epoch"]))
        max_restarts = max(max_restarts, summary.restarts)
        if distinct > cap:
            failures.append(f"seed {seed}: {distinct} distinct epochs > cap {cap}")
        if not np.all(np.diff(records["epoch"]) >= 0):
            failures.append(f"seed {seed}: epoch index decreased")
        # epoch parameters must match the doubling tuning exactly
        for ep in _doubling_epochs(config, seed):
            want = tune(8, 2.0**ep.r, T, "doubling_r")
            if (ep.q, ep.eta) != (want.q, want.eta):
                failures.append(f"seed {seed}: epoch {ep.r} params off")
    return {
        "suite": "doubling",
        "passed": not failures,
        "seeds": seeds,
        "rounds": T,
        "max_restarts": max_restarts,
        "failures": failures[:20],
        "seconds": round(time.perf_counter() - t0, 3),
    }


def _doubling_epochs(config: dict, seed: int):
    """Replay the run to recover the inner learner's epoch list."""
    cfg = validate_run_config({**config, "seeds": [seed]})
    ss = np.random.SeedSequence(seed)
    env_ss, learner_ss = ss.spawn(2)
    env = _realize_environment(cfg["environment"], int(env_ss.generate_state(1)[0]))
    learner = DoublingQFTRL(env.K, env.T, np.random.default_rng(learner_ss))
    for t in range(1, env.T + 1):
        g, losses = env.round(t)
        action = learner.select_action()
        learner.update(make_observation(g, action, losses))
    return learner.epochs


def verify(suite: str = "all", budget: dict | None = None) -> list[dict]:
    """Run the requested verification suites; failures land in the reports."""
    budget = dict(budget or {})
    seed = int(budget.get("seed", 0))
    if suite == "all":
        names = VERIFY_SUITES
    elif suite in VERIFY_SUITES:
        names = (suite,)
    else:
        raise ConfigError(f"suite must be 'all' or one of {VERIFY_SUITES}, got {suite!r}")
    reports = []
    for name in names:
        if name == "lemma1":
            reports.append(verify_lemma1(
                max_k=int(budget.get("lemma1_max_k", 6)),
                points=int(budget.get("lemma1_points", 200)),
                seed=seed,
            ))
        elif name == "estimators":
            reports.append(verify_estimators(
                instances=int(budget.get("estimator_instances", 1000)), seed=seed))
        elif name == "solver":
            reports.append(verify_solver(
                instances=int(budget.get("solver_instances", 1000)), seed=seed))
        else:
            reports.append(verify_doubling(
                T=int(budget.get("doubling_rounds", 2000)),
                seeds=int(budget.get("doubling_seeds", 3)),
                seed0=seed,
            ))
    return reports
