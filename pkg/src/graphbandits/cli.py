"""Command-line front end: run, sweep, verify, gen-env, replay.

Configs are JSON files; round streams are written as JSON lines and summary
tables as CSV (switchable with --format). Exit codes: 0 success, 1 when a
verification suite fails, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .environments import build_environment, write_replay
from .errors import ConfigError, GraphBanditsError
from .harness import run, sweep, verify, write_run_outputs


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def _summary_line(s) -> str:
    bound = "n/a" if s.bound is None else f"{s.bound:.2f}"
    ratio = "n/a" if s.bound_ratio is None else f"{s.bound_ratio:.4f}"
    return (
        f"seed {s.seed}: learner={s.learner} K={s.K} T={s.T} "
        f"regret={s.regret:.4f} bound={bound} ratio={ratio} restarts={s.restarts}"
    )


def _cmd_run(args) -> int:
    config = _load_json(args.config)
    if args.seed is not None:
        config["seeds"] = [args.seed]
    if args.format is not None:
        config["format"] = args.format
    result = run(config)
    for s in result.summaries:
        print(_summary_line(s))
    regrets = [s.regret for s in result.summaries]
    if len(regrets) > 1:
        mean = sum(regrets) / len(regrets)
        print(f"seed-mean regret over {len(regrets)} seeds: {mean:.4f}")
    if args.out is not None:
        paths = write_run_outputs(result, args.out, result.config["format"])
        print(f"wrote {len(paths)} files under {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    config = _load_json(args.config)
    rows = sweep(config, out=args.out, workers=args.workers)
    print(f"sweep finished: {len(rows)} rows")
    if args.out is not None:
        print(f"wrote {Path(args.out) / 'sweep.csv'}")
    return 0


def _cmd_verify(args) -> int:
    budget = json.loads(args.budget) if args.budget else {}
    if args.seed is not None:
        budget["seed"] = args.seed
    reports = verify(suite=args.suite, budget=budget)
    for rep in reports:
        status = "PASS" if rep["passed"] else "FAIL"
        print(f"[{status}] {rep['suite']} ({rep['seconds']}s)")
        for failure in rep.get("failures", []):
            print(f"    {failure}")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "verify_report.jsonl").open("w") as fh:
            for rep in reports:
                fh.write(json.dumps(rep) + "\n")
        print(f"wrote {out / 'verify_report.jsonl'}")
    return 0 if all(rep["passed"] for rep in reports) else 1


def _cmd_gen_env(args) -> int:
    spec = _load_json(args.config)
    try:
        env = build_environment(spec, seed=args.seed)
    except GraphBanditsError as exc:
        raise ConfigError(f"cannot realize environment: {exc}") from exc
    out = Path(args.out)
    if out.suffix != ".jsonl":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "environment.jsonl"
    write_replay(env, out)
    print(f"wrote {env.T} rounds (K={env.K}, {len(env.graphs)} graphs) to {out}")
    return 0


def _cmd_replay(args) -> int:
    config = _load_json(args.config)
    if "environment" not in config:
        if "replay" not in config:
            raise ConfigError("replay config needs a 'replay' path or an 'environment'")
        config["environment"] = {"kind": "replay", "path": config.pop("replay")}
    if args.seed is not None:
        config["seeds"] = [args.seed]
    if args.format is not None:
        config["format"] = args.format
    result = run(config)
    for s in result.summaries:
        print(_summary_line(s))
    if args.out is not None:
        paths = write_run_outputs(result, args.out, result.config["format"])
        print(f"wrote {len(paths)} files under {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphbandits",
        description="Simulate FTRL learners on strongly observable feedback graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one learner/environment config over its seeds")
    p_run.add_argument("--config", required=True, help="run config (JSON)")
    p_run.add_argument("--seed", type=int, default=None, help="override: run this single seed")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--format", choices=("csv", "jsonl"), default=None)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a (K, alpha, T, learner) x seeds grid")
    p_sweep.add_argument("--config", required=True, help="sweep config (JSON)")
    p_sweep.add_argument("--out", default=None, help="output directory for sweep.csv")
    p_sweep.add_argument("--workers", type=int, default=None, help="process pool size")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="numerically re-check the analytic guarantees")
    p_verify.add_argument("--suite", default="all",
                          choices=("all", "lemma1", "estimators", "solver", "doubling"))
    p_verify.add_argument("--budget", default=None,
                          help='inline JSON budget, e.g. \'{"lemma1_max_k": 4}\'')
    p_verify.add_argument("--seed", type=int, default=None)
    p_verify.add_argument("--out", default=None, help="directory for verify_report.jsonl")
    p_verify.set_defaults(func=_cmd_verify)

    p_gen = sub.add_parser("gen-env", help="realize an environment spec into a replay file")
    p_gen.add_argument("--config", required=True, help="environment spec (JSON)")
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out", required=True, help="replay file (.jsonl) or directory")
    p_gen.set_defaults(func=_cmd_gen_env)

    p_replay = sub.add_parser("replay", help="evaluate a learner against a replay file")
    p_replay.add_argument("--config", required=True,
                          help='JSON with "learner" and a "replay" path (or full run config)')
    p_replay.add_argument("--seed", type=int, default=None)
    p_replay.add_argument("--out", default=None, help="output directory")
    p_replay.add_argument("--format", choices=("csv", "jsonl"), default=None)
    p_replay.set_defaults(func=_cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
