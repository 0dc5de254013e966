"""Command line entry point: ``dykstra-net {run,oracle,batch}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .apg import init_apg, primal_estimate, run_apg
from .config import ConfigError, ExperimentConfig, load_config
from .dual_ascent import init_allocation, run_allocation
from .dykstra import init_state, run, transform_weighted
from .funcs import InfeasibleInstance, UnboundedInstance, UnsupportedInstance
from .oracles import OracleError, oracle_allocation, oracle_dykstra
from .schedules import make_source
from .trace import Trace, to_csv, write_csv

log = logging.getLogger("dykstra_net")


@dataclass
class Outcome:
    trace: Trace
    ok: bool
    x: np.ndarray | None = None


def _instance(cfg: ExperimentConfig):
    if cfg.weights is None:
        return cfg.x0, cfg.funcs
    w = transform_weighted(cfg.weights, cfg.x0, cfg.funcs)
    return w.x0, w.funcs


def reference_solution(cfg: ExperimentConfig) -> np.ndarray | None:
    x0, funcs = _instance(cfg)
    try:
        return oracle_dykstra(funcs, x0)
    except (OracleError, UnsupportedInstance, InfeasibleInstance, UnboundedInstance) as exc:
        log.warning("no reference solution: %s", exc)
        return None


def run_experiment(cfg: ExperimentConfig) -> Outcome:
    """Dispatch on ``cfg.algorithm``; ``ok`` is true iff the stop criterion was met."""
    x0, funcs = _instance(cfg)
    if cfg.algorithm == "dykstra":
        ref = reference_solution(cfg)
        state = init_state(cfg.graph, funcs, x0)
        source = make_source(cfg.schedule, cfg.graph, cfg.seed, cfg.hubs)
        state, trace = run(state, source, cfg.max_cycles, cfg.gap_tol, reference=ref)
        return Outcome(trace, trace.status == "converged", state.x)
    if cfg.algorithm == "apg":
        ref = reference_solution(cfg)
        state = init_apg(cfg.graph, funcs, x0)
        state, trace = run_apg(state, cfg.max_cycles, cfg.gap_tol, greedy=cfg.greedy,
                               reference=ref, greedy_kind=cfg.greedy_blocks, seed=cfg.seed)
        return Outcome(trace, trace.status == "converged", primal_estimate(state))
    state = init_allocation(funcs)
    state, trace = run_allocation(state, cfg.subsets, cfg.max_cycles, cfg.gap_tol)
    return Outcome(trace, trace.status == "converged", state.y)


def _run_one(path: str, out: str | None, seed: int | None) -> tuple[str, bool, str]:
    cfg = load_config(path)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if out is not None:
        cfg = replace(cfg, out=out)
    res = run_experiment(cfg)
    if cfg.out:
        write_csv(res.trace, cfg.out)
        return path, res.ok, ""
    return path, res.ok, to_csv(res.trace)


def _cmd_run(args) -> int:
    _, ok, text = _run_one(args.config, args.out, args.seed)
    if text:
        sys.stdout.write(text)
    return 0 if ok else 1


def _cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    x0, funcs = _instance(cfg)
    if cfg.algorithm == "dual-ascent":
        x, y = oracle_allocation(funcs)
        payload = {"x": np.asarray(x).tolist(), "y": [np.asarray(v).tolist() for v in y]}
    else:
        x = oracle_dykstra(funcs, x0)
        payload = {"x": x.tolist()}
    json.dump(payload, sys.stdout)
    sys.stdout.write("\n")
    return 0


def _cmd_batch(args) -> int:
    configs = args.configs
    outs = [None] * len(configs)
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        outs = [str(Path(args.out_dir) / (Path(c).stem + ".csv")) for c in configs]
    failed = 0
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        futures = [pool.submit(_run_one, c, o, args.seed) for c, o in zip(configs, outs)]
        for c, fut in zip(configs, futures):
            try:
                _, ok, _ = fut.result()
            except (ConfigError, OSError) as exc:
                print(f"{c}: error: {exc}", file=sys.stderr)
                ok = False
            print(f"{c}: {'ok' if ok else 'not converged'}")
            failed += not ok
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dykstra-net", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment and write its CSV trace")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--seed", type=int)
    r.set_defaults(func=_cmd_run)
    o = sub.add_parser("oracle", help="print the centralized reference solution as JSON")
    o.add_argument("--config", required=True)
    o.set_defaults(func=_cmd_oracle)
    b = sub.add_parser("batch", help="run several experiments concurrently")
    b.add_argument("configs", nargs="+")
    b.add_argument("--out-dir")
    b.add_argument("--jobs", type=int)
    b.add_argument("--seed", type=int)
    b.set_defaults(func=_cmd_batch)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"{args.config if hasattr(args, 'config') else ''}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
