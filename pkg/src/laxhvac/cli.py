"""Command-line entry point: ``laxhvac <command> ...``."""
from __future__ import annotations

import argparse
import csv
from dataclasses import replace
import logging
from pathlib import Path
import sys

from .config import ConfigError, Scenario, dump_scenario, fixture_scenario, load_scenario
from .data import SeriesFormatError

log = logging.getLogger("laxhvac")


def _scenario(args) -> Scenario:
    sc = fixture_scenario() if args.config is None else load_scenario(args.config)
    if getattr(args, "seed", None) is not None:
        sc = replace(sc, seed=args.seed)
    if getattr(args, "episodes", None) is not None:
        sc = replace(sc, ddpg=replace(sc.ddpg, episodes=args.episodes))
    return sc


def _outdir(args, sc: Scenario) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_scenario(sc, out / "config.yaml")
    return out


def _write_summary(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "ATD", "TEC"])
        for m, atd, tec in rows:
            w.writerow([m, repr(float(atd)), repr(float(tec))])


def _print_table(rows):
    print(f"{'method':<12} {'ATD':>10} {'TEC':>12}")
    for m, atd, tec in rows:
        print(f"{m:<12} {atd:>10.4f} {tec:>12.4f}")


def _policy(spec: str, env):
    """``zero``, ``max``, ``constant:<kW>`` or a checkpoint path."""
    from .rl.ddpg import DDPGAgent

    if spec == "zero":
        return "abstract", lambda obs: 0.0
    if spec == "max":
        return "abstract", lambda obs: env.P_hi
    if spec.startswith("constant:"):
        P = float(spec.split(":", 1)[1])
        return "abstract", lambda obs: P
    agent = DDPGAgent.load(spec)
    kind = "abstract" if agent.obs_dim == 2 else "centralized"
    return kind, agent


def cmd_simulate(args) -> int:
    from .baselines.centralized import centralized_rollout
    from .env import metrics, rollout
    from .experiment import eval_initial_state
    from .rl.tasks import abstract_policy

    sc = _scenario(args)
    out = _outdir(args, sc)
    env = sc.build_env()
    _, ev = sc.windows(env)
    start = ev if args.start is None else args.start
    x0 = eval_initial_state(sc, env.fleet)
    kind, pol = _policy(args.policy, env)
    if kind == "centralized":
        trace = centralized_rollout(env, pol, x0, start)
    else:
        fn = pol if callable(pol) else abstract_policy(pol)
        trace = rollout(env, fn, x0, start)
    trace.to_csv(out / "trace.csv")
    rows = [(args.policy if kind == "abstract" and callable(pol) else kind, *metrics(trace))]
    _write_summary(out / "summary.csv", rows)
    _print_table(rows)
    return 0


def cmd_train(args) -> int:
    from .experiment import train_centralized, train_proposed

    sc = _scenario(args)
    out = _outdir(args, sc)
    fn = train_proposed if args.method == "proposed" else train_centralized
    agent, curve = fn(sc)
    agent.save(out / "checkpoint.npz")
    curve.to_csv(out / "learning_curve.csv")
    print(f"trained {args.method} for {len(curve)} episodes; "
          f"final reward {curve.reward[-1] if len(curve) else float('nan'):.4f}")
    return 0


def cmd_evaluate(args) -> int:
    from .experiment import convergence_episode, evaluate, train_centralized, train_proposed
    from .rl.ddpg import DDPGAgent

    sc = _scenario(args)
    out = _outdir(args, sc)
    agents = {}
    for name, ckpt, fn in (("proposed", args.proposed, train_proposed),
                           ("centralized", args.centralized, train_centralized)):
        if ckpt:
            agents[name] = DDPGAgent.load(ckpt)
        else:
            agent, curve = fn(sc)
            agent.save(out / f"{name}_checkpoint.npz")
            curve.to_csv(out / f"{name}_learning_curve.csv")
            log.info("%s converged at episode %d", name, convergence_episode(curve))
            agents[name] = agent
    ev = evaluate(sc, agents["proposed"], agents["centralized"], mpc=not args.no_mpc)
    for m, tr in ev.traces.items():
        tr.to_csv(out / f"trace_{m.lower()}.csv")
    rows = ev.table()
    _write_summary(out / "results.csv", rows)
    _print_table(rows)
    return 0


def cmd_mpc(args) -> int:
    from .baselines.mpc import run_mpc
    from .env import metrics
    from .experiment import eval_initial_state

    sc = _scenario(args)
    if args.window is not None:
        sc = replace(sc, mpc=replace(sc.mpc, window=args.window))
    out = _outdir(args, sc)
    env = sc.build_env()
    _, ev = sc.windows(env)
    start = ev if args.start is None else args.start
    trace = run_mpc(env, eval_initial_state(sc, env.fleet), start, sc.mpc.window)
    trace.to_csv(out / "trace.csv")
    rows = [("MPC", *metrics(trace))]
    _write_summary(out / "summary.csv", rows)
    _print_table(rows)
    return 0


def cmd_export_lp(args) -> int:
    from .baselines.lp import export_lp_text
    from .baselines.mpc import build_mpc_lp
    from .experiment import eval_initial_state

    sc = _scenario(args)
    env = sc.build_env()
    _, ev = sc.windows(env)
    start = ev if args.start is None else args.start
    T = args.horizon or sc.episode_length
    lp = build_mpc_lp(env.fleet, eval_initial_state(sc, env.fleet), env.price[start:start + T],
                      env.x_out[start:start + T], T, env.P_hi, sc.mpc.comfort_penalty)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    export_lp_text(lp, args.out)
    print(f"wrote {lp.n_rows} rows x {lp.n_vars} columns to {args.out}")
    return 0


def cmd_verify(args) -> int:
    from . import verify

    suites = {
        "zeta": lambda: verify.check_zeta_roundtrip(n=args.n),
        "monotone": lambda: verify.check_laxity_monotone(n=args.n),
        "llf": lambda: verify.check_llf_recovery(n=args.llf_instances),
        "gradients": lambda: verify.check_gradients(n=args.nets),
        "simplex": lambda: verify.check_simplex_vertices(n=args.lps),
        "abstraction": lambda: verify.check_abstraction(n=args.n),
    }
    names = args.only or list(suites)
    checks = []
    for name in names:
        checks.append(suites[name]())
        print(checks[-1].line(), flush=True)
    return 0 if all(c.passed for c in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="laxhvac", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True, out_help="output directory"):
        p.add_argument("--config", help="scenario YAML (default: built-in 10-unit fixture)")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        if out:
            p.add_argument("--out", required=True, help=out_help)

    p = sub.add_parser("simulate", help="roll out a fixed policy or a checkpoint")
    common(p)
    p.add_argument("--policy", default="zero",
                   help="zero, max, constant:<kW> or a checkpoint .npz (default zero)")
    p.add_argument("--start", type=int, help="episode start index (default: evaluation window)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train the aggregate or the centralized agent")
    common(p)
    p.add_argument("--method", choices=("proposed", "centralized"), default="proposed")
    p.add_argument("--episodes", type=int, help="override ddpg.episodes")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="ATD/TEC table for MPC, proposed and centralized")
    common(p)
    p.add_argument("--proposed", help="proposed-agent checkpoint (trained if omitted)")
    p.add_argument("--centralized", help="centralized-agent checkpoint (trained if omitted)")
    p.add_argument("--episodes", type=int, help="override ddpg.episodes when training")
    p.add_argument("--no-mpc", action="store_true", help="skip the MPC baseline")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("mpc", help="run the full-information MPC baseline")
    common(p)
    p.add_argument("--window", type=int, help="receding-horizon window (default: full episode)")
    p.add_argument("--start", type=int, help="episode start index (default: evaluation window)")
    p.set_defaults(func=cmd_mpc)

    p = sub.add_parser("export-lp", help="write the MPC linear program in LP text format")
    common(p, out_help="LP file to write")
    p.add_argument("--horizon", type=int, help="steps (default: episode length)")
    p.add_argument("--start", type=int, help="episode start index (default: evaluation window)")
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("verify", help="run the randomized property suites")
    p.add_argument("--n", type=int, default=1000, help="cases for the laxity suites")
    p.add_argument("--llf-instances", type=int, default=200, help="instances for the LLF suite")
    p.add_argument("--nets", type=int, default=50, help="networks for the gradient suite")
    p.add_argument("--lps", type=int, default=100, help="LPs for the simplex suite")
    p.add_argument("--only", nargs="+", metavar="SUITE",
                   choices=("zeta", "monotone", "llf", "gradients", "simplex", "abstraction"),
                   help="run only these suites")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SeriesFormatError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
