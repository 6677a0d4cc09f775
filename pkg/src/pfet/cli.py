"""``pfet`` command line: run, validate, bench."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ParseError, PfetError, ValidationError
from .he import make_provider

log = logging.getLogger("pfet")


def _load(path):
    from .scenario import load_scenario
    return load_scenario(path)


def run_command(scenario_file, out_dir, mode=None, backend="shadow", seed=0):
    """Run one scenario and write ``trace.csv``/``summary.csv``; returns the exit status."""
    from .market import run_to_equilibrium
    from .output import write_summary, write_trace
    from .protocol import run_protocol

    mode = mode or scenario_file.mode
    scenario = scenario_file.scenario
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if mode == "encrypted":
        trace = run_protocol(scenario, make_provider(backend, scenario_file.scheme), seed=seed)
    else:
        trace = run_to_equilibrium(scenario)
    write_trace(out / "trace.csv", trace, scenario)
    write_summary(out / "summary.csv", trace, scenario)
    if not trace.converged:
        log.error("no equilibrium after %d iterations (max_iters=%d)",
                  trace.iterations, scenario.params.max_iters)
        return 1
    log.info("%s run converged in %d iterations", mode, trace.iterations)
    return 0


def _cmd_run(args):
    sf = _load(args.scenario)
    overrides = {}
    if args.epsilon is not None:
        overrides["epsilon"] = args.epsilon
    if args.max_iters is not None:
        overrides["max_iters"] = args.max_iters
    if overrides:
        from dataclasses import replace
        scenario = sf.scenario.replace(**overrides)
        scenario.validate()
        sf = replace(sf, scenario=scenario)
    return run_command(sf, args.out, args.mode, args.backend, args.seed)


def _cmd_validate(args):
    sf = _load(args.scenario)
    print(f"ok: {len(sf.sellers)} sellers, {len(sf.buyers)} buyers, mode={sf.mode}")
    return 0


def _cmd_bench(args):
    from .bench import parse_sizes, run_bench
    from .output import write_bench

    report = run_bench(parse_sizes(args.sizes), reps=args.reps, log=log.info)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_bench(out, report)
    if report.coeffs is None:
        log.info("fewer than three sizes: no quadratic fit")
    else:
        a, b, c = report.coeffs
        log.info("encrypted time per round ~ %.4g n^2 + %.4g n + %.4g  (R^2 = %.4f)",
                 a, b, c, report.r2)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="pfet", description="Stackelberg P2P energy market")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario to equilibrium")
    r.add_argument("--scenario", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--mode", choices=["plaintext", "encrypted"])
    r.add_argument("--epsilon", type=float)
    r.add_argument("--max-iters", type=int)
    r.add_argument("--backend", default="shadow", help="HE backend for encrypted mode")
    r.add_argument("--seed", type=int, default=0, help="key generation seed")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("validate", help="parse and check a scenario file")
    v.add_argument("--scenario", required=True)
    v.set_defaults(func=_cmd_validate)

    b = sub.add_parser("bench", help="per-iteration timing, plaintext vs encrypted")
    b.add_argument("--sizes", default="10x10,20x20,30x30,40x40,50x50")
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--out", required=True)
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PfetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
