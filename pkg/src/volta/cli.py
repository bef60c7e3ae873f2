"""Command-line entry point: ``volta <verb> [options]``.

Vertex labels on the command line and in every file are 1-based.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import files
from ._version import __version__
from .concentration import concentration_stats, consensus_run
from .conductance import ConductanceScheme, assign, format_network, read_network
from .errors import ConfigError, VoltaError
from .experiment import RECIPES, SWEEP_AXES, ExperimentConfig, StageError, recipe, run_experiment, sweep
from .generators import GenSpec, generate, p_from_alpha
from .graph import read_graph, write_graph
from .properness import audit
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, BoundaryCondition, solve
from .walks import hitting_probabilities, mixing_diagnostics

SEED_ENV = "VOLTA_SEED"


def _emit(text: str, out: str | None) -> None:
    if out:
        files.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from exc


def _seed(args) -> int:
    env = _env_seed()
    return env if env is not None else args.seed


def cmd_generate(args) -> int:
    p = args.p if args.p is not None else (p_from_alpha(args.alpha, args.n) if args.alpha is not None else 0.0)
    if args.kind != "circle" and args.p is None and args.alpha is None:
        raise ConfigError(f"{args.kind} needs --p or --alpha")
    g = generate(GenSpec(args.kind, args.n, p, _seed(args)))
    if args.out:
        write_graph(g, args.out)
    else:
        sys.stdout.write(f"{g.n} {g.edge_count}\n")
        sys.stdout.writelines(f"{i + 1} {j + 1}\n" for i, j in g.edges)
    return 0


def cmd_assign(args) -> int:
    g = read_graph(args.graph)
    net = assign(g, ConductanceScheme(args.scheme, _seed(args), args.gamma, args.epsilon))
    _emit(format_network(net), args.out)
    return 0


def cmd_solve(args) -> int:
    net = read_network(args.net)
    bc = BoundaryCondition.parse(args.boundary)
    fld = solve(net, bc, args.tol, args.max_iter, args.omega)
    _emit(files.field_csv(fld), args.out)
    print(f"sweeps={fld.iterations} residual={fld.residual_norm:.3g} omega={fld.omega:.6f}", file=sys.stderr)
    return 0


def cmd_walk(args) -> int:
    net = read_network(args.net)
    bc = BoundaryCondition.parse(args.boundary)
    starts = None if args.starts is None else [int(s) - 1 for s in args.starts.split(",")]
    est = hitting_probabilities(net, bc, args.walks, _seed(args), starts)
    header = ["vertex", "estimate", "stderr", "walks"] + [f"hit_{v + 1}" for v in bc.vertices]
    rows = [
        [int(v) + 1, float(est.potential[v]), float(est.potential_se[v]), int(est.walks[v])]
        + [float(x) for x in est.probabilities[v]]
        for v in np.flatnonzero(est.estimated)
    ]
    _emit(files.table_csv(header, rows), args.out)
    return 0


def cmd_mix(args) -> int:
    net = read_network(args.net)
    excluded = BoundaryCondition.parse(args.boundary) if args.boundary else None
    start = None if args.start is None else args.start - 1
    rep = mixing_diagnostics(net, excluded, args.k0, args.samples, _seed(args), start)
    d = rep.to_dict()
    d["start"] += 1
    _emit(files.dumps(d), args.out)
    return 0


def cmd_check(args) -> int:
    net = read_network(args.net)
    excluded = BoundaryCondition.parse(args.boundary).vertices if args.boundary else ()
    rep = audit(net, args.alpha, args.delta, excluded, args.exhaustive_cap, args.samples, _seed(args))
    _emit(files.dumps(rep.to_dict()), args.out)
    return 0 if all(v != "fails" for v in rep.verdicts.values()) else 3


def cmd_stats(args) -> int:
    net = read_network(args.net)
    bc = BoundaryCondition.parse(args.boundary)
    fld = files.read_field_csv(args.field)
    if fld.n != net.n:
        raise ConfigError(f"field has {fld.n} vertices, network has {net.n}")
    st = concentration_stats(fld, net, bc, args.bins)
    _emit(files.dumps(st.to_dict()), args.out)
    return 0


def cmd_consensus(args) -> int:
    net = read_network(args.net)
    bc = BoundaryCondition.parse(args.boundary)
    state, fld = consensus_run(net, bc, args.tol, args.max_steps)
    _emit(files.field_csv(fld), args.out)
    print(f"steps={state.t} delta={state.delta:.3g} hull_ok={state.hull_ok}", file=sys.stderr)
    return 0


def _config_from(args) -> ExperimentConfig:
    if (args.recipe is None) == (args.config is None):
        raise ConfigError("give exactly one of --recipe or --config")
    cfg = recipe(args.recipe) if args.recipe else ExperimentConfig.load(args.config)
    if args.out:
        cfg.output_dir = args.out
    if args.seed is not None:
        cfg.master_seed = args.seed
    env = _env_seed()
    if env is not None:
        cfg.master_seed = env
    return cfg


def cmd_run(args) -> int:
    cfg = _config_from(args)
    man = run_experiment(cfg)
    s = man.summary
    print(f"{man.name}: v_bar_c={s['v_bar_c']:.6f} max_dev={s['max_dev']:.6f} -> {man.output_dir}")
    return 0


def _parse_values(text: str) -> list:
    out = []
    for item in text.split(","):
        item = item.strip()
        try:
            out.append(int(item))
        except ValueError:
            out.append(float(item))
    return out


def cmd_sweep(args) -> int:
    cfg = _config_from(args)
    manifests = sweep(cfg, args.axis, _parse_values(args.values), args.workers)
    failed = [m for m in manifests if m.status != "ok"]
    print(f"{len(manifests)} runs, {len(failed)} failed; summary in {Path(cfg.output_dir) / 'summary.csv'}")
    for m in failed:
        print(f"  {m.name}: {m.failed_stage}: {m.error}", file=sys.stderr)
    return 1 if failed else 0


def cmd_recipes(args) -> int:
    for name in RECIPES:
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="volta", description="Potentials on random electrical networks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    def verb(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        return p

    def net_args(p, boundary=True, required=True):
        p.add_argument("--net", required=True, help="network file (n m / i j c)")
        if boundary:
            p.add_argument("--boundary", required=required, help='pins such as "1:1.0,251:0.3"')
        p.add_argument("--out", help="output file (default stdout)")

    p = verb("generate", cmd_generate, "sample a graph")
    p.add_argument("--kind", required=True, choices=["gnp", "circle", "small_world"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--alpha", type=float, help="p = alpha ln n / n")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = verb("assign", cmd_assign, "attach conductances to a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--scheme", default="unit", choices=["unit", "uniform01", "powerlaw", "power_law"])
    p.add_argument("--gamma", type=float, default=2.5)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = verb("solve", cmd_solve, "solve for the harmonic potential")
    net_args(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--omega", type=float, help="relaxation factor (default: automatic)")

    p = verb("walk", cmd_walk, "Monte Carlo hitting probabilities")
    net_args(p)
    p.add_argument("--walks", type=int, default=10_000, help="walks per start vertex")
    p.add_argument("--starts", help="comma-separated start labels (default: all)")
    p.add_argument("--seed", type=int, default=0)

    p = verb("mix", cmd_mix, "mixing and escape diagnostics")
    net_args(p, required=False)
    p.add_argument("--k0", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--start", type=int, help="start label (default: smallest non-boundary)")
    p.add_argument("--seed", type=int, default=0)

    p = verb("check", cmd_check, "properness audit; exit status 3 if a property fails")
    net_args(p, required=False)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--exhaustive-cap", type=int, default=2)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)

    p = verb("stats", cmd_stats, "concentration statistics of a field")
    net_args(p)
    p.add_argument("--field", required=True)
    p.add_argument("--bins", type=int, default=50)

    p = verb("consensus", cmd_consensus, "leader-follower averaging to its fixed point")
    net_args(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-steps", type=int, default=10_000_000)

    for name, fn, help_ in (("run", cmd_run, "run one experiment"), ("sweep", cmd_sweep, "sweep one config field")):
        p = verb(name, fn, help_)
        p.add_argument("--recipe", choices=RECIPES)
        p.add_argument("--config", help="INI config file")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help=f"master seed (env {SEED_ENV} takes precedence)")
        if name == "sweep":
            p.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
            p.add_argument("--values", required=True, help="comma-separated values")
            p.add_argument("--workers", type=int, default=1)

    verb("recipes", cmd_recipes, "list builtin recipes")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except StageError as exc:
        print(f"volta: {exc} (manifest: {Path(exc.manifest.output_dir) / 'manifest.json'})", file=sys.stderr)
        return 1
    except (VoltaError, ValueError, IndexError, OSError) as exc:
        print(f"volta: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
