"""End-to-end experiment runs, parameter sweeps and the builtin recipes.

A run executes generate, assign, solve and stats, optionally followed by a
Monte Carlo cross-check and a properness audit, and writes its outputs plus a
``manifest.json`` into one directory. Every seed is derived from the master
seed, so a config file pins down the data outputs byte for byte.

Config files are INI with one section per stage::

    [run]
    name = fig2-unit
    master_seed = 1
    ...
    [generator]
    kind = gnp
    n = 1000
    p = 0.01
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import json
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import files
from ._version import __version__
from .concentration import concentration_stats
from .conductance import ConductanceScheme, assign, format_network
from .errors import ConfigError
from .generators import GenSpec, generate, p_from_alpha
from .properness import audit
from .rng import GRAPH_RNG, WALK_RNG, derive_seed
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, BoundaryCondition, solve
from .walks import WALK_BUDGET, hitting_probabilities

__all__ = [
    "GeneratorConfig",
    "ConductanceConfig",
    "BoundaryConfig",
    "SolverConfig",
    "WalkConfig",
    "CheckConfig",
    "ExperimentConfig",
    "RunManifest",
    "StageError",
    "RECIPES",
    "recipe",
    "run_experiment",
    "sweep",
    "SWEEP_AXES",
]

# stage -> key used to derive that stage's seed from the master seed
STAGE_KEYS = {"generate": 0, "assign": 1, "walk": 2, "check": 3}

RECIPE_BOUNDARY = "1:1.0,251:0.3,501:0.7,751:1.0"


@dataclass
class GeneratorConfig:
    kind: str = "gnp"
    n: int = 1000
    p: float | None = None
    alpha: float | None = None

    def edge_probability(self) -> float:
        if self.kind == "circle":
            return 0.0
        if self.p is not None:
            return self.p
        if self.alpha is not None:
            return p_from_alpha(self.alpha, self.n)
        raise ConfigError(f"generator {self.kind!r} needs p or alpha")


@dataclass
class ConductanceConfig:
    kind: str = "unit"
    gamma: float = 2.5
    epsilon: float = 1e-6


@dataclass
class BoundaryConfig:
    """Either explicit 1-based pins or fractional positions.

    ``fractions = "0:1.0,0.25:0.3"`` pins label ``floor(f * n) + 1`` to each
    potential, which keeps a boundary meaningful when ``n`` is swept.
    """

    pins: str = ""
    fractions: str = ""

    def resolve(self, n: int) -> BoundaryCondition:
        if bool(self.pins) == bool(self.fractions):
            raise ConfigError("boundary needs exactly one of pins or fractions")
        if self.pins:
            return BoundaryCondition.parse(self.pins)
        vs, ps = [], []
        for item in self.fractions.replace(" ", "").split(","):
            f, _, value = item.partition(":")
            if not 0.0 <= float(f) < 1.0:
                raise ConfigError(f"boundary fraction {f} outside [0, 1)")
            vs.append(math.floor(float(f) * n))
            ps.append(float(value))
        return BoundaryCondition(vs, ps)


@dataclass
class SolverConfig:
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    omega: float | None = None


@dataclass
class WalkConfig:
    walks_per_vertex: int = 0  # 0 disables the cross-check
    budget: int = WALK_BUDGET


@dataclass
class CheckConfig:
    enabled: bool = False
    alpha: float | None = None  # None: p * n / ln n
    delta: float = 0.1
    exhaustive_cap: int = 2
    samples: int = 10_000


@dataclass
class ExperimentConfig:
    name: str = "custom"
    master_seed: int = 1
    output_dir: str = "runs/custom"
    bins: int = 50
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    conductance: ConductanceConfig = field(default_factory=ConductanceConfig)
    boundary: BoundaryConfig = field(default_factory=lambda: BoundaryConfig(pins=RECIPE_BOUNDARY))
    solver: SolverConfig = field(default_factory=SolverConfig)
    walk: WalkConfig = field(default_factory=WalkConfig)
    check: CheckConfig = field(default_factory=CheckConfig)

    def seed(self, stage: str) -> int:
        return derive_seed(self.master_seed, STAGE_KEYS[stage])

    def seeds(self) -> dict[str, int]:
        return {stage: self.seed(stage) for stage in STAGE_KEYS}

    def gen_spec(self) -> GenSpec:
        g = self.generator
        return GenSpec(g.kind, g.n, g.edge_probability(), self.seed("generate"))

    def scheme(self) -> ConductanceScheme:
        c = self.conductance
        return ConductanceScheme(c.kind, self.seed("assign"), c.gamma, c.epsilon)

    def boundary_condition(self) -> BoundaryCondition:
        return self.boundary.resolve(self.generator.n)

    def check_alpha(self) -> float:
        if self.check.alpha is not None:
            return self.check.alpha
        if self.generator.alpha is not None:
            return self.generator.alpha
        return self.generator.edge_probability() * self.generator.n / math.log(self.generator.n)

    def validate(self) -> None:
        """Build every derived object once so bad values fail before any work."""
        try:
            self.gen_spec()
            self.scheme()
            self.boundary_condition()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.bins < 1 or self.solver.tol <= 0 or self.solver.max_iter < 1:
            raise ConfigError("bins, tol and max_iter must be positive")
        if self.walk.walks_per_vertex < 0:
            raise ConfigError("walks_per_vertex must be >= 0")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        top = {k: v for k, v in d.items() if k not in _SECTIONS}
        parts = {name: typ(**d.get(name, {})) for name, typ in _SECTIONS.items()}
        return cls(**top, **parts)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp["run"] = {f.name: _fmt(getattr(self, f.name)) for f in dataclasses.fields(self) if f.name not in _SECTIONS}
        for name in _SECTIONS:
            sub = getattr(self, name)
            cp[name] = {f.name: _fmt(getattr(sub, f.name)) for f in dataclasses.fields(sub)}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> ExperimentConfig:
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        unknown = set(cp.sections()) - {"run", *_SECTIONS}
        if unknown:
            raise ConfigError(f"unknown config sections {sorted(unknown)}")
        out = {}
        if cp.has_section("run"):
            out.update(_parse_section(cls, cp["run"], exclude=_SECTIONS))
        for name, typ in _SECTIONS.items():
            if cp.has_section(name):
                out[name] = _parse_section(typ, cp[name])
        return cls.from_dict(out)

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        return cls.from_ini(Path(path).read_text())

    def save(self, path: str | Path) -> None:
        files.atomic_write(path, self.to_ini())


_SECTIONS = {
    "generator": GeneratorConfig,
    "conductance": ConductanceConfig,
    "boundary": BoundaryConfig,
    "solver": SolverConfig,
    "walk": WalkConfig,
    "check": CheckConfig,
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _convert(text: str, typ: str, key: str):
    optional = "None" in typ
    if text == "" and optional:
        return None
    base = typ.replace("| None", "").strip()
    try:
        if base == "int":
            return int(text)
        if base == "float":
            return float(text)
        if base == "bool":
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot read {text!r} as {base}") from exc
    return text


def _parse_section(typ, section, exclude=()) -> dict:
    known = {f.name: f.type for f in dataclasses.fields(typ) if f.name not in exclude}
    out = {}
    for key, text in section.items():
        if key not in known:
            raise ConfigError(f"unknown config key {section.name}.{key}")
        out[key] = _convert(text.strip(), str(known[key]), f"{section.name}.{key}")
    return out


def _recipes() -> dict[str, ExperimentConfig]:
    graphs = {
        "fig1": GeneratorConfig("circle", 1000),
        "fig2": GeneratorConfig("gnp", 1000, 0.01),
        "fig3": GeneratorConfig("small_world", 1000, 0.001),
    }
    out = {}
    for fig, gen in graphs.items():
        for scheme in ("unit", "uniform01", "powerlaw"):
            name = f"{fig}-{scheme}"
            out[name] = ExperimentConfig(
                name=name,
                output_dir=f"runs/{name}",
                generator=dataclasses.replace(gen),
                conductance=ConductanceConfig(kind=scheme),
                boundary=BoundaryConfig(pins=RECIPE_BOUNDARY),
            )
    return out


RECIPES = tuple(_recipes())


def recipe(name: str) -> ExperimentConfig:
    """A fresh copy of a builtin recipe."""
    table = _recipes()
    if name not in table:
        raise ConfigError(f"unknown recipe {name!r}; choose from {', '.join(RECIPES)}")
    return table[name]


@dataclass
class RunManifest:
    """What a run did: inputs, seeds, timings and checksummed outputs.

    ``outputs`` maps a logical name to ``{"path", "sha256"}`` with paths
    relative to the run directory.
    """

    name: str
    version: str
    status: str
    config: dict
    seeds: dict[str, int]
    rng: dict[str, str]
    timings: dict[str, float] = field(default_factory=dict)
    outputs: dict[str, dict[str, str]] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    failed_stage: str | None = None
    error: str | None = None
    output_dir: str = ""

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def load(cls, path: str | Path) -> RunManifest:
        return cls(**json.loads(Path(path).read_text()))


class StageError(RuntimeError):
    """A pipeline stage failed; ``manifest`` records how far the run got."""

    def __init__(self, stage: str, cause: BaseException, manifest: RunManifest):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
        self.manifest = manifest


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Execute one configured run and write its outputs.

    Outputs (relative to ``cfg.output_dir``): ``net.txt``, ``field.csv``,
    ``stats.json``, ``estimates.csv`` when walks are enabled, ``report.json``
    when the audit is enabled, and ``manifest.json``.

    Raises:
        ConfigError: the config is invalid; nothing is written.
        StageError: a stage failed. Outputs of earlier stages are kept and the
            manifest is written with ``status="failed"``.
    """
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest(
        name=cfg.name,
        version=__version__,
        status="running",
        config=cfg.to_dict(),
        seeds=cfg.seeds(),
        rng={"graph": GRAPH_RNG, "conductance": GRAPH_RNG, "walk": WALK_RNG},
        output_dir=str(out),
    )

    def emit(key: str, filename: str, text: str) -> None:
        files.atomic_write(out / filename, text)
        man.outputs[key] = {"path": filename, "sha256": files.sha256(out / filename)}

    ctx: dict = {}
    stages = [
        ("generate", lambda: ctx.update(graph=generate(cfg.gen_spec()))),
        ("assign", lambda: _assign(cfg, ctx, emit)),
        ("solve", lambda: _solve(cfg, ctx, emit)),
        ("stats", lambda: _stats(cfg, ctx, emit, man)),
    ]
    if cfg.walk.walks_per_vertex > 0:
        stages.append(("walk", lambda: _walk(cfg, ctx, emit, man)))
    if cfg.check.enabled:
        stages.append(("check", lambda: _check(cfg, ctx, emit, man)))

    for stage, action in stages:
        t = time.perf_counter()
        try:
            action()
        except Exception as exc:
            man.timings[stage] = time.perf_counter() - t
            man.status = "failed"
            man.failed_stage = stage
            man.error = "".join(traceback.format_exception_only(type(exc), exc)).strip()
            files.write_json(out / "manifest.json", man.to_dict())
            raise StageError(stage, exc, man) from exc
        man.timings[stage] = time.perf_counter() - t
    man.status = "ok"
    files.write_json(out / "manifest.json", man.to_dict())
    return man


def _assign(cfg, ctx, emit):
    ctx["net"] = assign(ctx["graph"], cfg.scheme())
    ctx["bc"] = cfg.boundary_condition()
    emit("network", "net.txt", format_network(ctx["net"]))


def _solve(cfg, ctx, emit):
    s = cfg.solver
    ctx["field"] = solve(ctx["net"], ctx["bc"], s.tol, s.max_iter, s.omega)
    emit("field", "field.csv", files.field_csv(ctx["field"]))


def _stats(cfg, ctx, emit, man):
    fld = ctx["field"]
    st = concentration_stats(fld, ctx["net"], ctx["bc"], cfg.bins)
    doc = {
        "concentration": st.to_dict(),
        "solver": {
            "iterations": fld.iterations,
            "residual_norm": fld.residual_norm,
            "omega": fld.omega,
            "current_balance": fld.balance,
            "defined_count": int(fld.defined.sum()),
        },
        "boundary": ctx["bc"].format(),
    }
    emit("stats", "stats.json", files.dumps(doc))
    man.summary.update(v_bar_c=st.v_bar_c, max_dev=st.max_dev, mean_dev=st.mean_dev)


def _walk(cfg, ctx, emit, man):
    bc, fld = ctx["bc"], ctx["field"]
    est = hitting_probabilities(ctx["net"], bc, cfg.walk.walks_per_vertex, cfg.seed("walk"), budget=cfg.walk.budget)
    idx = np.flatnonzero(est.estimated)
    header = ["vertex", "estimate", "stderr", "walks", "solver"] + [f"hit_{v + 1}" for v in bc.vertices]
    rows = [
        [int(v) + 1, float(est.potential[v]), float(est.potential_se[v]), int(est.walks[v]), float(fld.values[v])]
        + [float(x) for x in est.probabilities[v]]
        for v in idx
    ]
    emit("estimates", "estimates.csv", files.table_csv(header, rows))
    interior = fld.interior_mask(bc)[idx]
    diff = np.abs(est.potential[idx] - fld.values[idx])[interior]
    se = est.potential_se[idx][interior]
    within = float(np.mean(diff <= 3 * se + 1e-12)) if len(diff) else 1.0
    man.summary.update(walk_within_3se=within, walk_steps=est.total_steps)


def _check(cfg, ctx, emit, man):
    c = cfg.check
    rep = audit(ctx["net"], cfg.check_alpha(), c.delta, ctx["bc"].vertices, c.exhaustive_cap, c.samples, cfg.seed("check"))
    emit("report", "report.json", files.dumps(rep.to_dict()))
    man.summary["verdicts"] = dict(sorted(rep.verdicts.items()))


# axis name -> (section, field); section None means a top-level field
SWEEP_AXES = {
    "n": ("generator", "n"),
    "p": ("generator", "p"),
    "alpha": ("generator", "alpha"),
    "gamma": ("conductance", "gamma"),
    "epsilon": ("conductance", "epsilon"),
    "tol": ("solver", "tol"),
    "max_iter": ("solver", "max_iter"),
    "omega": ("solver", "omega"),
    "walks_per_vertex": ("walk", "walks_per_vertex"),
    "delta": ("check", "delta"),
    "bins": (None, "bins"),
}


def _with_value(base: ExperimentConfig, axis: str, value, index: int, root: Path) -> ExperimentConfig:
    section, key = SWEEP_AXES[axis]
    d = base.to_dict()
    target = d if section is None else d[section]
    typ = _SECTIONS[section] if section else ExperimentConfig
    declared = {f.name: str(f.type) for f in dataclasses.fields(typ)}[key]
    target[key] = _convert(_fmt(value), declared, axis)
    if axis == "p":
        d["generator"]["alpha"] = None
    elif axis == "alpha":
        d["generator"]["p"] = None
    d["master_seed"] = derive_seed(base.master_seed, index)
    d["name"] = f"{base.name}-{axis}{index:03d}"
    d["output_dir"] = str(root / f"{axis}-{index:03d}")
    return ExperimentConfig.from_dict(d)


def _run_or_record(cfg: ExperimentConfig) -> RunManifest:
    try:
        return run_experiment(cfg)
    except StageError as exc:
        return exc.manifest


def sweep(base: ExperimentConfig, axis: str, values, workers: int = 1) -> list[RunManifest]:
    """One run per value of ``axis``; run ``i`` uses master seed ``(master, i)``.

    Runs land in ``base.output_dir/<axis>-<index>`` and a ``summary.csv`` with
    one row per run is written to ``base.output_dir``. Failed runs stay in the
    summary with their status and empty statistics.

    Raises:
        ConfigError: unknown axis or an invalid value.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"cannot sweep {axis!r}; numeric axes are {', '.join(SWEEP_AXES)}")
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    root = Path(base.output_dir)
    cfgs = [_with_value(base, axis, v, i, root) for i, v in enumerate(values)]
    for c in cfgs:
        c.validate()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            manifests = list(pool.map(_run_or_record, cfgs))
    else:
        manifests = [_run_or_record(c) for c in cfgs]

    rows = []
    for i, (v, m) in enumerate(zip(values, manifests)):
        s = m.summary
        rows.append([i, v, m.config["master_seed"], m.status,
                     *(float(s.get(k, math.nan)) for k in ("v_bar_c", "max_dev", "mean_dev"))])
    header = ["index", "value", "master_seed", "status", "v_bar_c", "max_dev", "mean_dev"]
    files.atomic_write(root / "summary.csv", files.table_csv(header, rows))
    return manifests
