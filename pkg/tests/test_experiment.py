import csv
import json

import pytest

from volta.errors import ConfigError
from volta.experiment import (
    RECIPES,
    BoundaryConfig,
    CheckConfig,
    ExperimentConfig,
    GeneratorConfig,
    SolverConfig,
    StageError,
    WalkConfig,
    recipe,
    run_experiment,
    sweep,
)
from volta.files import sha256
from volta.solver import BoundaryCondition

DATA_FILES = ("net.txt", "field.csv", "stats.json")


def small_config(tmp_path, **kw) -> ExperimentConfig:
    cfg = ExperimentConfig(
        name="small",
        master_seed=5,
        output_dir=str(tmp_path / "run"),
        generator=GeneratorConfig("gnp", 120, alpha=2.0),
        boundary=BoundaryConfig(fractions="0:1.0,0.25:0.3,0.5:0.7,0.75:1.0"),
    )
    for k, v in kw.items():
        setattr(cfg, k, v)
    return cfg


def test_recipes_cover_the_grid_with_fixed_boundary():
    assert len(RECIPES) == 9
    for fig in ("fig1", "fig2", "fig3"):
        for scheme in ("unit", "uniform01", "powerlaw"):
            cfg = recipe(f"{fig}-{scheme}")
            assert cfg.boundary_condition() == BoundaryCondition([0, 250, 500, 750], [1.0, 0.3, 0.7, 1.0])
            assert cfg.generator.n == 1000
    assert recipe("fig2-unit").generator.p == 0.01
    assert recipe("fig3-powerlaw").generator.kind == "small_world"
    with pytest.raises(ConfigError):
        recipe("fig4-unit")


@pytest.mark.parametrize("name", RECIPES)
def test_recipe_config_roundtrip(name):
    cfg = recipe(name)
    assert ExperimentConfig.from_ini(cfg.to_ini()) == cfg


def test_custom_config_roundtrip(tmp_path):
    cfg = small_config(
        tmp_path,
        solver=SolverConfig(tol=3e-11, max_iter=5000, omega=1.25),
        walk=WalkConfig(walks_per_vertex=200),
        check=CheckConfig(enabled=True, alpha=None, delta=0.2, samples=50),
    )
    cfg.save(tmp_path / "c.ini")
    back = ExperimentConfig.load(tmp_path / "c.ini")
    assert back == cfg
    assert back.generator.p is None and back.solver.omega == 1.25


@pytest.mark.parametrize(
    "text",
    ["[run]\nnonsense = 1\n", "[extra]\nx = 1\n", "[generator]\nn = many\n", "[check]\nenabled = perhaps\n"],
)
def test_bad_config_text(text):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_ini(text)


def test_seeds_follow_master():
    a, b = recipe("fig2-unit"), recipe("fig2-unit")
    assert a.seeds() == b.seeds()
    b.master_seed = 2
    assert a.seeds()["generate"] != b.seeds()["generate"]
    assert len(set(a.seeds().values())) == len(a.seeds())


def test_fractional_boundary_resolution():
    b = BoundaryConfig(fractions="0:1.0,0.25:0.3,0.5:0.7,0.75:1.0")
    assert b.resolve(1000).vertices == (0, 250, 500, 750)
    assert b.resolve(500).vertices == (0, 125, 250, 375)
    with pytest.raises(ConfigError):
        BoundaryConfig(pins="1:1", fractions="0:1").resolve(10)


def test_run_outputs_and_manifest(tmp_path):
    cfg = small_config(tmp_path, walk=WalkConfig(walks_per_vertex=300), check=CheckConfig(enabled=True, samples=200))
    man = run_experiment(cfg)
    out = tmp_path / "run"
    assert man.status == "ok"
    assert set(man.outputs) == {"network", "field", "stats", "estimates", "report"}
    for entry in man.outputs.values():
        assert sha256(out / entry["path"]) == entry["sha256"]
    disk = json.loads((out / "manifest.json").read_text())
    assert disk["seeds"] == cfg.seeds() and disk["rng"]["walk"] == "splitmix64"
    assert set(disk["timings"]) == {"generate", "assign", "solve", "stats", "walk", "check"}
    rows = list(csv.DictReader((out / "field.csv").open()))
    assert len(rows) == 120 and rows[0]["vertex"] == "1"
    assert man.summary["walk_within_3se"] > 0.9
    assert set(man.summary["verdicts"]) == {"P1", "P2", "P3", "P4", "P5"}
    assert (out / "field.csv").read_bytes().count(b"\r") == 0


def test_rerun_is_byte_identical(tmp_path):
    a = run_experiment(small_config(tmp_path, output_dir=str(tmp_path / "a")))
    b = run_experiment(small_config(tmp_path, output_dir=str(tmp_path / "b")))
    for name in DATA_FILES:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert {k: v["sha256"] for k, v in a.outputs.items()} == {k: v["sha256"] for k, v in b.outputs.items()}


def test_stage_failure_is_recorded(tmp_path):
    cfg = small_config(tmp_path, boundary=BoundaryConfig(pins="1:1.0,500:0.0"))
    with pytest.raises(StageError) as err:
        run_experiment(cfg)
    assert err.value.stage == "solve"
    man = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert man["status"] == "failed" and man["failed_stage"] == "solve"
    assert (tmp_path / "run" / "net.txt").exists()
    assert not (tmp_path / "run" / "field.csv").exists()


def test_invalid_config_writes_nothing(tmp_path):
    cfg = small_config(tmp_path, generator=GeneratorConfig("gnp", 2, p=0.5))
    with pytest.raises(ConfigError):
        run_experiment(cfg)
    assert not (tmp_path / "run").exists()


def test_sweep_over_n(tmp_path):
    cfg = small_config(tmp_path, output_dir=str(tmp_path / "sw"))
    mans = sweep(cfg, "n", [500, 1000])
    assert [m.config["generator"]["n"] for m in mans] == [500, 1000]
    rows = list(csv.DictReader((tmp_path / "sw" / "summary.csv").open()))
    assert len(rows) == 2
    assert {"value", "v_bar_c", "max_dev", "mean_dev"} <= set(rows[0])
    assert mans[0].config["master_seed"] != mans[1].config["master_seed"]


def test_sweep_over_p_small_world_parallel(tmp_path):
    cfg = small_config(tmp_path, output_dir=str(tmp_path / "swp"))
    cfg.generator = GeneratorConfig("small_world", 300, p=0.01)
    serial = sweep(cfg, "p", [0.001, 0.005, 0.01])
    cfg.output_dir = str(tmp_path / "swp2")
    parallel = sweep(cfg, "p", [0.001, 0.005, 0.01], workers=2)
    assert len(serial) == 3 and all(m.status == "ok" for m in parallel)
    assert [m.outputs["field"]["sha256"] for m in serial] == [m.outputs["field"]["sha256"] for m in parallel]


def test_sweep_rejects_unknown_axis(tmp_path):
    with pytest.raises(ConfigError):
        sweep(small_config(tmp_path), "colour", [1, 2])
    with pytest.raises(ConfigError):
        sweep(small_config(tmp_path), "master_seed", [1, 2])


def test_builtin_recipe_runs(tmp_path):
    cfg = recipe("fig1-unit")
    cfg.output_dir = str(tmp_path / "fig1")
    man = run_experiment(cfg)
    assert len((tmp_path / "fig1" / "field.csv").read_text().splitlines()) == 1001
    assert man.summary["max_dev"] >= 0.25
    cfg = recipe("fig2-unit")
    cfg.output_dir = str(tmp_path / "fig2")
    assert run_experiment(cfg).summary["max_dev"] <= 0.15
    cfg = recipe("fig3-powerlaw")
    cfg.output_dir = str(tmp_path / "fig3")
    assert run_experiment(cfg).status == "ok"
