"""Benchmark driver, table output and the command-line interface."""

import math

import numpy as np
import pytest

from mgcycles import CycleSpec, ResultRow, SpectralBounds, Status, emit, run_suite
from mgcycles.bench import (SUITES, ExperimentConfig, format_cycle, parse_bounds, parse_config,
                            parse_cycle)
from mgcycles.cli import main


def row(status, factor=0.407385, iters=29, cycle="n", k=2, bounds="fixed:0,1", m=64):
    return ResultRow("poisson", m, cycle, k, bounds, iters, factor, Status(status))


class TestParsing:
    def test_bounds(self):
        assert parse_bounds("estimate") == "estimate"
        assert parse_bounds("fixed:0.1,1") == SpectralBounds(0.1, 1.0)
        assert parse_bounds("0,2") == SpectralBounds(0.0, 2.0)
        with pytest.raises(ValueError):
            parse_bounds("fixed:0.1")

    def test_cycle_tokens(self):
        assert parse_cycle("tg") == CycleSpec("tg")
        assert parse_cycle("kv:2") == CycleSpec("kv", 2)
        assert parse_cycle("n:3") == CycleSpec("n", 3, (0.0, 1.0))
        assert parse_cycle("h:4:fixed:0.1,1") == CycleSpec("h", 4, (0.1, 1.0))
        assert parse_cycle("amli:2:estimate") == CycleSpec("amli", 2, "estimate")
        with pytest.raises(ValueError):
            parse_cycle("x:2")

    @pytest.mark.parametrize("kind", ["kv", "k", "amli", "h", "n"])
    @pytest.mark.parametrize("k", range(1, 8))
    def test_every_table_row_expressible(self, kind, k):
        policies = ["", ":estimate", ":fixed:0,1", ":fixed:0.1,1"] if kind in ("amli", "h", "n") \
            else [""]
        for policy in policies:
            spec = parse_cycle(f"{kind}:{k}{policy}")
            assert parse_cycle(format_cycle(spec)) == spec

    def test_config_file(self):
        text = """
        # comment line
        examples = poisson, jump   # trailing comment
        m = 16, 32
        cycles = tg; n:2:estimate; h:3:fixed:0.1,1
        tol = 1e-8
        max_iters = 50
        seed = 4
        """
        cfg = parse_config(text)
        assert [e.value for e in cfg.examples] == ["poisson", "jump"]
        assert cfg.ms == (16, 32)
        assert cfg.cycles == (CycleSpec("tg"), CycleSpec("n", 2, "estimate"),
                              CycleSpec("h", 3, (0.1, 1.0)))
        assert (cfg.tol, cfg.max_iters, cfg.seed) == (1e-8, 50, 4)

    def test_suite_and_overrides(self):
        cfg = parse_config("suite = standard\ncycles = n:7", ms=(8,), seed=None)
        assert cfg.cycles[: len(SUITES["standard"])] == tuple(SUITES["standard"])
        assert cfg.cycles[-1] == CycleSpec("n", 7)
        assert cfg.ms == (8,) and cfg.seed == 0

    @pytest.mark.parametrize("text", ["bogus = 1", "m 64", "suite = nope", "tol = 2"])
    def test_invalid_config(self, text):
        with pytest.raises(ValueError):
            parse_config(text)


class TestRunSuite:
    def test_empty(self):
        assert run_suite(ExperimentConfig(ms=(8,))) == []
        assert emit([], "csv") == "example,m,cycle,k,bounds,iters,factor,status\n"

    def test_two_grid(self):
        rows = run_suite(ExperimentConfig(ms=(64,), cycles=("tg",)))
        assert len(rows) == 1 and rows[0].status is Status.CONVERGED

    def test_h_cycle_diverges(self):
        rows = run_suite(ExperimentConfig(ms=(64,), cycles=("h:3:fixed:0,1",)))
        assert rows[0].status is Status.DIVERGED

    def test_failure_becomes_row(self):
        rows = run_suite(ExperimentConfig(ms=(8,), cycles=("n:2",), coarsest_size=1,
                                          theta=0.99))
        assert rows[0].status is Status.FAILED and rows[0].message

    def test_order_and_reproducibility(self):
        cfg = ExperimentConfig(examples=("aniso", "poisson"), ms=(16, 8),
                               cycles=("n:2:estimate", "kv:1", "k:2"), coarsest_size=10)
        rows = run_suite(cfg)
        keys = [(r.example, r.m, r.cycle) for r in rows]
        assert keys[:3] == [("aniso", 16, "n"), ("aniso", 16, "kv"), ("aniso", 16, "k")]
        assert keys[3][1] == 8 and keys[6][0] == "poisson"
        for fmt in ("csv", "markdown"):
            assert emit(run_suite(cfg), fmt) == emit(rows, fmt)

    def test_parallel_matches_serial(self):
        cfg = ExperimentConfig(ms=(8, 16), cycles=("amli:2:estimate", "tg"), coarsest_size=10)
        serial = run_suite(cfg)
        parallel = run_suite(ExperimentConfig(**{**cfg.__dict__, "jobs": 2}))
        assert emit(serial) == emit(parallel)


class TestEmit:
    def test_converged_cell(self):
        assert "| 0.407385 (29) |" in emit([row("converged")], "markdown")

    def test_diverged_cell(self):
        text = emit([row("diverged", factor=math.inf, iters=2)], "markdown")
        assert text.splitlines()[-1].endswith("| - |")

    def test_max_iterations_cell(self):
        assert "| 0.980392 (999) |" in emit([row("max_iterations", 0.980392, 999)], "markdown")

    def test_failed_cell(self):
        assert "| failed |" in emit([row("failed", math.nan, 0)], "markdown")

    def test_table_layout(self):
        rows = [row("converged", m=64), row("converged", 0.41, 30, m=128),
                row("converged", 0.5, 34, cycle="tg", k=1, bounds="")]
        lines = emit(rows, "markdown").splitlines()
        assert lines[0] == "### poisson"
        assert lines[2] == "| cycle | k | h=1/64 | h=1/128 |"
        assert lines[4] == "| N-cycle (lambda_min = 0) | 2 | 0.407385 (29) | 0.410000 (30) |"
        assert lines[5] == "| Two-grid |  | 0.500000 (34) |  |"

    def test_csv(self):
        lines = emit([row("converged")]).splitlines()
        assert lines[1] == 'poisson,64,n,2,"fixed:0,1",29,0.407385,converged'

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            emit([], "json")


class TestCLI:
    def test_theory(self, capsys):
        assert main(["theory", "--k", "2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "family,k,delta,delta_TG,residual"
        assert lines[1].startswith("H,2,") and lines[2].startswith("N,2,")
        assert float(lines[1].split(",")[3]) == pytest.approx(0.5464, abs=5e-4)

    def test_poly(self, tmp_path):
        out = tmp_path / "curves.csv"
        assert main(["poly", "--k", "2", "3", "--step", "0.01", "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 1 + 2 * 101

    def test_assemble_and_solve(self, tmp_path, capsys):
        assert main(["assemble", "--example", "jump", "--m", "16", "--out", str(tmp_path)]) == 0
        mtx = tmp_path / "jump_m16.mtx"
        assert mtx.exists()
        capsys.readouterr()
        assert main(["solve", "--matrix", str(mtx), "--rhs", str(tmp_path / "jump_m16_rhs.txt"),
                     "--cycle", "n", "--k", "2", "--coarsest-size", "10",
                     "--format", "csv"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[1].startswith('jump_m16,0,n,2,"fixed:0,1",')
        assert out[1].endswith(",converged")

    def test_solve_text_with_history(self, capsys):
        assert main(["solve", "--m", "16", "--cycle", "amli", "--k", "2", "--bounds", "estimate",
                     "--coarsest-size", "10", "--history", "--summary"]) == 0
        captured = capsys.readouterr()
        lines = captured.out.splitlines()
        assert lines[0].startswith("poisson m=16 AMLI-cycle k=2 estimate: converged")
        assert lines[1].startswith("0 1.0")
        assert captured.err.startswith("level,n,nnz,lambda_min,lambda_max")

    def test_bench(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("examples = poisson\nm = 8\ncycles = tg; kv:1\ncoarsest_size = 10\n")
        assert main(["bench", "--config", str(cfg), "--format", "markdown"]) == 0
        text = capsys.readouterr().out
        assert "| cycle | k | h=1/8 |" in text and "| kV-cycle | 1 |" in text

    def test_bad_input_exit_code(self, tmp_path):
        assert main(["solve", "--matrix", str(tmp_path / "missing.mtx")]) == 2
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("nonsense = 1\n")
        assert main(["bench", "--config", str(cfg)]) == 2

    def test_bad_bounds_rejected(self):
        with pytest.raises(SystemExit):
            main(["solve", "--bounds", "fixed:1"])


def test_sd_euclid_selectable_from_cli(capsys):
    assert main(["solve", "--m", "16", "--cycle", "n", "--k", "2", "--init", "sd_euclid",
                 "--coarsest-size", "10", "--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines()[1].startswith("poisson,16,n,2,")


def test_factor_formatting_six_decimals():
    r = row("converged", factor=float(np.float64(0.5)))
    assert emit([r]).splitlines()[1].split(",")[-2] == "0.500000"
