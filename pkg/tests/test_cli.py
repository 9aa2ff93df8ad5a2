"""Tests for the command-line interface."""
import importlib
import json
import sys

import pytest
from click.testing import CliRunner

from adiasearch.components.analysis import ScalingRecord
from adiasearch.components.evolution import Schedule, evolve
from adiasearch.components.hamiltonian import search_hamiltonian
from adiasearch.config import EXAMPLE_DATABASE
from adiasearch.main import RunConfig, cli, parse_algorithms, parse_n_range, parse_window
from adiasearch.utils.errors import InputError, RangeError
from adiasearch.utils.io import read_csv, read_json

main_module = importlib.import_module("adiasearch.main")

EXAMPLE = str(EXAMPLE_DATABASE)


def run(*args):
    return CliRunner().invoke(cli, list(args))


class TestSearchCommand:
    """adiasearch search"""

    def test_until_keeps_gap_adaptive_shape(self, tmp_path):
        """--until doubles the total time of a gap-adaptive sweep."""
        out = tmp_path / "out.json"
        result = run(
            "search", "--db", EXAMPLE, "--target", "5", "--until", "0.9",
            "--schedule", "gap-adaptive", "--out", str(out),
        )
        assert result.exit_code == 0, result.output
        summary = read_json(out)
        assert summary["schedule"] == "gap-adaptive"
        assert summary["success_probability"] >= 0.9

    def test_example_instance(self, tmp_path):
        """The worked example finds index 2."""
        out = tmp_path / "out.json"
        result = run("search", "--db", EXAMPLE, "--target", "5", "--g", "0.5", "--T", "100", "--out", str(out))
        assert result.exit_code == 0, result.output
        summary = read_json(out)
        assert summary["solution_index"] == 2
        assert summary["n"] == 3 and summary["target"] == 5
        assert summary["algorithm"] == "bitsum"

    def test_until_probability(self, tmp_path):
        """Doubling T until P >= 0.99 solves the worked example."""
        out = tmp_path / "out.json"
        result = run("search", "--db", EXAMPLE, "--target", "5", "--until", "0.99", "--out", str(out))
        assert result.exit_code == 0, result.output
        summary = read_json(out)
        assert summary["solution_index"] == 2
        assert summary["success_probability"] >= 0.99

    def test_no_evolution_time(self, tmp_path):
        """A tiny T still exits 0 and reports P close to 1/8."""
        out = tmp_path / "out.json"
        result = run("search", "--db", EXAMPLE, "--target", "5", "--T", "0.001", "--out", str(out))
        assert result.exit_code == 0
        assert read_json(out)["success_probability"] == pytest.approx(0.125, abs=1e-3)

    def test_trajectory_and_plot_data(self, tmp_path):
        """Trajectory and plot-data files parse back."""
        traj, plot, out = tmp_path / "t.csv", tmp_path / "p.csv", tmp_path / "o.json"
        result = run(
            "search", "--db", EXAMPLE, "--target", "5", "--T", "2", "--samples", "11",
            "--trajectory", str(traj), "--plot-data", str(plot), "--out", str(out),
        )
        assert result.exit_code == 0
        frame = read_csv(traj)
        assert len(frame) == 11
        assert frame["s"].iloc[-1] == 1.0
        assert list(read_csv(plot).columns) == ["series", "x", "key", "value"]

    def test_default_samples_with_trajectory(self, tmp_path):
        """Asking for a trajectory without --samples records 101 samples."""
        traj = tmp_path / "t.csv"
        result = run("search", "--target", "5", "--T", "1", "--trajectory", str(traj), "--out", str(tmp_path / "o.json"))
        assert result.exit_code == 0
        assert len(read_csv(traj)) == 101

    def test_gap_adaptive(self, tmp_path):
        """The gap-adaptive schedule runs over its natural time."""
        out = tmp_path / "out.json"
        result = run(
            "search", "--db", EXAMPLE, "--target", "5", "--schedule", "gap-adaptive",
            "--epsilon", "0.5", "--out", str(out),
        )
        assert result.exit_code == 0, result.output
        summary = read_json(out)
        assert summary["schedule"] == "gap-adaptive"
        assert summary["T"] > 0

    def test_fixed_steps(self, tmp_path):
        out = tmp_path / "out.json"
        result = run("search", "--target", "5", "--T", "1", "--fixed-steps", "200", "--out", str(out))
        assert result.exit_code == 0
        assert read_json(out)["steps_taken"] == 200

    def test_random_instance(self, tmp_path):
        """--n/--seed generates the database and target."""
        out = tmp_path / "out.json"
        result = run("search", "--n", "4", "--seed", "3", "--T", "5", "--out", str(out))
        assert result.exit_code == 0, result.output
        assert read_json(out)["n"] == 4

    def test_msas_algorithm(self, tmp_path):
        out = tmp_path / "out.json"
        result = run("search", "--target", "5", "--algorithm", "msas", "--T", "50", "--out", str(out))
        assert result.exit_code == 0
        assert read_json(out)["solution_index"] == 2

    def test_malformed_database(self, tmp_path):
        """A broken database file exits 3."""
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"n": 2, "values": [0, 0, 1, 2]}), encoding="utf-8")
        result = run("search", "--db", str(bad), "--target", "1", "--T", "1")
        assert result.exit_code == 3

    def test_missing_database(self, tmp_path):
        result = run("search", "--db", str(tmp_path / "none.json"), "--target", "1", "--T", "1")
        assert result.exit_code == 3

    def test_target_out_of_range(self):
        """A target wider than the database exits 4."""
        assert run("search", "--db", EXAMPLE, "--target", "9", "--T", "1").exit_code == 4

    def test_missing_time(self):
        """A linear schedule needs --T or --until."""
        assert run("search", "--db", EXAMPLE, "--target", "5").exit_code == 3

    def test_negative_time(self):
        assert run("search", "--target", "5", "--T", "-1").exit_code == 4

    def test_integration_failure(self):
        """An integrator failure exits 5."""
        assert run("search", "--target", "5", "--T", "1", "--tol", "1e-30").exit_code == 5

    def test_best_match_exit_code(self, mocker, example_db, example_target, tmp_path):
        """A run whose minimum problem energy is nonzero exits 2."""
        shifted = search_hamiltonian(example_db, example_target).shifted(1.0)
        mocker.patch.object(main_module, "evolve", return_value=evolve(shifted, Schedule.linear(1.0)))
        out = tmp_path / "out.json"
        result = run("search", "--target", "5", "--T", "1", "--out", str(out))
        assert result.exit_code == 2
        assert read_json(out)["best_match"] is True

    def test_deterministic_output(self, tmp_path):
        """Identical flags give byte-identical files."""
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for path in paths:
            run("search", "--n", "4", "--seed", "9", "--T", "3", "--out", str(path))
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestSpectrumCommand:
    """adiasearch spectrum"""

    def test_example_levels(self, tmp_path):
        """Eight levels on 201 points plus the gap summary."""
        csv, gap, plot = tmp_path / "s.csv", tmp_path / "g.json", tmp_path / "p.csv"
        result = run(
            "spectrum", "--db", EXAMPLE, "--target", "5", "--levels", "8",
            "--out", str(csv), "--gap-out", str(gap), "--plot-data", str(plot),
        )
        assert result.exit_code == 0, result.output
        frame = read_csv(csv)
        assert frame.shape == (201, 9)
        assert frame.iloc[0]["s"] == 0.0
        assert frame.iloc[0]["E_0"] == pytest.approx(-1.5)
        assert read_json(gap)["grid_points"] == 201
        assert len(read_csv(plot)) == 201 * 8

    def test_single_level_forced_to_two(self, tmp_path):
        """--levels 1 is raised to 2 so a gap exists."""
        csv, gap = tmp_path / "s.csv", tmp_path / "g.json"
        result = run("spectrum", "--target", "5", "--levels", "1", "--points", "21",
                     "--out", str(csv), "--gap-out", str(gap))
        assert result.exit_code == 0
        assert list(read_csv(csv).columns) == ["s", "E_0", "E_1"]
        assert read_json(gap)["min_gap"] is not None

    def test_msas_gap(self, tmp_path):
        """Marked-state search at n=3 has its minimum gap 0.3536 at s=0.5."""
        gap = tmp_path / "g.json"
        result = run("spectrum", "--algorithm", "msas", "--n", "3", "--marked", "2",
                     "--out", str(tmp_path / "s.csv"), "--gap-out", str(gap))
        assert result.exit_code == 0, result.output
        summary = read_json(gap)
        assert summary["min_gap"] == pytest.approx(0.353553, rel=0.01)
        assert summary["s_star"] == pytest.approx(0.5, rel=0.01)

    def test_too_many_levels(self, tmp_path):
        result = run("spectrum", "--target", "5", "--levels", "9", "--out", str(tmp_path / "s.csv"))
        assert result.exit_code == 4


class TestScalingCommand:
    """adiasearch scaling"""

    def test_small_sweep_is_deterministic(self, tmp_path):
        """Two identical sweeps write identical CSV and fit files."""
        outputs = []
        for tag in ("a", "b"):
            csv, fit = tmp_path / f"{tag}.csv", tmp_path / f"{tag}.json"
            result = run(
                "scaling", "--n", "3..5", "--instances", "2", "--algorithms", "msas",
                "--seed", "42", "--out", str(csv), "--fit-out", str(fit),
            )
            assert result.exit_code == 0, result.output
            outputs.append((csv.read_bytes(), fit.read_bytes()))
        assert outputs[0] == outputs[1]
        frame = read_csv(tmp_path / "a.csv")
        assert len(frame) == 6
        assert frame["success_prob"].between(0.12, 0.13).all()
        fits = read_json(tmp_path / "a.json")
        assert fits[0]["algorithm"] == "msas"
        assert fits[0]["n_values"] == [3, 4, 5]

    def test_too_few_widths(self, tmp_path):
        """Two bit widths cannot be fitted: exit 6."""
        result = run("scaling", "--n", "3..4", "--instances", "1", "--algorithms", "msas",
                     "--out", str(tmp_path / "r.csv"))
        assert result.exit_code == 6
        assert len(read_csv(tmp_path / "r.csv")) == 2

    def test_instance_cap(self, tmp_path):
        """Asking for more instances than 2^n caps them."""
        csv = tmp_path / "r.csv"
        result = run("scaling", "--n", "2", "--instances", "50", "--algorithms", "msas", "--out", str(csv))
        assert result.exit_code == 6
        assert len(read_csv(csv)) == 4

    def test_rows_streamed_per_record(self, mocker, tmp_path):
        """Each finished record is on disk before the next one completes."""
        csv = tmp_path / "r.csv"
        on_disk = []

        def sweep(n_values, instances, algorithms, seed, on_record=None, **kwargs):
            records = []
            for n in n_values:
                record = ScalingRecord("msas", n, 0, 7, 2.0**n, 0.125, 10)
                on_record(record)
                on_disk.append(len(read_csv(csv)))
                records.append(record)
            return records

        mocker.patch.object(main_module, "run_scaling_experiment", side_effect=sweep)
        result = run("scaling", "--n", "3..5", "--algorithms", "msas", "--out", str(csv))
        assert result.exit_code == 0, result.output
        assert on_disk == [1, 2, 3]
        assert read_csv(csv)["n"].tolist() == [3, 4, 5]

    @pytest.mark.parametrize(
        "flags",
        [["--window", "0.2"], ["--algorithms", "grover"], ["--n", "five"]],
    )
    def test_bad_flags(self, flags):
        assert run("scaling", *flags).exit_code == 3

    def test_bad_window_range(self):
        assert run("scaling", "--window", "0.3,0.2").exit_code == 4


class TestPerturbativeCommand:
    """adiasearch perturbative"""

    def test_reference_counts(self, tmp_path):
        out = tmp_path / "p.json"
        result = run("perturbative", "--n", "8", "--mc", "2", "--ec", "3", "--out", str(out))
        assert result.exit_code == 0
        summary = read_json(out)
        assert (summary["s_plus"], summary["s_minus"]) == (9, 37)
        assert summary["qubits"]["grover_complete"] == 24

    def test_unit_cutoff(self, tmp_path):
        out = tmp_path / "p.json"
        assert run("perturbative", "--n", "8", "--mc", "1", "--out", str(out)).exit_code == 0
        assert read_json(out)["s_plus"] == 1

    def test_cutoff_out_of_range(self):
        assert run("perturbative", "--n", "8", "--ec", "9").exit_code == 4

    def test_raw_parameters(self, tmp_path):
        """Cutoffs derived from delta, s* and epsilon_0."""
        out = tmp_path / "p.json"
        result = run("perturbative", "--n", "8", "--delta", "0.1", "--out", str(out))
        assert result.exit_code == 0
        assert read_json(out)["params"]["delta"] == 0.1

    def test_raw_and_cutoffs_conflict(self):
        assert run("perturbative", "--n", "8", "--delta", "0.1", "--mc", "2").exit_code == 3


class TestConfigAndParsing:
    """RunConfig validation and flag parsers."""

    def test_parsers(self):
        assert parse_n_range("5..11") == (5, 11)
        assert parse_n_range("7") == (7, 7)
        assert parse_window("0.1,0.2") == (0.1, 0.2)
        assert parse_algorithms("msas, bitsum,msas") == ("msas", "bitsum")

    def test_validate(self, tmp_path):
        assert RunConfig("search").validate().jobs >= 1
        with pytest.raises(RangeError):
            RunConfig("search", tol=0.0).validate()
        with pytest.raises(InputError):
            RunConfig("search", db_path=tmp_path / "db.json", n=3).validate()

    def test_main_maps_usage_errors(self, monkeypatch):
        """Click usage errors exit 3 through the console entry point."""
        monkeypatch.setattr(sys, "argv", ["adiasearch", "search", "--g", "abc"])
        with pytest.raises(SystemExit) as info:
            main_module.main()
        assert info.value.code == 3

    def test_main_success(self, monkeypatch, tmp_path):
        out = tmp_path / "p.json"
        monkeypatch.setattr(sys, "argv", ["adiasearch", "perturbative", "--n", "4", "--out", str(out)])
        with pytest.raises(SystemExit) as info:
            main_module.main()
        assert info.value.code == 0
        assert read_json(out)["n"] == 4


class TestEnvironmentDefaults:
    """$ADIASEARCH_SEED and $ADIASEARCH_JOBS"""

    def test_seed_from_environment(self, tmp_path):
        """The environment seed stands in for --seed."""
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        from_env = CliRunner().invoke(
            cli, ["search", "--n", "4", "--T", "1", "--out", str(a)], env={"ADIASEARCH_SEED": "99"}
        )
        from_flag = run("search", "--n", "4", "--seed", "99", "--T", "1", "--out", str(b))
        assert from_env.exit_code == 0 and from_flag.exit_code == 0
        assert read_json(a) == read_json(b)

    @pytest.mark.parametrize(
        "env, args",
        [
            ({"ADIASEARCH_SEED": "abc"}, ["search", "--n", "3", "--T", "1"]),
            ({"ADIASEARCH_JOBS": "two"}, ["spectrum", "--db", EXAMPLE, "--target", "5", "--points", "5"]),
        ],
    )
    def test_malformed_environment_is_input_error(self, env, args):
        """A non-integer environment default exits 3 instead of crashing."""
        assert CliRunner().invoke(cli, args, env=env).exit_code == 3
