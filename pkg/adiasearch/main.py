#!/usr/bin/env python3
"""
adiasearch command-line interface.

Simulates adiabatic search of an unsorted database whose values act as
interaction strengths, and reproduces the spectrum, scaling and perturbative
estimate workflows.
"""
import functools
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Tuple

import click
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn

from .components.analysis import (
    RECORD_COLUMNS,
    Algorithm,
    PerturbativeParams,
    find_time_for_probability,
    fit_alpha,
    fit_summary,
    perturbative_cardinalities,
    perturbative_summary,
    records_frame,
    run_scaling_experiment,
)
from .components.database import (
    Database,
    SearchTarget,
    load_database,
    random_database,
    random_target,
)
from .components.evolution import (
    Schedule,
    ScheduleKind,
    evolve,
    make_gap_adaptive_schedule,
    occupation_plot_data,
    result_summary,
    trajectory_frame,
)
from .components.hamiltonian import (
    HamiltonianKind,
    InitialForm,
    SearchHamiltonian,
    msas_hamiltonian,
    search_hamiltonian,
)
from .components.spectrum import (
    default_grid,
    gap_profile,
    gap_summary,
    instantaneous_spectrum,
    level_plot_data,
    spectrum_frame,
)
from .config import (
    DEFAULT_G,
    DEFAULT_INSTANCES,
    DEFAULT_JOBS,
    DEFAULT_N_RANGE,
    DEFAULT_SEED_BASE,
    DEFAULT_T0,
    DEFAULT_TOL,
    DEGENERACY_GAP,
    EXAMPLE_DATABASE,
    GRID_POINTS,
    JOBS_ENV,
    MAX_BITS,
    PLOT_LEVELS,
    SCALING_TOL,
    SEED_ENV,
    SUCCESS_WINDOW,
    configure_logging,
    console,
    env_default,
)
from .utils.errors import AdiasearchError, ExitCode, InputError, InsufficientDataError, RangeError
from .utils.io import CsvStream, write_csv, write_json
from .utils.rendering import render_fits, render_gap, render_perturbative, render_search

logger = logging.getLogger("adiasearch")

DEFAULT_SAMPLES = 101


@dataclass(frozen=True)
class RunConfig:
    """Flags of one invocation, validated before any computation starts."""

    command: str
    db_path: Optional[Path] = None
    n: Optional[int] = None
    seed: int = DEFAULT_SEED_BASE
    target: Optional[int] = None
    algorithm: str = HamiltonianKind.BIT_SUM.value
    initial_form: Optional[str] = None
    g: float = DEFAULT_G
    total_time: Optional[float] = None
    until: Optional[float] = None
    schedule: str = ScheduleKind.LINEAR.value
    epsilon: float = 1.0
    tol: float = DEFAULT_TOL
    fixed_steps: Optional[int] = None
    samples: int = 0
    levels: Optional[int] = None
    points: int = GRID_POINTS
    marked: Optional[int] = None
    jobs: int = DEFAULT_JOBS
    n_range: Tuple[int, int] = DEFAULT_N_RANGE
    instances: int = DEFAULT_INSTANCES
    algorithms: Tuple[str, ...] = (Algorithm.BIT_SUM.value, Algorithm.MSAS.value)
    window: Tuple[float, float] = SUCCESS_WINDOW
    T0: float = DEFAULT_T0

    def validate(self) -> "RunConfig":
        """
        Check every numeric field against the preconditions of the operations it feeds.

        Raises:
            RangeError: On an out-of-range value
            InputError: On a missing or conflicting input
        """
        if self.db_path is not None and self.n is not None:
            raise InputError("give either --db or --n, not both")
        if self.db_path is not None and not Path(self.db_path).is_file():
            raise InputError(f"database file not found: {self.db_path}")
        if self.n is not None and not 1 <= self.n <= MAX_BITS:
            raise RangeError(f"--n {self.n} outside [1, {MAX_BITS}]")
        if self.seed < 0:
            raise RangeError(f"--seed {self.seed} must be non-negative")
        if not self.g > 0:
            raise RangeError(f"--g {self.g} must be positive")
        if self.total_time is not None and not self.total_time > 0:
            raise RangeError(f"--T {self.total_time} must be positive")
        if self.until is not None and not 0 < self.until <= 1:
            raise RangeError(f"--until {self.until} must lie in (0, 1]")
        if self.until is not None and self.fixed_steps is not None:
            raise InputError("--until and --fixed-steps cannot be combined")
        if not self.epsilon > 0:
            raise RangeError(f"--epsilon {self.epsilon} must be positive")
        if not self.tol > 0:
            raise RangeError(f"--tol {self.tol} must be positive")
        if self.fixed_steps is not None and self.fixed_steps < 1:
            raise RangeError(f"--fixed-steps {self.fixed_steps} must be positive")
        if self.samples < 0:
            raise RangeError(f"--samples {self.samples} must be non-negative")
        if self.points < 2:
            raise RangeError(f"--points {self.points} must be at least 2")
        if self.jobs < 1:
            raise RangeError(f"--jobs {self.jobs} must be positive")
        low_n, high_n = self.n_range
        if not 1 <= low_n <= high_n <= MAX_BITS:
            raise RangeError(f"--n range {low_n}..{high_n} outside [1, {MAX_BITS}]")
        if self.instances < 1:
            raise RangeError(f"--instances {self.instances} must be positive")
        low, high = self.window
        if not 0 < low < high < 1:
            raise RangeError(f"--window {low},{high} must satisfy 0 < low < high < 1")
        if not self.T0 > 0:
            raise RangeError(f"--T0 {self.T0} must be positive")
        return self


def reports_errors(command):
    """Turn package errors into a red message and the mapped exit code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            code = command(*args, **kwargs)
        except AdiasearchError as e:
            console.print(f"[red]Error: {e}[/red]")
            ctx.exit(int(e.exit_code))
        else:
            if code:
                ctx.exit(int(code))

    return wrapper


def resolve_seed(seed: Optional[int]) -> int:
    """--seed, else $ADIASEARCH_SEED, else the built-in default."""
    return env_default(SEED_ENV, DEFAULT_SEED_BASE) if seed is None else seed


def resolve_jobs(jobs: Optional[int]) -> int:
    return env_default(JOBS_ENV, DEFAULT_JOBS) if jobs is None else jobs


def parse_n_range(text: str) -> Tuple[int, int]:
    """Parse "A..B" (inclusive) or a single "A"."""
    try:
        if ".." in text:
            low, high = text.split("..", 1)
            return int(low), int(high)
        return int(text), int(text)
    except ValueError:
        raise InputError(f"--n expects A..B or a single integer, got {text!r}") from None


def parse_window(text: str) -> Tuple[float, float]:
    try:
        low, high = (float(part) for part in text.split(","))
    except ValueError:
        raise InputError(f"--window expects LO,HI, got {text!r}") from None
    return low, high


def parse_algorithms(text: str) -> Tuple[str, ...]:
    names = tuple(part.strip().lower() for part in text.split(",") if part.strip())
    valid = {a.value for a in Algorithm}
    unknown = [name for name in names if name not in valid]
    if unknown or not names:
        raise InputError(f"--algorithms must list {sorted(valid)}, got {text!r}")
    return tuple(dict.fromkeys(names))


def resolve_database(config: RunConfig) -> Database:
    """Database from --db, a random one from --n/--seed, or the bundled 3-bit example."""
    if config.n is not None:
        return random_database(config.n, config.seed)
    return load_database(config.db_path or EXAMPLE_DATABASE)


def resolve_target(config: RunConfig, db: Database) -> SearchTarget:
    if config.target is not None:
        return SearchTarget.from_value(config.target, db.n)
    if config.n is not None:
        target = random_target(db.n, config.seed)
        console.print(f"[dim]random target {target.t}[/dim]")
        return target
    raise InputError("--target is required with a database file")


def default_initial_form(config: RunConfig) -> InitialForm:
    if config.initial_form is not None:
        return InitialForm(config.initial_form)
    if config.algorithm == HamiltonianKind.MSAS.value:
        return InitialForm.UNIFORM_PROJECTOR
    return InitialForm.TRANSVERSE_FIELD


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="adiasearch")
@click.option("-v", "--verbose", is_flag=True, help="Log debug messages.")
def cli(verbose: bool):
    """Adiabatic search of an unsorted database."""
    configure_logging(verbose)


def database_options(command):
    command = click.option(
        "--seed", type=int, default=None, help="Seed (default $ADIASEARCH_SEED or 20090101)."
    )(command)
    command = click.option("--n", "n", type=int, default=None, help="Random database of n bits.")(command)
    command = click.option(
        "--db", "db_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
        help="Database JSON file (default: bundled 3-bit example).",
    )(command)
    return command


@cli.command()
@database_options
@click.option("--target", type=int, default=None, help="Target value t.")
@click.option(
    "--algorithm",
    type=click.Choice([k.value for k in HamiltonianKind]),
    default=HamiltonianKind.BIT_SUM.value,
    show_default=True,
)
@click.option("--initial-form", type=click.Choice([f.value for f in InitialForm]), default=None)
@click.option("--g", type=float, default=DEFAULT_G, show_default=True, help="Transverse field strength.")
@click.option("--T", "total_time", type=float, default=None, help="Total evolution time.")
@click.option("--until", type=float, default=None, help="Double T until the success probability reaches P.")
@click.option(
    "--schedule",
    type=click.Choice([k.value for k in ScheduleKind]),
    default=ScheduleKind.LINEAR.value,
    show_default=True,
)
@click.option("--epsilon", type=float, default=1.0, show_default=True, help="Gap-adaptive rate constant.")
@click.option("--tol", type=float, default=DEFAULT_TOL, show_default=True)
@click.option("--fixed-steps", type=int, default=None, help="Uniform RK4 steps instead of adaptive.")
@click.option("--samples", type=int, default=0, help="Trajectory samples.")
@click.option("--trajectory", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--plot-data", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@reports_errors
def search(
    db_path, n, seed, target, algorithm, initial_form, g, total_time, until,
    schedule, epsilon, tol, fixed_steps, samples, trajectory, plot_data, out,
):
    """Evolve from the ground state of H_i and report the found index."""
    config = RunConfig(
        "search", db_path, n, resolve_seed(seed), target,
        algorithm, initial_form, g, total_time, until, schedule, epsilon, tol,
        fixed_steps, samples,
    ).validate()
    if (trajectory or plot_data) and not config.samples:
        config = replace(config, samples=DEFAULT_SAMPLES)
    db = resolve_database(config)
    goal = resolve_target(config, db)
    h = search_hamiltonian(db, goal, config.algorithm, config.g, default_initial_form(config))

    if config.until is not None:
        template = build_schedule(replace(config, total_time=config.total_time or DEFAULT_T0), h)
        found = find_time_for_probability(
            h, config.until, template.total_time, config.tol, schedule=template
        )
        schedule_obj = template.with_total_time(found.total_time)
        result = found if not config.samples else evolve(h, schedule_obj, config.tol, config.samples)
    else:
        schedule_obj = build_schedule(config, h)
        result = evolve(h, schedule_obj, config.tol, config.samples, config.fixed_steps)

    summary = result_summary(result, goal.t, db.n)
    summary["algorithm"] = config.algorithm
    summary["schedule"] = schedule_obj.kind.value
    write_json(summary, out)
    if trajectory:
        write_csv(trajectory_frame(result), trajectory)
    if plot_data:
        write_csv(occupation_plot_data(result), plot_data)
    render_search(summary)
    if result.best_match:
        console.print(
            f"[yellow]target {goal.t} is absent; best match at index {result.solution_index}[/yellow]"
        )
        return ExitCode.BEST_MATCH
    return ExitCode.SUCCESS


def build_schedule(config: RunConfig, h: SearchHamiltonian) -> Schedule:
    if config.schedule == ScheduleKind.GAP_ADAPTIVE.value:
        profile = gap_profile(h, default_grid(config.points))
        return make_gap_adaptive_schedule(profile, config.epsilon, config.total_time)
    if config.total_time is None:
        raise InputError("--T or --until is required with a linear schedule")
    return Schedule.linear(config.total_time)


@cli.command()
@database_options
@click.option("--target", type=int, default=None, help="Target value t.")
@click.option(
    "--algorithm",
    type=click.Choice([k.value for k in HamiltonianKind]),
    default=HamiltonianKind.BIT_SUM.value,
    show_default=True,
)
@click.option("--initial-form", type=click.Choice([f.value for f in InitialForm]), default=None)
@click.option("--g", type=float, default=DEFAULT_G, show_default=True)
@click.option("--marked", type=int, default=None, help="Marked index for --algorithm msas.")
@click.option("--levels", type=int, default=None, help=f"Levels to compute (default {PLOT_LEVELS}).")
@click.option("--points", type=int, default=GRID_POINTS, show_default=True, help="Uniform s grid points.")
@click.option("--jobs", type=int, default=None, help="Worker threads (default $ADIASEARCH_JOBS or 1).")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--gap-out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--plot-data", type=click.Path(dir_okay=False, path_type=Path), default=None)
@reports_errors
def spectrum(
    db_path, n, seed, target, algorithm, initial_form, g, marked, levels, points,
    jobs, out, gap_out, plot_data,
):
    """Lowest levels of H(s) over s in [0, 1] and the minimum gap."""
    config = RunConfig(
        "spectrum", db_path, n, resolve_seed(seed), target,
        algorithm, initial_form, g, levels=levels, points=points, marked=marked,
        jobs=resolve_jobs(jobs),
    ).validate()
    if config.algorithm == HamiltonianKind.MSAS.value and config.marked is not None:
        width = config.n if config.n is not None else resolve_database(config).n
        h = msas_hamiltonian(width, config.marked, default_initial_form(config), config.g)
    else:
        db = resolve_database(config)
        h = search_hamiltonian(
            db, resolve_target(config, db), config.algorithm, config.g,
            default_initial_form(config),
        )

    k = config.levels if config.levels is not None else min(PLOT_LEVELS, h.dimension)
    if k < 2:
        console.print(f"[yellow]--levels {k} leaves no gap; computing 2 levels[/yellow]")
        k = 2
    profile = instantaneous_spectrum(h, default_grid(config.points), k, jobs=config.jobs)
    write_csv(spectrum_frame(profile), out)
    summary = gap_summary(profile)
    if gap_out:
        write_json(summary, gap_out)
    if plot_data:
        write_csv(level_plot_data(profile), plot_data)
    if profile.min_gap is not None and profile.min_gap < DEGENERACY_GAP:
        console.print(f"[yellow]ground state degenerate near s={profile.s_star:.6g}[/yellow]")
    render_gap(summary)
    return ExitCode.SUCCESS


@cli.command()
@click.option("--n", "n_text", default=f"{DEFAULT_N_RANGE[0]}..{DEFAULT_N_RANGE[1]}", show_default=True,
              help="Bit widths A..B.")
@click.option("--instances", type=int, default=DEFAULT_INSTANCES, show_default=True, help="Instances per n.")
@click.option("--algorithms", default="bitsum,msas", show_default=True)
@click.option("--seed", type=int, default=None, help="Experiment seed (default $ADIASEARCH_SEED or 20090101).")
@click.option("--window", "window_text", default=f"{SUCCESS_WINDOW[0]},{SUCCESS_WINDOW[1]}", show_default=True)
@click.option("--T0", "T0", type=float, default=DEFAULT_T0, show_default=True, help="First time tried.")
@click.option("--tol", type=float, default=SCALING_TOL, show_default=True)
@click.option("--g", type=float, default=DEFAULT_G, show_default=True)
@click.option("--jobs", type=int, default=None, help="Worker threads (default $ADIASEARCH_JOBS or 1).")
@click.option(
    "--msas-initial-form",
    type=click.Choice([f.value for f in InitialForm]),
    default=InitialForm.UNIFORM_PROJECTOR.value,
    show_default=True,
)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--fit-out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@reports_errors
def scaling(n_text, instances, algorithms, seed, window_text, T0, tol, g, jobs, msas_initial_form, out, fit_out):
    """Time to reach the success window against bit width, and the fitted exponent."""
    config = RunConfig(
        "scaling",
        seed=resolve_seed(seed),
        g=g,
        tol=tol,
        jobs=resolve_jobs(jobs),
        n_range=parse_n_range(n_text),
        instances=instances,
        algorithms=parse_algorithms(algorithms),
        window=parse_window(window_text),
        T0=T0,
    ).validate()
    n_values = range(config.n_range[0], config.n_range[1] + 1)
    total = sum(min(config.instances, 1 << n) for n in n_values) * len(config.algorithms)

    with CsvStream(RECORD_COLUMNS, out) as stream, Progress(
        TextColumn("[cyan]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    ) as progress:
        task = progress.add_task("scaling sweep", total=total)

        def on_record(record):
            stream.append(records_frame([record]))
            progress.advance(task)
            logger.debug(
                "%s n=%d #%d T*=%.6g (%s)",
                record.algorithm, record.n, record.instance, record.T_star, record.status,
            )

        records = run_scaling_experiment(
            n_values,
            config.instances,
            [Algorithm(a) for a in config.algorithms],
            config.seed,
            jobs=config.jobs,
            on_record=on_record,
            window=config.window,
            T0=config.T0,
            tol=config.tol,
            g=config.g,
            msas_form=InitialForm(msas_initial_form),
        )
    if out is not None:
        # Rows arrive in completion order; the final file is sorted.
        write_csv(records_frame(records), out)

    fits: List[dict] = []
    code = ExitCode.SUCCESS
    for algorithm in config.algorithms:
        try:
            fits.append(fit_summary(fit_alpha(records, algorithm)))
        except InsufficientDataError as e:
            console.print(f"[red]Error: {e}[/red]")
            code = ExitCode.INSUFFICIENT_DATA
    if fit_out:
        write_json(fits, fit_out)
    render_fits(fits, failed=sum(1 for r in records if not r.ok))
    return code


@cli.command()
@click.option("--n", "n", type=int, required=True, help="Bit width.")
@click.option("--mc", type=float, default=None, help="Hamming cutoff m_c (default 2).")
@click.option("--ec", type=float, default=None, help="Energy cutoff E_c (default ceil(n/4)).")
@click.option("--delta", type=float, default=None, help="Derive cutoffs from delta, s* and epsilon_0.")
@click.option("--s-star", type=float, default=0.5, show_default=True)
@click.option("--epsilon0", type=float, default=0.1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@reports_errors
def perturbative(n, mc, ec, delta, s_star, epsilon0, out):
    """Estimate |S+|, |S-| and the exponent alpha from binomial degeneracies."""
    if not 1 <= n <= MAX_BITS:
        raise RangeError(f"--n {n} outside [1, {MAX_BITS}]")
    if delta is not None:
        if mc is not None or ec is not None:
            raise InputError("--delta derives the cutoffs; drop --mc and --ec")
        params = PerturbativeParams.from_raw(delta, s_star, epsilon0)
    else:
        defaults = PerturbativeParams.defaults(n)
        params = PerturbativeParams(
            m_c=defaults.m_c if mc is None else mc,
            E_c=defaults.E_c if ec is None else ec,
        )
    summary = perturbative_summary(perturbative_cardinalities(n, params))
    write_json(summary, out)
    render_perturbative(summary)
    return ExitCode.SUCCESS


def main():
    try:
        code = cli.main(standalone_mode=False)
    except (KeyboardInterrupt, click.exceptions.Abort):
        console.print("\n[yellow]Interrupted by user.[/yellow]")
        sys.exit(130)
    except click.ClickException as e:
        e.show()
        sys.exit(ExitCode.INPUT)
    except Exception as e:
        console.print(f"\n[red]Fatal error: {e}[/red]")
        sys.exit(1)
    sys.exit(int(code or 0))


if __name__ == "__main__":
    main()
