"""
Command-line entry points: gof, fit, simulate, estimate-k, snr, nmf-check and tuning-sweep.

Data goes to stdout (or --output); logs and diagnostics go to stderr.
Exit codes: 0 ok, 1 usage or configuration error, 2 fit failure.
"""
import asyncio
import json
import sys
from pathlib import Path
from typing import Annotated, NoReturn

import polars as pl
import typer
from loguru import logger
from pydantic import ValidationError

from netgof.core.context import new_run_id
from netgof.core.enums import ModelTag, OutputFormat, VhMethod
from netgof.core.exceptions import ExperimentError, NetGofError
from netgof.core.logging_config import setup_logging
from netgof.schemas.config import CliConfig, GofConfig, VertexHuntingConfig
from netgof.schemas.reports import GofReport
from netgof.schemas.simulation import SimConfig
from netgof.services.fitters import fit_model
from netgof.services.gof import estimate_k, gof_all, nmf_feasibility, snr, tuning_sweep
from netgof.services.graph import Network, giant_component, load_edge_list
from netgof.services.sim import PRESET_NAMES, ExperimentRunner, experiment_preset
from netgof.services.utils.io import read_dense_matrix


EXIT_USAGE = 1
EXIT_FIT = 2

app = typer.Typer(
    name="netgof",
    help="Goodness-of-fit tests for SBM, DCBM, MMSBM and DCMM network models.",
    no_args_is_help=True,
    add_completion=False,
)


InputOpt = Annotated[Path, typer.Option("--input", "-i", help="Edge list file", exists=True, dir_okay=False)]
KOpt = Annotated[int | None, typer.Option("--k", help="Number of communities")]
AlphaOpt = Annotated[float, typer.Option("--alpha", help="Test level")]
VhOpt = Annotated[VhMethod, typer.Option("--vh", case_sensitive=False, help="Vertex hunting method")]
NeighborsOpt = Annotated[int | None, typer.Option("--n-neighbors", help="KNN-SP N; auto-tuned when unset")]
KnnAlphaOpt = Annotated[float | None, typer.Option("--knn-alpha", help="KNN-SP alpha; auto-tuned when unset")]
RegularizeOpt = Annotated[bool, typer.Option("--regularize/--no-regularize", help="Apply regularization steps")]
SeedOpt = Annotated[int, typer.Option("--seed", help="Seed for every random choice")]
OutputOpt = Annotated[Path | None, typer.Option("--output", "-o", help="Write here instead of stdout")]
FormatOpt = Annotated[OutputFormat, typer.Option("--format", case_sensitive=False)]
GiantOpt = Annotated[bool, typer.Option("--giant-component", help="Restrict to the giant component first")]


@app.callback()
def main() -> None:
    setup_logging(sink=sys.stderr)
    run_id = new_run_id()
    logger.debug("CLI run {}", run_id)


def _fail(code: int, message: str) -> NoReturn:
    typer.echo(f"error: {message}", err=True)
    raise typer.Exit(code=code)


def _cli_config(**fields) -> CliConfig:
    try:
        return CliConfig(**fields)
    except ValidationError as exc:
        _fail(EXIT_USAGE, "; ".join(err["msg"] for err in exc.errors()))


def _vh_config(vh: VhMethod, n_neighbors: int | None, knn_alpha: float | None) -> VertexHuntingConfig:
    try:
        return VertexHuntingConfig(method=vh, n_neighbors=n_neighbors, alpha=knn_alpha)
    except ValidationError as exc:
        _fail(EXIT_USAGE, "; ".join(f"{err['loc'][0]}: {err['msg']}" for err in exc.errors()))


def _load_network(path: Path, giant: bool) -> Network:
    try:
        net = load_edge_list(path)
    except NetGofError as exc:
        _fail(EXIT_USAGE, str(exc))
    if giant:
        net, kept = giant_component(net)
        logger.info("Giant component keeps {} nodes", len(kept))
    return net


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        typer.echo(text, nl=not text.endswith("\n"))
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text if text.endswith("\n") else text + "\n")
    logger.info("Wrote {}", output)


def gof_frame(report: GofReport) -> pl.DataFrame:
    rows = [
        {
            "model": entry.model.value,
            "k": entry.k,
            "t_n": entry.t_n,
            "u_n3": entry.u_n3,
            "c_n3": entry.c_n3,
            "decision": entry.decision,
            "fit_class": entry.fit_class.value if entry.fit_class else None,
            "flags": ";".join(entry.flags),
            "error": entry.error,
        }
        for entry in report.models
    ]
    return pl.DataFrame(
        rows,
        schema={
            "model": pl.String, "k": pl.Int64, "t_n": pl.Float64, "u_n3": pl.Float64, "c_n3": pl.Int64,
            "decision": pl.Boolean, "fit_class": pl.String, "flags": pl.String, "error": pl.String,
        },
    )


@app.command("gof")
def cmd_gof(
        input_path: InputOpt,
        k: KOpt = None,
        alpha: AlphaOpt = 0.05,
        vh: VhOpt = VhMethod.KNNSP,
        n_neighbors: NeighborsOpt = None,
        knn_alpha: KnnAlphaOpt = None,
        regularize: RegularizeOpt = True,
        seed: SeedOpt = 0,
        output: OutputOpt = None,
        output_format: FormatOpt = OutputFormat.CSV,
        giant: GiantOpt = False,
) -> None:
    """T_n for all four models with K communities."""
    cfg = _cli_config(
        subcommand="gof", input_path=input_path, k=k, alpha=alpha,
        vh=_vh_config(vh, n_neighbors, knn_alpha), regularize=regularize, seed=seed,
        output=output, output_format=output_format,
    )
    net = _load_network(input_path, giant)

    try:
        report = gof_all(net, cfg.k, cfg.gof_config())
    except NetGofError as exc:
        _fail(EXIT_FIT, str(exc))

    if output_format == OutputFormat.JSON:
        _emit(report.model_dump_json(indent=2), output)
    else:
        _emit(gof_frame(report).write_csv(), output)

    failed = [entry.model.value for entry in report.models if entry.error is not None]
    if failed:
        _fail(EXIT_FIT, f"fit failed for {', '.join(failed)}")


@app.command("fit")
def cmd_fit(
        input_path: InputOpt,
        model: Annotated[ModelTag, typer.Option("--model", case_sensitive=False)],
        k: KOpt = None,
        vh: VhOpt = VhMethod.KNNSP,
        n_neighbors: NeighborsOpt = None,
        knn_alpha: KnnAlphaOpt = None,
        regularize: RegularizeOpt = True,
        seed: SeedOpt = 0,
        output: OutputOpt = None,
        giant: GiantOpt = False,
) -> None:
    """Fit one model and write its (θ, Π, P) report as JSON."""
    cfg = _cli_config(
        subcommand="fit", input_path=input_path, k=k, model=model,
        vh=_vh_config(vh, n_neighbors, knn_alpha), regularize=regularize, seed=seed,
        output=output, output_format=OutputFormat.JSON,
    )
    net = _load_network(input_path, giant)

    try:
        fit = fit_model(net, cfg.model, cfg.k, cfg.gof_config())
    except NetGofError as exc:
        _fail(EXIT_FIT, str(exc))
    _emit(fit.to_report().model_dump_json(indent=2), output)


def _load_sim_config(path: Path) -> SimConfig:
    try:
        return SimConfig.model_validate_json(path.read_text())
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}" for err in exc.errors()
        )
        _fail(EXIT_USAGE, f"{path}: {problems}")


@app.command("simulate")
def cmd_simulate(
        output_dir: Annotated[Path, typer.Option("--output-dir", help="Directory for replicates/histograms/summary")],
        config_path: Annotated[Path | None, typer.Option("--config", exists=True, dir_okay=False)] = None,
        preset: Annotated[str | None, typer.Option("--preset", help=f"One of {', '.join(PRESET_NAMES)}")] = None,
        n: Annotated[int | None, typer.Option("--n", help="Preset network size")] = None,
        replicates: Annotated[int | None, typer.Option("--replicates")] = None,
        b: Annotated[float | None, typer.Option("--b", help="Preset off-diagonal of P")] = None,
        assume: Annotated[list[ModelTag] | None, typer.Option("--assume", case_sensitive=False)] = None,
        assumed_k: Annotated[int | None, typer.Option("--assumed-k")] = None,
        alpha: AlphaOpt = 0.05,
        threads: Annotated[int, typer.Option("--threads", min=1)] = 1,
        seed: Annotated[int | None, typer.Option("--seed")] = None,
) -> None:
    """Monte-Carlo experiment from a JSON config file or a named preset."""
    if (config_path is None) == (preset is None):
        _fail(EXIT_USAGE, "give exactly one of --config or --preset")

    if preset is not None:
        overrides = {
            key: value for key, value in {"n": n, "replicates": replicates, "seed": seed}.items() if value is not None
        }
        try:
            sim_config, preset_assumed, preset_k = experiment_preset(preset, b=b, **overrides)
        except (ExperimentError, ValidationError) as exc:
            _fail(EXIT_USAGE, str(exc))
    else:
        sim_config = _load_sim_config(config_path)
        updates = {key: value for key, value in {"replicates": replicates, "seed": seed}.items() if value is not None}
        if updates:
            try:
                sim_config = SimConfig.model_validate(sim_config.model_dump() | updates)
            except ValidationError as exc:
                _fail(EXIT_USAGE, str(exc))
        preset_assumed, preset_k = [sim_config.model], None

    runner_assumed = assume or preset_assumed
    try:
        runner = ExperimentRunner(
            sim_config, runner_assumed, alpha=alpha, assumed_k=assumed_k or preset_k,
            threads=threads, output_dir=output_dir,
        )
        result = asyncio.run(runner.run())
    except NetGofError as exc:
        _fail(EXIT_USAGE, str(exc))

    summary = {model.value: entry.model_dump() for model, entry in result.summaries.items()}
    typer.echo(json.dumps(summary, indent=2))


@app.command("estimate-k")
def cmd_estimate_k(
        input_path: InputOpt,
        k_max: Annotated[int, typer.Option("--k-max", "--kmax", min=1)],
        alpha: AlphaOpt = 0.05,
        regularize: RegularizeOpt = True,
        seed: SeedOpt = 0,
        giant: GiantOpt = False,
) -> None:
    """Smallest K whose DCBM fit is accepted; prints k_max + 1 when none is."""
    cfg = _cli_config(subcommand="estimate-k", input_path=input_path, alpha=alpha, regularize=regularize, seed=seed)
    net = _load_network(input_path, giant)
    try:
        estimate = estimate_k(net, k_max, cfg.alpha, cfg.gof_config())
    except NetGofError as exc:
        _fail(EXIT_FIT, str(exc))
    typer.echo(str(estimate.k))


def _load_omega(path: Path):
    try:
        return read_dense_matrix(path)
    except NetGofError as exc:
        _fail(EXIT_USAGE, str(exc))


@app.command("snr")
def cmd_snr(
        omega_path: Annotated[Path, typer.Option("--omega", exists=True, dir_okay=False, help="Dense Ω CSV")],
        assume: Annotated[ModelTag, typer.Option("--assume", case_sensitive=False)],
        k: KOpt = None,
        m: Annotated[int, typer.Option("--m", min=3)] = 3,
        seed: SeedOpt = 0,
) -> None:
    """Signal-to-noise ratio of an assumed model against a known Ω."""
    cfg = _cli_config(subcommand="snr", input_path=omega_path, k=k, model=assume, seed=seed)
    omega = _load_omega(omega_path)
    try:
        result = snr(omega, cfg.model, cfg.k, m=m, seed=cfg.seed)
    except ValueError as exc:
        _fail(EXIT_USAGE, str(exc))
    except NetGofError as exc:
        _fail(EXIT_FIT, str(exc))
    typer.echo(result.model_dump_json(indent=2))


@app.command("nmf-check")
def cmd_nmf_check(
        omega_path: Annotated[Path, typer.Option("--omega", exists=True, dir_okay=False, help="Dense Ω CSV")],
        k: KOpt = None,
) -> None:
    """Sufficient condition for a nonnegative DCMM factorization of Ω."""
    cfg = _cli_config(subcommand="nmf-check", input_path=omega_path, k=k)
    omega = _load_omega(omega_path)
    try:
        result = nmf_feasibility(omega, cfg.k)
    except ValueError as exc:
        _fail(EXIT_USAGE, str(exc))
    except NetGofError as exc:
        _fail(EXIT_FIT, str(exc))
    typer.echo(result.model_dump_json(indent=2))


@app.command("tuning-sweep")
def cmd_tuning_sweep(
        input_path: InputOpt,
        k: KOpt = None,
        n_values: Annotated[list[int] | None, typer.Option("--n-neighbors", help="Repeat for several N")] = None,
        alpha_values: Annotated[list[float] | None, typer.Option("--knn-alpha", help="Repeat for several alpha")] = None,
        regularize: RegularizeOpt = True,
        output: OutputOpt = None,
        giant: GiantOpt = False,
) -> None:
    """T_n(DCMM) over a grid of KNN-SP tuning parameters, as CSV."""
    cfg = _cli_config(subcommand="tuning-sweep", input_path=input_path, k=k, regularize=regularize)
    net = _load_network(input_path, giant)
    try:
        frame = tuning_sweep(
            net, cfg.k,
            n_values=n_values or range(4, 23),
            alpha_values=alpha_values or (5.0, 10.0, 15.0, 20.0),
            config=GofConfig(regularize=cfg.regularize),
        )
    except NetGofError as exc:
        _fail(EXIT_FIT, str(exc))
    _emit(frame.write_csv(), output)


if __name__ == "__main__":
    app()
