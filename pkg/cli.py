"""
Command-line front end. Scalars come in as flags, structured inputs (maps,
controls, whole experiments) as JSON files or corpus labels.
"""
from typing import Optional

import click
from dotenv import load_dotenv
from pydantic import ValidationError

from core.errors import ConfigError
from core.logging import configure_logging
from models.summability import SummabilityCriterion
from models.trace import TheoremVariant
from schemas.experiment import ExperimentConfig, RunOutcome
from services import export
from services.runner import load_config, run

EXIT_CONFIG = 2


def _finish(outcome: RunOutcome, text: Optional[str] = None) -> None:
    click.echo(text if text is not None else export.dumps(outcome.report).decode())
    if outcome.message:
        click.echo(outcome.message, err=True)
    raise click.exceptions.Exit(outcome.exit_code)


def _execute(**fields) -> None:
    fields = {k: v for k, v in fields.items() if v is not None}
    try:
        config = ExperimentConfig(**fields)
    except ValidationError as exc:
        click.echo(f"invalid arguments: {exc}", err=True)
        raise click.exceptions.Exit(EXIT_CONFIG)
    _finish(run(config))


map_option = click.option("--map", "map_source", help="corpus:<label> or a map JSON file")
controls_option = click.option("--controls", "controls_source", help="corpus:<label> or a controls JSON file")
output_option = click.option("--output", type=click.Path(file_okay=False), help="directory for report files")
seed_option = click.option("--seed", type=int, default=0, show_default=True)


@click.group()
@click.option("--log-level", default=None, help="overrides CONTRACTUM_LOG_LEVEL")
def cli(log_level: Optional[str]) -> None:
    load_dotenv()
    configure_logging(log_level)


@cli.command("check-map")
@map_option
@controls_option
@click.option("--sample-step", type=float)
@click.option("--pairs", type=int, default=0, help="random pairs for the Hausdorff check")
@seed_option
@output_option
def check_map(map_source, controls_source, sample_step, pairs, seed, output):
    """(alpha,beta)-contraction check, plus the Hausdorff check when k is known."""
    _execute(command="check-map", map_source=map_source, controls_source=controls_source,
             sample_step=sample_step, pairs=pairs, seed=seed, output=output)


@cli.command("iterate")
@map_option
@controls_option
@click.option("--x0", type=float)
@click.option("--starts", type=int, default=0, help="additional seeded random starts")
@click.option("--eps-fp", type=float)
@click.option("--max-steps", type=int)
@seed_option
@output_option
def iterate_command(map_source, controls_source, x0, starts, eps_fp, max_steps, seed, output):
    _execute(command="iterate", map_source=map_source, controls_source=controls_source, x0=x0, starts=starts,
             eps_fp=eps_fp, max_steps=max_steps, seed=seed, output=output)


@cli.command("verify-theorem")
@click.option("--mode", type=click.Choice([v.value for v in TheoremVariant]), default="T14", show_default=True)
@map_option
@controls_option
@click.option("--C", "C", type=float)
@click.option("--p", "p", type=float)
@click.option("--neighborhood", type=float)
@click.option("--reich-experiment", is_flag=True, help="also iterate from seeded starts with beta checked for (R) and (MT)")
@click.option("--starts", type=int, default=0, help="starts for --reich-experiment (default 10)")
@seed_option
@output_option
def verify_theorem(mode, map_source, controls_source, C, p, neighborhood, reich_experiment, starts, seed, output):
    _execute(command="verify-theorem", mode=mode, map_source=map_source, controls_source=controls_source,
             C=C, p=p, neighborhood=neighborhood, reich_experiment=reich_experiment, starts=starts, seed=seed, output=output)


@cli.command("summability")
@click.option("--C", "C", type=float, required=True)
@click.option("--p", "p", type=float, required=True)
@click.option("--t0", type=float, required=True)
@click.option("--N", "N", type=int, default=10_000, show_default=True)
@click.option("--criterion", type=click.Choice([c.value for c in SummabilityCriterion]), default="tail_ratio")
@output_option
def summability(C, p, t0, N, criterion, output):
    """Power-rate bound check and summability verdict; CSV goes to --output."""
    _execute(command="summability", C=C, p=p, t0=t0, N=N, criterion=criterion, output=output)


@cli.command("example-ciric")
@output_option
def example_ciric(output):
    """Recompute the three claims about the three-branch example."""
    outcome = run(ExperimentConfig(command="example-ciric", output=output))
    _finish(outcome, text=outcome.report.get("text", ""))


@cli.command("run")
@click.argument("config_path", type=click.Path())
def run_config(config_path):
    """Execute an ExperimentConfig JSON file."""
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        click.echo(str(exc), err=True)
        raise click.exceptions.Exit(EXIT_CONFIG)
    _finish(run(config))


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    import uvicorn

    uvicorn.run("main:app", host=host, port=port)


if __name__ == "__main__":
    cli()
