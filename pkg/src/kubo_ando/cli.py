"""Command-line entry point: ``kubo-ando <command> [options]``."""
import logging
import sys

import click

from .errors import InputError, PreconditionError
from .experiments import ExperimentConfig, run

_common = [
    click.option("--mean", default="geometric", show_default=True, help="Catalog selector, e.g. power:0.5 or mix:0.5:arithmetic:harmonic."),
    click.option("--n", "n", type=int, default=3, show_default=True, help="Matrix dimension for generated inputs."),
    click.option("--trials", type=int, default=1, show_default=True),
    click.option("--master-seed", type=int, default=0, envvar="KA_MASTER_SEED", show_default=True),
    click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Write the artifact here instead of stdout."),
]


def common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


def _emit(cfg: ExperimentConfig):
    try:
        status, text, messages = run(cfg)
    except (InputError, PreconditionError) as exc:
        raise click.UsageError(str(exc)) from None
    for line in messages:
        click.echo(line, err=True)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    sys.exit(status)


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose):
    """Numerical checks for Kubo-Ando means and the order they determine."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)


@main.command("eval")
@common
@click.option("--A", "a_path", type=click.Path(exists=True, dir_okay=False), help="Matrix JSON for A.")
@click.option("--B", "b_path", type=click.Path(exists=True, dir_okay=False), help="Matrix JSON for B.")
@click.option("--measure", "measure_path", type=click.Path(exists=True, dir_okay=False), help="Evaluate through this measure JSON instead of the function.")
def eval_cmd(**kw):
    """Evaluate A sigma B."""
    _emit(ExperimentConfig("eval", **kw))


@main.command("check-order")
@common
@click.option("--kind", type=click.Choice(["mixed", "ordered", "unordered", "congruent-diagonal"]), default="mixed", show_default=True)
@click.option("--samples", type=int, default=1000, show_default=True, help="Random functions of B - A per trial.")
@click.option("--timings", is_flag=True, help="Include per-trial timing (breaks byte-identical output).")
def check_order(**kw):
    """Run both sides of the order-determination equivalence on seeded pairs."""
    _emit(ExperimentConfig("check-order", **kw))


@main.command("witness")
@common
@click.option("--A", "a_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--B", "b_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", type=click.Choice(["mixed", "ordered", "unordered", "congruent-diagonal"]), default="mixed")
def witness(**kw):
    """Search for X = sP + s delta I with ||A sigma X|| > ||B sigma X||."""
    _emit(ExperimentConfig("witness", **kw))


@main.command("scan-prop3")
@common
@click.option("--tol-limit", type=float, default=1e-6, show_default=True)
def scan_prop3(**kw):
    """CSV scan of ||X_s + sP|| - s towards ||PXP||."""
    _emit(ExperimentConfig("scan-prop3", **kw))


@main.command("scan-e1")
@common
@click.option("--delta", type=float, default=None, help="Fix delta instead of drawing it per trial.")
@click.option("--tol-limit", type=float, default=1e-6, show_default=True)
def scan_e1(**kw):
    """CSV scan of ||A sigma (sP + s delta I)|| - beta s (1 + delta)."""
    if kw["mean"] == "geometric":
        kw["mean"] = "mix:0.5:arithmetic:harmonic"
    _emit(ExperimentConfig("scan-e1", **kw))


@main.command("selftest")
@click.option("--master-seed", type=int, default=0, envvar="KA_MASTER_SEED", show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
def selftest(**kw):
    """Run the full acceptance suite and print one line per criterion."""
    _emit(ExperimentConfig("selftest", **kw))


if __name__ == "__main__":
    main()
