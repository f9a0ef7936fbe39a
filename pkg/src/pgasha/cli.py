import sys

import click
import numpy as np

from . import machine, sha256
from .harness import (
    DigestMismatchError,
    extract_digest,
    hash_message,
    load_input_registers,
    pad_message,
)
from .program import ParseError, parse


@click.group()
def cli() -> None:
    """Generate and run the Boolean-register instruction sequences computing SHA-256."""


@cli.command()
@click.option("--blocks", "-n", type=int, required=True, help="Number of 512-bit message blocks.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, writable=True),
              help="Output file (default: stdout).")
@click.option("--cap", type=int, default=sha256.DEFAULT_BLOCK_CAP, show_default=True,
              help="Largest block count accepted.")
def generate(blocks: int, out_path: str | None, cap: int) -> None:
    """Emit the program for BLOCKS-block messages, one instruction per line."""
    try:
        if out_path is None:
            sha256.write_program(blocks, sys.stdout, cap)
        else:
            with open(out_path, "w", newline="\n") as fh:
                sha256.write_program(blocks, fh, cap)
    except sha256.BlockCountError as exc:
        raise click.BadParameter(str(exc), param_hint="--blocks")


def _read_bits(text: str) -> np.ndarray:
    digits = "".join(text.split())
    if set(digits) - {"0", "1"}:
        raise click.BadParameter("bits input may only contain 0, 1 and whitespace",
                                 param_hint="--input")
    return np.frombuffer(digits.encode(), dtype=np.uint8) == ord("1")


def _print_metrics(metrics: machine.RunMetrics) -> None:
    for key, value in metrics.as_dict().items():
        click.echo(f"{key}: {value}")


@cli.command()
@click.option("--program", "program_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--in-format", type=click.Choice(["raw", "bits"]), default="bits", show_default=True)
def run(program_path: str, input_path: str, in_format: str) -> None:
    """Execute a program file against the given input register contents."""
    with open(program_path, newline="") as fh:
        try:
            program = parse(fh.read())
        except ParseError as exc:
            raise click.ClickException(f"{program_path}: {exc}")
    if in_format == "bits":
        with open(input_path) as fh:
            inputs = _read_bits(fh.read())
    else:
        with open(input_path, "rb") as fh:
            try:
                inputs = load_input_registers(fh.read())
            except ValueError as exc:
                raise click.ClickException(str(exc))
    try:
        outcome = machine.execute(program, inputs)
    except machine.RegisterRangeError as exc:
        raise click.ClickException(str(exc))
    if isinstance(outcome, machine.Terminated):
        click.echo("outcome: terminated")
    elif isinstance(outcome, machine.Inaction):
        click.echo(f"outcome: inaction at position {outcome.position}")
    else:
        click.echo(f"outcome: step limit exceeded at position {outcome.position}")
    if not isinstance(outcome, machine.LimitExceeded):
        click.echo("outputs: " + "".join("1" if b else "0" for b in outcome.outputs))
        if isinstance(outcome, machine.Terminated) and len(outcome.outputs) == 256:
            click.echo(f"digest: {extract_digest(outcome).hex()}")
    _print_metrics(outcome.metrics)
    if not isinstance(outcome, machine.Terminated):
        sys.exit(1)


@cli.command("hash")
@click.option("--message", "message_path", type=click.Path(exists=True, dir_okay=False),
              help="File holding the message bytes.")
@click.option("--hex", "hex_message", help="Message given as a hex string.")
@click.option("--no-verify", is_flag=True, help="Skip the check against the reference SHA-256.")
@click.option("--stats", "show_stats", is_flag=True, help="Print program length and register usage.")
@click.option("--emit-only", type=click.Path(dir_okay=False, writable=True),
              help="Write the program for this message's block count to a file and stop.")
def hash_cmd(message_path: str | None, hex_message: str | None, no_verify: bool,
             show_stats: bool, emit_only: str | None) -> None:
    """Hash a message (default: stdin) by running the generated program."""
    if message_path and hex_message is not None:
        raise click.UsageError("give at most one of --message and --hex")
    if message_path:
        with open(message_path, "rb") as fh:
            message = fh.read()
    elif hex_message is not None:
        try:
            message = bytes.fromhex(hex_message)
        except ValueError:
            raise click.BadParameter("not a hex string", param_hint="--hex")
    else:
        message = sys.stdin.buffer.read()

    if emit_only:
        blocks = len(pad_message(message)) // 64
        with open(emit_only, "w", newline="\n") as fh:
            sha256.write_program(blocks, fh)
        return

    try:
        result = hash_message(message, verify=not no_verify)
    except DigestMismatchError as exc:
        click.echo(f"digest mismatch: {exc}", err=True)
        sys.exit(2)
    click.echo(result.hexdigest)
    if show_stats:
        click.echo(f"blocks: {result.blocks}")
        _print_metrics(result.metrics)


@cli.command()
@click.option("--blocks", "-n", type=int, required=True)
def stats(blocks: int) -> None:
    """Print the program length and register counts without generating anything."""
    if blocks < 1:
        raise click.BadParameter("must be at least 1", param_hint="--blocks")
    click.echo(f"blocks: {blocks}")
    click.echo(f"program_length: {sha256.expected_length(blocks)}")
    click.echo(f"input_registers: {sha256.INPUT_REGISTERS_PER_BLOCK * blocks}")
    click.echo(f"output_registers: {sha256.OUTPUT_REGISTERS}")
    click.echo(f"aux_registers: {sha256.AUX_REGISTERS}")


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
