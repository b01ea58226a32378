"""Command line entry points: serve the model endpoints, annotate a corpus."""

from __future__ import annotations

import logging

import click

from .annotate import annotate_directory
from .engines import DEFAULT_ENCODER, DEFAULT_NLI_MODEL
from .service import ProviderConfig, create_app


@click.group()
def main():
    """Model provider service and corpus annotation tools."""


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8080, type=int)
@click.option("--engine", default="deterministic",
              type=click.Choice(["deterministic", "transformers", "replay"]))
@click.option("--encoder", default=DEFAULT_ENCODER, show_default=True)
@click.option("--nli-model", default=DEFAULT_NLI_MODEL, show_default=True)
@click.option("--record-path", default=None,
              help="Record responses here (or replay from here).")
def serve(host, port, engine, encoder, nli_model, record_path):
    """Run the /embed and /nli HTTP service."""
    import uvicorn

    app = create_app(ProviderConfig(engine=engine, encoder_name=encoder,
                                    nli_name=nli_model,
                                    record_path=record_path))
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("output", type=click.Path(dir_okay=False))
def annotate(input_dir, output):
    """Annotate raw sentences plus task spans into corpus JSONL."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    written, skipped = annotate_directory(input_dir, output)
    click.echo(f"annotate: {written} records written, {skipped} skipped")
