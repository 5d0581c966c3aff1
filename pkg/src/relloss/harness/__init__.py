"""Experiment harness: generators, CSV I/O, sweeps, plots and the CLI."""
