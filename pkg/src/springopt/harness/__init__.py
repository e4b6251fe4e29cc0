"""Benchmark harness: file formats, experiment runner, plots, and the CLI."""
