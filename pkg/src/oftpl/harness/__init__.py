"""Experiment configuration, execution, reporting and CLI."""
