"""Annealed greedy/reluctant dynamics for Sherrington-Kirkpatrick ground states."""

__version__ = "0.1.0"
