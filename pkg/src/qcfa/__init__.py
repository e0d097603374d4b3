"""Simulator and language toolkit for constant-space two-way quantum-classical automata."""

__version__ = "0.1.0"
