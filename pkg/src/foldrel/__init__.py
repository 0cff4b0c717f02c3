"""Exact mod-2 computations around Stiefel-Whitney relations and singular-map obstructions."""

__version__ = "0.1.0"
