"""Simulation, verification and cost analysis of a resource-state quantum RAM."""

from __future__ import annotations

__version__ = "0.1.0"
