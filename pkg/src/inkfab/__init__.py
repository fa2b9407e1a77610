"""Deterministic simulator for printed nanoscale circuits.

Pipeline stages: deposit components stochastically, observe them with a
bounded-error vision model, assign a logical netlist onto the observed
field, route printed wires on a uniform grid, and compute fabrication
metrics (print time, delay, yield, footprint, layout fingerprints).
"""

__version__ = "0.1.0"
