"""chemostat-qsd - simulation and verification toolkit for the stochastic chemostat."""

__version__ = "0.1.0"
