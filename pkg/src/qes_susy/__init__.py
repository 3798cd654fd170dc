"""Sextic quasi-exactly-solvable oscillator: algebraic sector, SUSY partners and numerics."""

__version__ = "0.1.0"
