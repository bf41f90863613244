"""Two-mode three-level quantum Rabi model: exact diagonalization, eta -> infinity
closed forms and finite-size scaling."""

__version__ = "0.1.0"
