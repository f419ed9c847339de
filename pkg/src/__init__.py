"""Dephasing dynamics of the V_B electron spin in monolayer hBN."""

__version__ = "0.1.0"
