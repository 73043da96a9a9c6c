"""Numerical verification of the Cauchy-Riemann equations, Cauchy's theorem,
Green's formula, the divergence theorem and the classical potential-flow
equations over user-supplied expressions."""

__version__ = "0.1.0"
