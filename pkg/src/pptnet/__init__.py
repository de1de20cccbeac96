"""Entanglement verdicts from the PPT criterion, computed two ways: a direct
partial-transpose eigensolve, and a simulated local measurement network whose
outcome statistics encode the power sums Tr[(rho^T_B)^k]."""

__version__ = "0.1.0"
