"""Kernel, frontend, and metatheory harness for a dependent type theory
with bounded first-class universe levels."""

__version__ = "0.1.0"
