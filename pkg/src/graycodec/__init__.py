"""Qubit encodings of tridiagonal Hamiltonians with VQE and Trotter simulation tooling."""

from __future__ import annotations

__version__ = "0.1.0"
