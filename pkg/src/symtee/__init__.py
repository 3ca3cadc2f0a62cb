"""Detect missing input-length validation in TEE trusted applications.

The pipeline slices suspicious memory copies out of C sources, wraps each
slice in a mock-environment harness with symbolic attacker inputs, and
confirms the bug by symbolic execution that yields a concrete witness.
"""

__version__ = "0.1.0"
