"""Pauli's so(4) treatment of hydrogen: exact operator identities, shell
representations, first-order field shifts and classical orbit checks."""

__version__ = "0.1.0"
