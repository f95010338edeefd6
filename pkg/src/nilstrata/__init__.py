"""Exact workbench for small nilpotent associative algebras."""

__version__ = "0.1.0"
