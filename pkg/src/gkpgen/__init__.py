"""Fock-space cat/GKP state generation pipeline with RHG surface-code evaluation."""

__version__ = "0.1.0"
