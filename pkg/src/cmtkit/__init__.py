"""Stopping-set-aware LDPC codes and light-node sampling for coded Merkle trees."""

__version__ = "0.1.0"
