"""Secrecy analysis of link selection in a buffer-aided two-hop relay network."""

__version__ = "0.1.0"
