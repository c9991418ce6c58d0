"""Gradient-only line searches for training small networks on sub-sampled losses."""

__version__ = "0.1.0"
