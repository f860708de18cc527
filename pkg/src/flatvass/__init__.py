"""Reachability, flattening and certificates for two-dimensional VASS."""
__version__ = "0.1.0"
