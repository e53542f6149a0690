"""Photonic topological cluster-state simulator and threshold estimator."""

__version__ = "0.1.0"
