"""Hierarchical reactive modules: task graphs, adapters and assume-guarantee checking."""

__version__ = "0.1.0"
