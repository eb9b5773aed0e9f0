"""Exact desk-scale benchmark for parity supervision in IQP Born machines."""

__version__ = "1.1.0"
