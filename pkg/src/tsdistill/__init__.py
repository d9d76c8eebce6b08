"""Distilling periodic and multi-scale structure from a forecasting teacher
into a channel-independent MLP student."""

__version__ = "0.1.0"
