"""Chiral continuous-time quantum walks on composable chain graphs."""

__version__ = "0.1.0"
