"""Set-valued multipliers via processes for constrained vector optimization."""

__version__ = "0.1.0"
