"""Flat-spin recovery toolkit: 6-DOF simulator, shaped-reward environment and PPO."""

__version__ = "0.1.0"
