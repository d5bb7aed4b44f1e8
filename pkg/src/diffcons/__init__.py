"""Diffusion-limit analysis of continuous-time average consensus."""

__version__ = "0.1.0"
