"""Semi-automatic annotation toolkit for multi-target multi-camera vehicle tracking."""

__version__ = "0.1.0"
