"""splatforge: pixel-aligned 3D Gaussian scene pipeline and asset tooling."""

__version__ = "0.1.0"
