"""PHY-layer key agreement, block-matrix image cipher and key-generation simulations."""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
