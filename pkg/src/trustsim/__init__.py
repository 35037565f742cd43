"""Deterministic AV scenario simulator, hazard-indexed HUD policies, and a
skin-conductance analysis toolkit with the full inference protocol."""

from ._kernels import BACKEND

__all__ = ["BACKEND", "__version__"]
__version__ = "0.1.0"
