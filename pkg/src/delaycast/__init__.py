"""delaycast: flight-delay classification toolkit.

From-scratch FCNN, random forest, second-order boosted trees, the hybrid
FCNN-to-tree pipeline, the BTS ingestion pipeline, and binary metrics.
"""
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
