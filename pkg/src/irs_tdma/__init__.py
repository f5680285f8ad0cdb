"""Block-static IRS scheduling for an IRS-assisted TDMA downlink."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
