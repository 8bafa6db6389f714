"""Symbolic vector calculus in general curvilinear coordinates."""
from .symkernel import *  # noqa: F401,F403
from .symkernel import __all__ as _kernel_all

__version__ = "0.1.0"
__all__ = list(_kernel_all)
