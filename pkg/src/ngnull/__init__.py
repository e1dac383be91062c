"""Non-Gaussian nullifier toolkit for continuous-variable cluster states."""

__version__ = "0.1.0"

from .errors import NullifierError  # noqa: E402

__all__ = ["NullifierError", "__version__"]
