"""depminer: mine intra-project dependencies from source code."""

__version__ = "0.1.0"
