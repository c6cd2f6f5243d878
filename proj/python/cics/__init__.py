"""Costly-information combinatorial selection toolkit."""

try:
    from ._cics import *  # noqa: F401,F403  (installed package layout)
except ImportError:  # pragma: no cover - build-tree layout
    from _cics import *  # noqa: F401,F403

__version__ = "0.1.0"
