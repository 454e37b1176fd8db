"""Kernel backend selection: compiled extension if importable, numpy otherwise.

Set HBSELECT_PURE_PYTHON=1 to force the numpy fallback (used by the
benchmark and the backend-parity tests).
"""

from __future__ import annotations

import os

if os.environ.get("HBSELECT_PURE_PYTHON") == "1":
    from ._core_py import BACKEND, RANK_TOL, CholState, subset_rss
else:
    try:
        from ._core import BACKEND, RANK_TOL, CholState, subset_rss
    except ImportError:
        from ._core_py import BACKEND, RANK_TOL, CholState, subset_rss

__all__ = ["BACKEND", "RANK_TOL", "CholState", "subset_rss"]
