"""Kernel selection: compiled extension when available, NumPy fallback otherwise.

Set GLHS_PURE_PYTHON=1 to force the fallback (used by the test suite and
the benchmark). Both implementations produce bit-identical output.
"""
import os

if os.environ.get("GLHS_PURE_PYTHON"):
    from ._fallback import legendre_table, pce_eval
    IMPLEMENTATION = "python"
else:
    try:
        from ._legendre import legendre_table, pce_eval
        IMPLEMENTATION = "compiled"
    except ImportError:
        from ._fallback import legendre_table, pce_eval
        IMPLEMENTATION = "python"

__all__ = ["legendre_table", "pce_eval", "IMPLEMENTATION"]
