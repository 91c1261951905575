"""Kernel backend selection.

The compiled extension is preferred when importable; the pure Python
backend is the fallback.  Both expose the same functions with identical,
bit-for-bit output.  Set ``PPPKIT_BACKEND=fallback`` to force the pure
backend, or ``PPPKIT_BACKEND=compiled`` to require the extension.
"""

import os

_requested = os.environ.get("PPPKIT_BACKEND", "auto").strip().lower()

if _requested in ("auto", "", "compiled"):
    try:
        from pppkit._kernels import _core as impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "PPPKIT_BACKEND=compiled but the extension is not built")
        from pppkit._kernels import _fallback as impl
        BACKEND = "fallback"
elif _requested in ("fallback", "python", "pure"):
    from pppkit._kernels import _fallback as impl
    BACKEND = "fallback"
else:
    raise ValueError(f"unrecognized PPPKIT_BACKEND value: {_requested!r}")

philox4 = impl.philox4
fill_unit = impl.fill_unit
contains_many = impl.contains_many
rejection_fill = impl.rejection_fill
mc_hits = impl.mc_hits
