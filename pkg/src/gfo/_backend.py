"""Kernel backend selection.

The compiled extension (gfo._kernels, Cython) is preferred when built;
otherwise the numpy fallback (gfo._py_kernels) is used. GFO_BACKEND=c or
GFO_BACKEND=python forces the choice; forcing c without a built extension
is an import error.

Results are deterministic within a backend. Across backends the math is
identical but summation order differs, so agreement is at rounding level,
not bitwise.
"""

import os

_env = os.environ.get("GFO_BACKEND", "").strip().lower()

if _env in ("", "c", "cython"):
    try:
        from . import _kernels as _impl
        BACKEND = "c"
    except ImportError:
        if _env:
            raise ImportError(
                "GFO_BACKEND=%s requested but the compiled gfo._kernels "
                "extension is not built" % _env
            )
        from . import _py_kernels as _impl
        BACKEND = "python"
elif _env in ("py", "python", "numpy"):
    from . import _py_kernels as _impl
    BACKEND = "python"
else:
    raise ImportError(
        "unrecognized GFO_BACKEND=%r; use 'c' or 'python'" % _env
    )

jacobi_eigvals = _impl.jacobi_eigvals
facet_scan = _impl.facet_scan
collocation_pass = _impl.collocation_pass


def available_backends():
    """Importable kernel modules keyed by backend name."""
    out = {}
    try:
        from . import _kernels
        out["c"] = _kernels
    except ImportError:
        pass
    from . import _py_kernels
    out["python"] = _py_kernels
    return out
