"""Kernel backend selection.

Two interchangeable implementations of the order-pinned numeric kernels: a
Cython extension (built at install time, optional) and a pure-Python
reference. They are bit-identical; the compiled one is just faster. Selection
happens once at import:

* ``LMLAB_KERNELS=python``   force the pure-Python reference
* ``LMLAB_KERNELS=compiled`` require the extension (ImportError if missing)
* unset                      compiled if available, else pure Python
"""

import os

_choice = os.environ.get("LMLAB_KERNELS", "").strip().lower()

if _choice == "python":
    from . import pyref as _impl

    BACKEND = "python"
elif _choice == "compiled":
    from . import _fast as _impl  # type: ignore[no-redef]

    BACKEND = "compiled"
elif _choice == "":
    try:
        from . import _fast as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import pyref as _impl

        BACKEND = "python"
else:
    raise RuntimeError(
        f"LMLAB_KERNELS must be 'python' or 'compiled', got {_choice!r}"
    )

reduce_seq = _impl.reduce_seq
reduce_pairwise = _impl.reduce_pairwise
reduce_chunked = _impl.reduce_chunked
dot_seq = _impl.dot_seq
matmul_seq = _impl.matmul_seq
pair_stats = _impl.pair_stats
any_abs_dot_above = _impl.any_abs_dot_above


def get_backend() -> str:
    """Name of the kernel backend selected at import ('compiled' or 'python')."""
    return BACKEND
