"""Hot-kernel backend selection.

The heavy inner loops (CART split scans, batched tree traversal, the
second-order IIR recurrences inside the decomposition solver) exist twice:
as a compiled Cython extension and as a numpy/scipy fallback. The compiled
module is preferred when importable; set ``DERMALAB_BACKEND=python`` or
``DERMALAB_BACKEND=compiled`` to force a choice (the latter raises if the
extension was not built). Both backends implement identical arithmetic so
results do not depend on which one is active.
"""

import os

_requested = os.environ.get("DERMALAB_BACKEND", "").strip().lower()

if _requested in ("", "compiled"):
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "DERMALAB_BACKEND=compiled but the extension is not built; "
                "run `python setup.py build_ext --inplace`"
            ) from None
        from . import _pykernels as _impl
        BACKEND = "python"
elif _requested == "python":
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    raise ValueError(f"unknown DERMALAB_BACKEND value: {_requested!r}")

best_split_regression = _impl.best_split_regression
best_split_classification = _impl.best_split_classification
tree_apply = _impl.tree_apply
iir2_forward = _impl.iir2_forward
iir2_backward = _impl.iir2_backward

__all__ = [
    "BACKEND",
    "best_split_regression",
    "best_split_classification",
    "tree_apply",
    "iir2_forward",
    "iir2_backward",
]
