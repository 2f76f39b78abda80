"""Backend selection for the tape evaluator.

The compiled extension is used when it was built; setting
``AFFINE_LAB_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _kernels_py

_force_pure = os.environ.get("AFFINE_LAB_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_pure:
        raise ImportError("pure python requested")
    from ._kernels import eval_tape as _compiled_eval_tape
except ImportError:
    _compiled_eval_tape = None

BACKENDS = {"python": _kernels_py.eval_tape}
if _compiled_eval_tape is not None:
    BACKENDS["cython"] = _compiled_eval_tape

BACKEND = "cython" if _compiled_eval_tape is not None else "python"
eval_tape = BACKENDS[BACKEND]
