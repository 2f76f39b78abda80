import os
import subprocess
import sys

import numpy as np
import pytest

from affine_lab import kernels
from affine_lab.expr import parse_expr
from affine_lab.jets import eval_series


def test_python_backend_always_present():
    assert "python" in kernels.BACKENDS
    assert kernels.BACKEND in kernels.BACKENDS
    assert kernels.eval_tape is kernels.BACKENDS[kernels.BACKEND]


def test_forced_fallback():
    env = dict(os.environ, AFFINE_LAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from affine_lab import kernels; "
                          "print(kernels.BACKEND, sorted(kernels.BACKENDS))"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split()[0] == "python"
    assert "cython" not in out.stdout


@pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="compiled backend not built")
@pytest.mark.parametrize("text", ["cos(z) - (3/5)*i*sin(z) + (1/5)*i*sin(3*z)",
                                  "exp(z)/(z - 3) + cosh(z)^2", "z^(-2) + sinh(2*z)"])
def test_backends_agree_on_grid(text):
    e = parse_expr(text)
    z = (np.linspace(-1, 1, 7)[:, None] + 1j * np.linspace(0.2, 1, 5)[None, :]).ravel()
    a = eval_series(e, z, 4, backend="python")
    b = eval_series(e, z, 4, backend="cython")
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
