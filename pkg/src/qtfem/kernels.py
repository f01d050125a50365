"""Backend selection for the hot shape-function kernel.

The compiled extension is used when it was built; setting the environment
variable ``QTFEM_PURE_PYTHON=1`` before import forces the Python fallback.
"""
import os

from . import _laplace_py

if os.environ.get("QTFEM_PURE_PYTHON"):
    laplace_eval = _laplace_py.laplace_eval
    BACKEND = "python"
else:
    try:
        from ._laplace_c import laplace_eval
        BACKEND = "cython"
    except ImportError:  # extension not built
        laplace_eval = _laplace_py.laplace_eval
        BACKEND = "python"

python_laplace_eval = _laplace_py.laplace_eval
