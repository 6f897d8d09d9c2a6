"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure numpy/Python fallback is
selected at import time); set SKYLANE_SKIP_EXT=1 to skip compilation
explicitly.  -ffp-contract=off keeps the compiled floating-point sequences
identical to the fallback so both backends produce bit-equal results.
"""

import os

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("SKYLANE_SKIP_EXT") == "1":
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "skylane._corekern",
        ["src/skylane/_corekern.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )


setup(ext_modules=_extensions())
