"""Build script: compiles the optional Cython kernel extension.

The extension is a pure speedup; if the build fails (no compiler, no
Cython) the package falls back to the numpy kernels at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HBSELECT_SKIP_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "hbselect._core",
                    ["src/hbselect/_core.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
