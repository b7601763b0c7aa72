"""Build script: compiles the optional Cython kernels.

The package is fully functional without the compiled extension (a NumPy
fallback is selected at import time), so any failure to build the extension
degrades to a pure-Python install instead of aborting.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "ballopt._kernels._core",
                ["src/ballopt/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    import sys

    print(f"ballopt: skipping Cython kernels ({exc}); using NumPy fallback",
          file=sys.stderr)

setup(ext_modules=ext_modules)
