"""Build script: compiles the optional fast kernels.

The package is fully functional without the compiled extension (a numpy
fallback is selected at import time), so a missing compiler or Cython only
costs speed, never correctness.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "kfractal._kernels._hausdorff",
                ["src/kfractal/_kernels/_hausdorff.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
