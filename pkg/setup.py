"""Build script for the optional compiled kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile only costs speed, not correctness.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "chaoswalk.kernels._speedups",
                ["src/chaoswalk/kernels/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                # The classical-map kernels must agree bitwise with the
                # pure-Python fallback, so every operation must round
                # exactly where Python rounds: no -ffast-math, no FMA
                # contraction, and no sin+cos -> sincos fusion (glibc's
                # sincos is not bit-identical to separate calls).
                extra_compile_args=[
                    "-O3",
                    "-ffp-contract=off",
                    "-fno-builtin-sin",
                    "-fno-builtin-cos",
                    "-fno-builtin-sincos",
                ],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
