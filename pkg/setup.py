"""Build script for the compiled sampling/reachability kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile should not make the install unusable:
build with ``pip install -e . --no-build-isolation`` and check
``percoweave.backend.BACKEND_NAME`` to see which core was loaded.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "percoweave._fastcore",
        ["src/percoweave/_fastcore.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
