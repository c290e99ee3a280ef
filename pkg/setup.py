"""Build script for the optional compiled core.

The package works without the extension (a numpy fallback is selected at
import time); building it speeds up the Monte Carlo walks and the binned
accumulation by roughly an order of magnitude.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "ohlcbridge._speed._fast",
        ["src/ohlcbridge/_speed/_fast.pyx"],
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
