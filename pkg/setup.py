"""Build script for the compiled geodesic kernels.

The package works without the extension (a numpy fallback is selected at
import time), so a missing compiler only costs speed.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "pucci_lab.manifolds._revol_kernels",
                ["src/pucci_lab/manifolds/_revol_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
