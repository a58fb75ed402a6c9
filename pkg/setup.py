"""Build script; only needed to compile the optional fast kernels.

Set KICKCTL_NO_EXT=1 to skip the extension entirely; the package then
runs on the pure-numpy kernel fallback.
"""
import os

from setuptools import Extension, setup

if os.environ.get("KICKCTL_NO_EXT"):
    ext_modules = []
else:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "kickctl._kernels._ckernels",
                ["src/kickctl/_kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
