import os

import numpy
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("GHZSIM_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "ghzsim.kernels._core",
                    ["src/ghzsim/kernels/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # No Cython available: the package falls back to the NumPy kernels.
        ext_modules = []

setup(ext_modules=ext_modules)
