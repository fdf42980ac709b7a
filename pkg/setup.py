import os

import numpy as np
from setuptools import Extension, setup

# SXGRAPHS_NO_EXT=1 installs the pure-Python build only.
ext_modules = []
if not os.environ.get("SXGRAPHS_NO_EXT"):
    from Cython.Build import cythonize

    ext = Extension(
        "sxgraphs._kernels",
        ["src/sxgraphs/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)
