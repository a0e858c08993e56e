import os

import numpy
from setuptools import Extension, setup

# The compiled kernels are an optional speedup; the package runs on the
# numpy fallback when they are absent (see gfo._backend).
# GFO_PORTABLE=1 drops -march=native for builds meant to run elsewhere
if os.environ.get("GFO_PORTABLE"):
    _arch_flags = ["-O3"]
else:
    _arch_flags = ["-O3", "-march=native"]

try:
    if not os.path.exists("src/gfo/_kernels.pyx"):
        raise ImportError
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gfo._kernels",
                ["src/gfo/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=_arch_flags,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
