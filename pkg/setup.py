import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernels must be bit-identical to the pure-Python reference:
# no fast-math, no FMA contraction. -ffp-contract=off is the load-bearing flag.
ext = Extension(
    "lmlab._kernels._fast",
    sources=["src/lmlab/_kernels/_fast.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O2", "-ffp-contract=off"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)
ext.optional = True  # pure-Python fallback exists; never fail the install

setup(
    ext_modules=cythonize([ext], compiler_directives={"language_level": "3"})
    if cythonize
    else [],
)
