from setuptools import setup

# The compiled kernels are an optional accelerator: when Cython (or a C
# compiler) is unavailable the package installs pure-Python and
# examgrid.gesture.kernels falls back at import time.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/examgrid/gesture/_kernels.pyx"],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
