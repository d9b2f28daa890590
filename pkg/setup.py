"""Build script.  The Cython jet kernel is optional: without Cython (or a C
compiler) the package installs pure-Python and selects the fallback evaluator
at import time."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/nullgeo/expr/_core.pyx"],
        language_level="3",
        compiler_directives={"boundscheck": False, "wraparound": False},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
