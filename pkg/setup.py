"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-Python kernel backend is
selected at import time), so a missing compiler or Cython only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("apfree.kernels._native", ["src/apfree/kernels/_native.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
