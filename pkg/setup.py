"""Build script: compiles the optional fast BPE kernel.

The package works without the extension (a pure-Python fallback is selected
at import time), so a failed compile only costs speed, never correctness.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/nmtprep/kernels/_speedups.pyx"],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
