"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so any build failure here is non-fatal by design: build with
``pip install -e . --no-build-isolation`` and check
``dopplertrack.kernels.BACKEND`` to see which implementation is active.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/dopplertrack/kernels/_core.pyx",
        compiler_directives={"language_level": "3"},
    )
    include_dirs = [numpy.get_include()]
    for ext in ext_modules:
        ext.include_dirs = include_dirs
except ImportError:
    pass

setup(ext_modules=ext_modules)
