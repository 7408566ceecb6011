"""Build script for the optional compiled matching kernel.

The package works without the extension (a pure-Python kernel is selected at
import time); set NUTRIBENCH_SKIP_NATIVE=1 to install without compiling.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "nutribench._native._jaccard",
        ["src/nutribench/_native/_jaccard.pyx"],
        extra_compile_args=["-O3"],
    )
]

if cythonize is not None and os.environ.get("NUTRIBENCH_SKIP_NATIVE") != "1":
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})
else:
    ext_modules = []

setup(ext_modules=ext_modules)
