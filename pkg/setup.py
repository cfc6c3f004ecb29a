"""Build script: compiles the optional fast-kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed, never functionality.
Run `python setup.py build_ext --inplace` to rebuild in a source checkout.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/telekin/_core/_kernels.pyx"],
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - depends on toolchain
    sys.stderr.write(f"telekin: compiled kernels disabled ({exc}); "
                     "falling back to pure-python kernels\n")

setup(ext_modules=ext_modules)
