"""Build script: compiles the optional native kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so any failure to cythonize or compile degrades to a pure
build instead of aborting the install. Set CASESCOPE_PURE=1 to skip the
extension entirely.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("CASESCOPE_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/casescope/_kernels/_native.pyx"],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # noqa: BLE001 - degrade to pure install
        print(f"casescope: skipping native kernels ({exc})")
        ext_modules = []

setup(ext_modules=ext_modules)
