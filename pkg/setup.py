"""Build script: compiles the optional Cython path-extraction kernel.

The package works without the extension (a pure-Python fallback is selected
at import time), so a failed compile only costs speed.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "structgen._pathkernel",
                ["src/structgen/_pathkernel.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    import sys

    print(f"warning: building without Cython kernel ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
