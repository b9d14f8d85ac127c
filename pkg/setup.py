"""Build script for the optional compiled kernels.

The package works without the extension: ``propertime.kernels`` falls back to
the numpy implementation when ``propertime._kernels`` cannot be imported.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build without Cython
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "propertime._kernels",
                ["src/propertime/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
