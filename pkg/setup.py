"""Build script: compiles the optional kernel extension when Cython is available.

The package works without the extension; minpos._backend falls back to the
pure numpy kernels at import time.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "minpos._kernels",
                ["src/minpos/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError as exc:  # pragma: no cover - exercised only on stripped installs
    warnings.warn(
        f"building without compiled kernels ({exc}); "
        "the pure-python backend will be used at runtime"
    )

setup(ext_modules=ext_modules)
