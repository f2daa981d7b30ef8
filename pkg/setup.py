"""Build script for the compiled Glauber-chain kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), so build failures here only cost speed.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gibbs_tv._chain",
                ["src/gibbs_tv/_chain.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
