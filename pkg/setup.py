"""Build the optional compiled orbit kernel.

The package is fully functional without it (a numpy fallback is selected at
import time); any build failure therefore degrades to a pure install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("frobforms._kernels._orbit_cy",
                   ["src/frobforms/_kernels/_orbit_cy.pyx"],
                   extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )
except Exception:
    pass

setup(ext_modules=ext_modules)
