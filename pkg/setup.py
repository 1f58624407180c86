"""Build script for the optional compiled kernels.

The package is fully functional without the extension; ``it2garch.kernels``
falls back to the pure-Python reference implementation when the compiled
module is absent.  Install with ``pip install -e . --no-build-isolation`` so
the pre-installed Cython/numpy are used.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "it2garch.kernels._speedups",
                ["src/it2garch/kernels/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # results must match the pure-Python backend bit for bit:
                # no fused multiply-add contraction
                extra_compile_args=["-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
