"""Build script for the optional compiled kernel core.

The package is fully functional without the extension: ppdepth._backend
falls back to the NumPy implementation when the compiled module is
missing (see benchmarks/bench_backends.py for the speed difference).
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "ppdepth._backend._fastkernels",
                ["src/ppdepth/_backend/_fastkernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
