"""Build hook for the optional compiled polynomial kernels.

The package works without a C compiler or Cython; ``backend`` falls back to
the pure-Python kernels when the extension is missing.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "fieldcalc.symkernel._kernels",
                ["src/fieldcalc/symkernel/_kernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )

setup(ext_modules=ext_modules)
