"""Build hook for the optional compiled kernel.

The package is pure Python; ``nmpsim.kernels._native`` is a Cython
accelerator for the probe-sampling loop. If Cython or a C compiler is
missing the build proceeds without it and the pure backend is used.
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
                "nmpsim.kernels._native",
                ["src/nmpsim/kernels/_native.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
