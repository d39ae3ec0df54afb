import numpy
from setuptools import Extension, setup

# The compiled kernels are optional: the package falls back to the pure
# numpy implementations in sonsketch._kernels._pure when the extension is
# absent (see benchmarks/bench_kernels.py for the speed difference).
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "sonsketch._kernels._compiled",
                ["src/sonsketch/_kernels/_compiled.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
