from setuptools import Extension, setup

# The compiled scan kernels are an optional speedup: if Cython or a C
# compiler is missing, the build still succeeds and the package falls
# back to the pure-Python kernels at import time.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "edgecache.kernels._distkernels",
                ["src/edgecache/kernels/_distkernels.pyx"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
