import sys

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    # -ffp-contract=off: the compiled kernels must round exactly like the
    # pure-Python fallback (no FMA contraction), or backend outputs diverge.
    ext_modules = cythonize(
        [
            Extension(
                "escapesim._core",
                ["src/escapesim/_core.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
else:
    print("Cython not available; building without the compiled core "
          "(pure-Python backend will be used)", file=sys.stderr)

setup(ext_modules=ext_modules)
