"""Build hook for the optional compiled kernels.

The package is fully functional without the extension: heurevo.kernels
falls back to the pure-Python implementation at import time. Keeping the
extension optional means a missing compiler degrades performance, not
installability.

The compile flags are deliberately conservative. No -ffast-math and no
-march=native: the compiled kernels must produce bit-identical results to
the pure-Python backend, which rules out FMA contraction and reassociation.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Swallow compiler failures so a source install still succeeds."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - exercised only without a toolchain
            print(f"warning: skipping compiled kernels ({exc}); using pure-Python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover
            print(f"warning: failed to build {ext.name} ({exc}); using pure-Python backend")


def extensions():
    if os.environ.get("HEUREVO_NO_EXT") == "1":
        return []
    try:
        from Cython.Build import cythonize
        import numpy
    except ImportError:  # pragma: no cover
        return []
    ext = Extension(
        "heurevo.kernels._speedups",
        sources=["src/heurevo/kernels/_speedups.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
