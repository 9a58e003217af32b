"""Build script: compiles the optional Monte Carlo kernel.

The compiled extension is an accelerator only.  If Cython or a C compiler
is unavailable the build falls back to the pure numpy kernel selected at
import time (see src/mvhedge/jumpdiff/backend.py).
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing entirely
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(f"warning: compiled kernel not built ({exc}); "
              "falling back to the pure numpy kernel")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        optional_build_ext._skip(exc)
        return []
    ext = Extension(
        "mvhedge.jumpdiff._kernel",
        ["src/mvhedge/jumpdiff/_kernel.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
