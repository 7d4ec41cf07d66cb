"""Build script for the optional compiled split-search kernel.

The package is pure Python except for one Cython extension accelerating
the decision-tree split scan. The build is best-effort: if no compiler
or Cython is available the extension is skipped and the package falls
back to the numpy implementation at import time.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build extensions, degrading to a warning on any toolchain failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any build failure is non-fatal
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: compiled split kernel not built ({exc}); "
            "falling back to the pure implementation",
            file=sys.stderr,
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "mimicry.classifier._split",
        sources=["src/mimicry/classifier/_split.pyx"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
