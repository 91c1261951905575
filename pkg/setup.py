import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError


class OptionalBuildExt(build_ext):
    """Build the accelerator extension, but never fail the install over it.

    The package is fully functional on the pure Python backend; the compiled
    kernels are an optimization picked up at import time when present.
    """

    def run(self):
        try:
            super().run()
        except (PlatformError, FileNotFoundError):
            self._skip()

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except (CCompilerError, ExecError, PlatformError, ValueError):
            self._skip()

    def _skip(self):
        print("warning: compiled kernels could not be built; "
              "the pure Python backend will be used")


ext_modules = []
if not os.environ.get("PPPKIT_PURE"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available; skipping compiled kernels")
    else:
        # -ffp-contract=off: the compiled and pure backends must produce
        # bit-identical doubles, so FMA contraction is disabled.
        flags = ["-O2", "-ffp-contract=off"] if os.name == "posix" else []
        ext_modules = cythonize(
            [Extension(
                "pppkit._kernels._core",
                ["src/pppkit/_kernels/_core.pyx"],
                extra_compile_args=flags,
            )],
            language_level="3",
        )

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
