"""Builds the optional compiled kernels.

The package works without them: driftgen.kernels falls back to the numpy
implementations when the extension is missing, so a failed build is a
performance loss, not an installation failure.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing or broken
            print(f"skipping compiled kernels ({exc}); numpy fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"skipping {ext.name} ({exc}); numpy fallback will be used")


ext_modules = []
cmdclass = {}
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "driftgen.kernels._ckernels",
                ["src/driftgen/kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off: no FMA contraction, so the compiled
                # kernels stay bit-identical to the numpy fallback
                extra_compile_args=["-O3", "-march=native", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
    cmdclass["build_ext"] = OptionalBuildExt

setup(ext_modules=ext_modules, cmdclass=cmdclass)
