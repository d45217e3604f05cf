"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a numpy/scipy fallback is selected
at import time), so a failed compile only costs speed, never functionality.
Build in place with:  python setup.py build_ext --inplace
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Never fail the install over a missing compiler or Cython."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernels skipped ({exc}); "
                  "falling back to the pure-Python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: could not build {ext.name} ({exc}); "
                  "falling back to the pure-Python backend")


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "dermalab._native._kernels",
        sources=["src/dermalab/_native/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
