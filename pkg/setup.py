"""Build the optional compiled jet kernel.

The package is pure Python; the Cython extension only speeds up the jet
product convolution. If Cython or a C compiler is unavailable the build
falls back to the numpy kernel without failing the install.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class _OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, keep the install alive
            print(f"skipping compiled jet kernel: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"skipping compiled jet kernel ({ext.name}): {exc}")


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "affinejet._jetcore",
                ["src/affinejet/_jetcore.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )


setup(ext_modules=_extensions(), cmdclass={"build_ext": _OptionalBuildExt})
