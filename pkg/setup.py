import os

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    # The extension is an accelerator; psmr falls back to numpy without it.
    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"warning: psmr._kernels not built ({exc}); using the python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: psmr._kernels not built ({exc}); using the python backend")


ext_modules = []
if not os.environ.get("PSMR_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "psmr._kernels",
                    ["src/psmr/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
