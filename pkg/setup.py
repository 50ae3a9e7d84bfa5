import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("MRMETER_NO_EXT"):
    speedups = Extension(
        "mrmeter._speedups",
        ["src/mrmeter/_speedups.pyx"],
        optional=True,
    )
    ext_modules = cythonize([speedups], language_level="3")

setup(ext_modules=ext_modules)
