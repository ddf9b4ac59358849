from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "gridconf._core",
        ["src/gridconf/_core.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
