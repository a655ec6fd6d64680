import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# DAQSIM_PORTABLE_BUILD=1 drops -march=native for binaries that move between machines
flags = ["-O3"]
if not os.environ.get("DAQSIM_PORTABLE_BUILD"):
    flags.append("-march=native")

extensions = [
    Extension(
        "daqsim._kernels",
        ["src/daqsim/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=flags,
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
