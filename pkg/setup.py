"""Builds the optional Cython QP kernel; the package falls back to numpy without it."""

import os

from setuptools import setup


def extensions():
    if os.environ.get("FOOTSTEP_MPCC_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "footstep_mpcc.qp._qp_ext",
        ["src/footstep_mpcc/qp/_qp_ext.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=extensions())
