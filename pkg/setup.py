from setuptools import setup, Extension

# The compiled GA kernel is optional: testrank.kernels falls back to the
# pure-numpy implementation when the extension is absent.
ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np

    ext_modules = cythonize(
        [
            Extension(
                "testrank.kernels._ga",
                ["src/testrank/kernels/_ga.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
