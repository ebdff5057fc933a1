import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("WITTDEGEN_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("wittdegen._kernels_c", ["src/wittdegen/_kernels_c.pyx"],
                       extra_compile_args=["-O2"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
