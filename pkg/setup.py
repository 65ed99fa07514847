"""Build the optional compiled Earley kernel.

The chart engine in src/gramdec/engine/_impl.py is plain Python and also
valid Cython (pure-python mode). We compile a copy of it under the name
gramdec.engine._impl_cy so that both the interpreted and the compiled
variants are importable side by side; gramdec.engine picks the compiled
one at import time when it exists. If Cython or a C compiler is missing
the build falls back to a pure-Python install.
"""

import shutil
from pathlib import Path

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    src = Path("src") / "gramdec" / "engine" / "_impl.py"
    dst = src.with_name("_impl_cy.py")
    shutil.copyfile(src, dst)
    ext_modules = cythonize(
        [dst.as_posix()],
        language_level=3,
        compiler_directives={"boundscheck": False, "wraparound": False},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"gramdec: skipping compiled kernel ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
