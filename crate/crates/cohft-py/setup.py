"""Build the cohft extension module by delegating to cargo.

The crate is a cdylib; we compile it in release mode and copy the
shared object to wherever setuptools wants the extension. No Rust build
backend is required, only a cargo on PATH.
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

CRATE_DIR = Path(__file__).resolve().parent


def _dylib_name() -> str:
    if sys.platform == "darwin":
        return "libcohft.dylib"
    if sys.platform.startswith("win"):
        return "cohft.dll"
    return "libcohft.so"


class CargoExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CargoBuildExt(build_ext):
    def build_extension(self, ext: CargoExtension) -> None:
        subprocess.check_call(
            ["cargo", "build", "--release", "-p", "cohft-py"], cwd=CRATE_DIR
        )
        # target/ sits at the workspace root, two levels up from the crate
        built = CRATE_DIR.parent.parent / "target" / "release" / _dylib_name()
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, dest)


setup(
    ext_modules=[CargoExtension("cohft")],
    cmdclass={"build_ext": CargoBuildExt},
)
