"""CMake-backed build for the _svare extension module.

The extension is compiled by the project's CMake build (which also builds the
static core library) and the resulting shared object is copied into the svare
package directory.
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DSVARE_BUILD_PYTHON=ON",
                "-DSVARE_BUILD_TESTS=OFF",
                "-DSVARE_BUILD_CLI=OFF",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_svare", "-j"],
            check=True,
        )

        built = sorted(build_dir.glob("_svare*.so"))
        if not built:
            raise RuntimeError(f"no _svare extension produced under {build_dir}")
        dest = Path(self.get_ext_fullpath(ext.name)).resolve()
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built[-1], dest)


setup(
    ext_modules=[CMakeExtension("svare._svare")],
    cmdclass={"build_ext": CMakeBuild},
)
