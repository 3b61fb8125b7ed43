"""Builds the pybind11 extension through the project's CMake tree."""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.extension import Extension


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        out_dir = Path(self.get_ext_fullpath(ext.name)).resolve().parent
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        import pybind11

        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DSPECDEC_BUILD_TESTS=OFF",
                "-DSPECDEC_BUILD_CLI=OFF",
                f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "specdec_python"],
            check=True,
        )

        out_dir.mkdir(parents=True, exist_ok=True)
        for built in (build_dir / "python" / "specdec").glob("_core*"):
            shutil.copy2(built, out_dir / built.name)


setup(
    ext_modules=[CMakeExtension("specdec._core")],
    cmdclass={"build_ext": CMakeBuild},
)
