"""Builds the extension with cargo and copies it next to this file as
ssiforge.so (maturin is not required).

    python3 python/build.py [--release]
"""

import argparse
import pathlib
import shutil
import subprocess
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--release", action="store_true")
    args = parser.parse_args()

    cmd = ["cargo", "build", "-p", "ssiforge-python"]
    if args.release:
        cmd.append("--release")
    subprocess.run(cmd, cwd=ROOT, check=True)

    profile = "release" if args.release else "debug"
    suffix = {"darwin": "dylib", "win32": "dll"}.get(sys.platform, "so")
    built = ROOT / "target" / profile / f"libssiforge.{suffix}"
    if sys.platform == "win32":
        built = built.with_name("ssiforge.dll")
    target = HERE / ("ssiforge.pyd" if sys.platform == "win32" else "ssiforge.so")
    shutil.copyfile(built, target)
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
