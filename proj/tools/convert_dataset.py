#!/usr/bin/env python3
"""Convert a downloaded DRIVE/STARE/CHASE_DB1 tree to PNG in place.

Rewrites every .tif/.gif/.ppm/.ppm.gz/.ah/.vk file under ROOT as a sibling
.png with the same stem. Originals are left alone unless --remove is given.
"""
import argparse
import gzip
import io
import pathlib
import sys

from PIL import Image

SUFFIXES = (".tif", ".tiff", ".gif", ".ppm.gz", ".ah.ppm", ".vk.ppm")


def target(path: pathlib.Path) -> pathlib.Path:
    name = path.name
    for suffix in (".ppm.gz", ".tiff", ".tif", ".gif", ".ppm"):
        if name.lower().endswith(suffix):
            return path.with_name(name[: -len(suffix)] + ".png")
    raise ValueError(name)


def convert(path: pathlib.Path) -> pathlib.Path:
    data = path.read_bytes()
    if path.name.lower().endswith(".gz"):
        data = gzip.decompress(data)
    img = Image.open(io.BytesIO(data))
    img = img.convert("L" if len(img.getbands()) == 1 else "RGB")
    out = target(path)
    img.save(out)
    return out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("root", type=pathlib.Path)
    ap.add_argument("--remove", action="store_true", help="delete originals after converting")
    args = ap.parse_args()
    count = 0
    for path in sorted(args.root.rglob("*")):
        if not path.is_file() or not path.name.lower().endswith(SUFFIXES):
            continue
        out = convert(path)
        count += 1
        print(f"{path} -> {out.name}")
        if args.remove:
            path.unlink()
    print(f"{count} file(s) converted", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
