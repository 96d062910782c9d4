"""Convert the 5,000-digit MNIST sample shipped inside the mlxtend wheel to IDX files.

Usage:
    pip download --no-deps -d /tmp/wheels mlxtend
    python3 scripts/mnist5k_to_idx.py /tmp/wheels/mlxtend-*.whl data/mnist5k

Writes images-idx3-ubyte.gz and labels-idx1-ubyte.gz (500 digits per class,
original class-sorted order; pixel values 0..255).
"""
import gzip
import struct
import sys
import zipfile
from pathlib import Path


def main(wheel: str, out_dir: str) -> None:
    raw = zipfile.ZipFile(wheel).read("mlxtend/data/data/mnist_5k.csv.gz")
    rows = [line.split(",") for line in gzip.decompress(raw).decode().strip().split("\n")]
    pixels = bytearray()
    labels = bytearray()
    for row in rows:
        values = [int(float(v)) for v in row]
        pixels.extend(values[:-1])
        labels.append(values[-1])
    n = len(rows)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    # mtime=0 keeps the archives byte-stable across regenerations
    with open(out / "images-idx3-ubyte.gz", "wb") as f, gzip.GzipFile(fileobj=f, mode="wb", mtime=0) as g:
        g.write(struct.pack(">IIII", 0x00000803, n, 28, 28) + bytes(pixels))
    with open(out / "labels-idx1-ubyte.gz", "wb") as f, gzip.GzipFile(fileobj=f, mode="wb", mtime=0) as g:
        g.write(struct.pack(">II", 0x00000801, n) + bytes(labels))


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
