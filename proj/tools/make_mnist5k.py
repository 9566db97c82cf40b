#!/usr/bin/env python3
"""Write the 5,000-sample MNIST subset shipped with mlxtend as IDX files.

usage: make_mnist5k.py <mnist_5k.csv.gz> <out_dir>

Each CSV row holds 784 pixel bytes followed by the label. The source is
sorted by label, so rows are shuffled with a fixed seed before writing.
"""
import gzip
import random
import struct
import sys
from pathlib import Path


def main() -> None:
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    rows = []
    with gzip.open(src, "rt") as fh:
        for line in fh:
            fields = [int(float(v)) for v in line.strip().split(",")]
            if len(fields) != 785:
                raise SystemExit(f"unexpected row width {len(fields)}")
            rows.append(fields)
    random.Random(5000).shuffle(rows)
    pixels, labels = bytearray(), bytearray()
    for fields in rows:
        pixels.extend(fields[:784])
        labels.append(fields[784])
    n = len(labels)
    out.mkdir(parents=True, exist_ok=True)
    (out / "mnist5k-images-idx3-ubyte").write_bytes(
        struct.pack(">IIII", 0x00000803, n, 28, 28) + bytes(pixels))
    (out / "mnist5k-labels-idx1-ubyte").write_bytes(
        struct.pack(">II", 0x00000801, n) + bytes(labels))
    print(f"wrote {n} samples to {out}")


if __name__ == "__main__":
    main()
