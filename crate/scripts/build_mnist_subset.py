#!/usr/bin/env python3
"""Convert the 10 000 MNIST digits bundled in the npm `mnist` package into
gzip-compressed IDX files.

Usage:
    npm pack mnist            # produces mnist-1.1.0.tgz
    python3 scripts/build_mnist_subset.py mnist-1.1.0.tgz data/mnist-subset

The last 100 samples of every digit form a balanced 1000-image evaluation
set (t10k-*); the remaining 9000 form the training set (train-*). Both sets
are shuffled with a fixed seed so the output is byte-reproducible.
"""
import gzip
import json
import random
import struct
import sys
import tarfile
from pathlib import Path

EVAL_PER_CLASS = 100
SEED = 20211


def load_digits(tgz):
    with tarfile.open(tgz) as tar:
        for d in range(10):
            member = tar.getmember(f"package/src/digits/{d}.json")
            data = json.load(tar.extractfile(member))["data"]
            assert len(data) % 784 == 0
            # values were stored as byte/255 rounded to 3 decimals
            pix = [round(v * 255) for v in data]
            yield d, [bytes(pix[i:i + 784]) for i in range(0, len(pix), 784)]


def write_idx(path, images, labels):
    n = len(images)
    with gzip.GzipFile(path / "images.tmp", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        for img in images:
            f.write(img)
    with gzip.GzipFile(path / "labels.tmp", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, n))
        f.write(bytes(labels))


def main():
    tgz, out = sys.argv[1], Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    train, evals = [], []
    for d, imgs in load_digits(tgz):
        train += [(img, d) for img in imgs[:-EVAL_PER_CLASS]]
        evals += [(img, d) for img in imgs[-EVAL_PER_CLASS:]]
    rng = random.Random(SEED)
    rng.shuffle(train)
    rng.shuffle(evals)
    for prefix, rows in (("train", train), ("t10k", evals)):
        write_idx(out, [r[0] for r in rows], [r[1] for r in rows])
        (out / "images.tmp").rename(out / f"{prefix}-images-idx3-ubyte.gz")
        (out / "labels.tmp").rename(out / f"{prefix}-labels-idx1-ubyte.gz")
        print(prefix, len(rows))


if __name__ == "__main__":
    main()
