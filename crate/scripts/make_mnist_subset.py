#!/usr/bin/env python3
"""Build the bundled 10k MNIST subset as gzipped IDX files.

Source: the `mnist` npm package (MIT, 10,000 MNIST digits stored as JSON
arrays of pixel intensities in [0, 1] rounded to three decimals).

    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/make_mnist_subset.py package/src/digits data/mnist-subset

Digits are shuffled with a fixed seed and split 8000 train / 2000 test.
"""
import gzip
import json
import os
import struct
import sys

import numpy as np


def write_idx(path, magic, dims, payload):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">I", magic))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(payload.tobytes())


def main(src, dst, n_train=8000, seed=20230706):
    images, labels = [], []
    for digit in range(10):
        with open(os.path.join(src, f"{digit}.json")) as f:
            data = np.asarray(json.load(f)["data"], dtype=np.float64)
        data = data.reshape(-1, 28 * 28)
        images.append(np.clip(np.rint(data * 255.0), 0, 255).astype(np.uint8))
        labels.append(np.full(len(data), digit, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.default_rng(seed).permutation(len(labels))
    images, labels = images[order], labels[order]

    os.makedirs(dst, exist_ok=True)
    splits = {"train": slice(0, n_train), "t10k": slice(n_train, len(labels))}
    for name, sl in splits.items():
        img, lab = images[sl], labels[sl]
        write_idx(os.path.join(dst, f"{name}-images-idx3-ubyte.gz"), 0x803, (len(img), 28, 28), img)
        write_idx(os.path.join(dst, f"{name}-labels-idx1-ubyte.gz"), 0x801, (len(lab),), lab)
        print(name, len(lab), np.bincount(lab, minlength=10).tolist())


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
