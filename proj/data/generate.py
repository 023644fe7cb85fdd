#!/usr/bin/env python3
"""Generate stand-in dataset files for offline testing.

The acceptance suite needs a Semeion-format text file (266 whitespace
columns: 256 binary pixels + one-hot digit label) and an MNIST-format
IDX image/label pair.  This environment has no network access to the
original distributions, so both are synthesized from scikit-learn's
bundled handwritten-digits corpus (1797 real 8x8 digit images), resized
to the expected geometries.  File formats are byte-compatible with the
originals; image statistics are only an approximation.

Outputs (in the directory of this script):
  semeion.txt
  train-images-idx3-ubyte  train-labels-idx1-ubyte
  t10k-images-idx3-ubyte   t10k-labels-idx1-ubyte
"""

import struct
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits

OUT_DIR = Path(__file__).resolve().parent
RNG = np.random.default_rng(20260824)


def write_semeion(images, labels, path):
    # 8x8 (0..16) -> 16x16 binary via 2x nearest-neighbor upscaling
    with open(path, "w") as out:
        for img, label in zip(images, labels):
            up = np.kron(img.reshape(8, 8), np.ones((2, 2)))
            bits = (up > 7).astype(int).ravel()
            one_hot = np.zeros(10, dtype=int)
            one_hot[label] = 1
            row = " ".join(f"{b:.4f}" for b in bits) + " " + " ".join(map(str, one_hot))
            out.write(row + "\n")


def to_28x28(img):
    # nearest-neighbor 8 -> 28 resize, intensities rescaled to 0..255
    idx = (np.arange(28) * 8 // 28).clip(0, 7)
    up = img.reshape(8, 8)[np.ix_(idx, idx)]
    return np.round(up * (255.0 / 16.0)).astype(np.uint8)


def augment(img):
    # small random shift plus pixel dropout keeps replicas distinct
    shifted = np.roll(img.reshape(8, 8), shift=(RNG.integers(-1, 2), RNG.integers(-1, 2)),
                      axis=(0, 1))
    mask = RNG.random(shifted.shape) < 0.05
    out = shifted.copy()
    out[mask] = 0
    return out.ravel()


def write_idx(images28, labels, images_path, labels_path):
    with open(images_path, "wb") as out:
        out.write(struct.pack(">IIII", 0x803, len(images28), 28, 28))
        for img in images28:
            out.write(img.tobytes())
    with open(labels_path, "wb") as out:
        out.write(struct.pack(">II", 0x801, len(labels)))
        out.write(bytes(int(l) for l in labels))


def main():
    digits = load_digits()
    images, labels = digits.data, digits.target

    # Semeion stand-in: the original has 1593 rows
    write_semeion(images[:1593], labels[:1593], OUT_DIR / "semeion.txt")

    # MNIST stand-in: 6000 train / 800 test images of 28x28.  The
    # loaders subsample the training set by fraction, so 0.2 of 6000
    # gives the 1200-image reduced training split.
    n_train, n_test = 6000, 800
    order = RNG.permutation(len(images))
    train_imgs, train_lbls = [], []
    for i in range(n_train):
        src = order[i % len(order)]
        img = images[src] if i < len(order) else augment(images[src])
        train_imgs.append(to_28x28(img))
        train_lbls.append(labels[src])
    test_imgs, test_lbls = [], []
    for i in range(n_test):
        src = order[(i * 7 + 3) % len(order)]
        test_imgs.append(to_28x28(augment(images[src])))
        test_lbls.append(labels[src])

    write_idx(train_imgs, train_lbls, OUT_DIR / "train-images-idx3-ubyte",
              OUT_DIR / "train-labels-idx1-ubyte")
    write_idx(test_imgs, test_lbls, OUT_DIR / "t10k-images-idx3-ubyte",
              OUT_DIR / "t10k-labels-idx1-ubyte")
    print("wrote semeion.txt and IDX files to", OUT_DIR)


if __name__ == "__main__":
    main()
