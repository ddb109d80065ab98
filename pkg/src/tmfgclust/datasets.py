"""Synthetic labeled time-series generators and UCR-format writing.

The cylinder-bell-funnel generator follows the classic recipe: a noisy
plateau, ramp-up, or ramp-down of random onset and duration on top of
standard normal noise, three classes. The generic class generator mixes
smooth class prototypes with white noise; its signal/noise knobs control
the within-class correlation, matching the moderately-correlated regime
of real time-series archives.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .simmatrix import Dataset


def generate_cbf(n: int = 930, length: int = 128, seed: int = 0) -> Dataset:
    """Cylinder-bell-funnel dataset: n series of the given length, 3 classes."""
    rng = np.random.default_rng(seed)
    t = np.arange(1, length + 1, dtype=np.float64)
    series = np.empty((n, length))
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        cls = i % 3
        a = int(rng.integers(16, 33))
        b = a + int(rng.integers(32, 97))
        eta = rng.standard_normal()
        eps = rng.standard_normal(length)
        window = ((t >= a) & (t <= b)).astype(np.float64)
        if cls == 0:
            shape = window
        elif cls == 1:
            shape = window * (t - a) / (b - a)
        else:
            shape = window * (b - t) / (b - a)
        series[i] = (6.0 + eta) * shape + eps
        labels[i] = cls
    return Dataset(labels=labels, series=series)


def generate_class_dataset(
    n: int,
    length: int,
    classes: int,
    seed: int = 0,
    signal: float = 1.0,
    noise: float = 1.0,
) -> Dataset:
    """Labeled series around smooth per-class prototypes plus white noise."""
    rng = np.random.default_rng(seed)
    protos = np.empty((classes, length))
    kernel = np.ones(8) / 8.0
    for c in range(classes):
        walk = rng.standard_normal(length + 16)
        smooth = np.convolve(walk, kernel, mode="same")[:length]
        protos[c] = smooth / smooth.std()
    labels = rng.integers(0, classes, size=n)
    # every class must appear for a k-class ground truth
    labels[:classes] = np.arange(classes)
    series = signal * protos[labels] + noise * rng.standard_normal((n, length))
    return Dataset(labels=labels.astype(np.int64), series=series)


def write_ucr(path, data: Dataset, delimiter: str = "\t") -> None:
    """Write a dataset in UCR text format: label then values per line."""
    with Path(path).open("w") as fh:
        for lab, row in zip(data.labels, data.series):
            fh.write(delimiter.join([str(int(lab))] + [f"{x:.10g}" for x in row]))
            fh.write("\n")


# (n, length, classes, signal) rows used by the acceptance suite as
# stand-ins for archive datasets of the same shape; CBF comes from
# generate_cbf. Signal levels put within-class correlation in the 0.5-0.7
# range typical of the corresponding archive data.
SURROGATE_SHAPES = {
    "SonyAIBORobotSurface2": (980, 65, 2, 1.4),
    "ShapesAll": (1200, 512, 60, 1.0),
    "InsectWingbeatSound": (2200, 256, 11, 1.0),
    "Mallat": (2400, 1024, 8, 1.0),
}


def surrogate_dataset(name: str, seed: int = 0) -> Dataset:
    """A generated dataset matching the shape of the named archive dataset."""
    n, length, classes, signal = SURROGATE_SHAPES[name]
    return generate_class_dataset(n, length, classes, seed=seed, signal=signal, noise=1.0)
