"""Deterministic synthetic datasets (desk-scale stand-ins for image data)."""

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

DATASET_NAMES = ("two-gaussians", "two-moons", "rings", "grid-multiclass")

# rings construction: class 0 strictly inside RINGS_INNER, class 1 strictly
# outside RINGS_OUTER
RINGS_INNER = 1.0
RINGS_OUTER = 2.0


class LabeledSample(NamedTuple):
    point: np.ndarray
    label: int


@dataclass
class Dataset:
    xs: np.ndarray  # (n, d) float64
    ys: np.ndarray  # (n,) int64
    name: str
    seed: int

    def __post_init__(self):
        self.xs = np.ascontiguousarray(self.xs, dtype=np.float64)
        self.ys = np.ascontiguousarray(self.ys, dtype=np.int64)
        if self.xs.ndim != 2 or self.ys.shape != (self.xs.shape[0],):
            raise ValueError("xs must be (n, d) with matching labels")

    def __len__(self):
        return self.xs.shape[0]

    def __iter__(self):
        for x, y in zip(self.xs, self.ys):
            yield LabeledSample(x, int(y))

    @property
    def dim(self):
        return self.xs.shape[1]

    @property
    def num_classes(self):
        return int(self.ys.max()) + 1 if len(self) else 0


def _two_gaussians(size, rng, dim=2):
    n0 = size // 2
    centers = np.zeros((2, dim))
    centers[0, 0] = -2.0
    centers[1, 0] = 2.0
    xs = rng.normal(0.0, 0.5, size=(size, dim))
    ys = np.zeros(size, dtype=np.int64)
    xs[:n0] += centers[0]
    xs[n0:] += centers[1]
    ys[n0:] = 1
    return xs, ys


def _two_moons(size, rng):
    n0 = size // 2
    n1 = size - n0
    t0 = rng.uniform(0.0, np.pi, size=n0)
    t1 = rng.uniform(0.0, np.pi, size=n1)
    xs = np.empty((size, 2))
    xs[:n0, 0] = np.cos(t0)
    xs[:n0, 1] = np.sin(t0)
    xs[n0:, 0] = 1.0 - np.cos(t1)
    xs[n0:, 1] = 0.5 - np.sin(t1)
    xs += rng.normal(0.0, 0.1, size=xs.shape)
    ys = np.zeros(size, dtype=np.int64)
    ys[n0:] = 1
    return xs, ys


def _rings(size, rng):
    n0 = size // 2
    n1 = size - n0
    # radii sampled with a strict margin so the norm invariant holds exactly
    r0 = 0.95 * RINGS_INNER * np.sqrt(rng.uniform(0.0, 1.0, size=n0))
    r1 = rng.uniform(RINGS_OUTER + 0.05, RINGS_OUTER + 1.0, size=n1)
    th = rng.uniform(0.0, 2.0 * np.pi, size=size)
    r = np.concatenate([r0, r1])
    xs = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    ys = np.zeros(size, dtype=np.int64)
    ys[n0:] = 1
    return xs, ys


def _grid_multiclass(size, rng):
    centers = np.array([[-2.0, -2.0], [2.0, -2.0], [0.0, 2.0]])
    ys = np.arange(size, dtype=np.int64) % 3
    xs = centers[ys] + rng.normal(0.0, 0.6, size=(size, 2))
    return xs, ys


def generate_dataset(name, size, seed, dim=2):
    """Deterministic labeled dataset; identical (name, size, seed) arguments
    regenerate bit-identical data."""
    if size <= 0:
        raise ValueError("size must be positive")
    rng = np.random.default_rng(seed)
    if name == "two-gaussians":
        xs, ys = _two_gaussians(size, rng, dim=dim)
    elif name == "two-moons":
        xs, ys = _two_moons(size, rng)
    elif name == "rings":
        xs, ys = _rings(size, rng)
    elif name == "grid-multiclass":
        xs, ys = _grid_multiclass(size, rng)
    else:
        raise ValueError(f"unknown dataset {name!r} (choose from {DATASET_NAMES})")
    return Dataset(xs, ys, name, int(seed))


def save_dataset_csv(dataset, path):
    """CSV with columns x_0..x_{d-1},label."""
    d = dataset.dim
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x_{j}" for j in range(d)] + ["label"])
        for x, y in zip(dataset.xs, dataset.ys):
            writer.writerow([repr(float(v)) for v in x] + [int(y)])


def load_dataset_csv(path, name=None, seed=0):
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        d = len(header) - 1
        xs, ys = [], []
        for row in reader:
            xs.append([float(v) for v in row[:d]])
            ys.append(int(row[d]))
    return Dataset(np.asarray(xs), np.asarray(ys), name or str(path), seed)
