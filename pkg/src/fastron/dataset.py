"""Fixed configuration-space sample set and its Gaussian Gram matrix.

Points and the Gram matrix are frozen after construction (their numpy
buffers are read-only); only the labels change as the environment moves.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

DEFAULT_GAMMA = 10.0
JOINT_BOUNDS = (-math.pi, math.pi)

_MAGIC = b"FSTD"
_HEADER = struct.Struct("<4sIIId")  # magic, version, dof, n, gamma


def kernel(a, b, gamma: float) -> float:
    """Gaussian kernel ``exp(-gamma * |a - b|^2)``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return math.exp(-gamma * float(np.sum((a - b) ** 2)))


def gram_matrix(points, gamma: float) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    return np.exp(-gamma * cdist(points, points, "sqeuclidean"))


@dataclass(frozen=True)
class SamplerSpec:
    kind: str = "grid"
    n: int = 625
    dof: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("grid", "uniform"):
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.n < 1 or self.dof < 1:
            raise ValueError("n and dof must be positive")
        if self.kind == "grid" and grid_side(self.n, self.dof) is None:
            raise ValueError(f"grid sampling needs n = m**dof; {self.n} is not a {self.dof}-th power")


def grid_side(n: int, dof: int) -> int | None:
    m = round(n ** (1.0 / dof))
    for cand in (m - 1, m, m + 1):
        if cand >= 1 and cand ** dof == n:
            return cand
    return None


def _joint_bounds(joint_bounds, dof):
    b = np.asarray(joint_bounds, dtype=np.float64)
    if b.shape == (2,):
        b = np.tile(b, (dof, 1))
    if b.shape != (dof, 2) or np.any(b[:, 0] >= b[:, 1]):
        raise ValueError("joint bounds must be (lo, hi) or one (lo, hi) per joint with lo < hi")
    return b


def sample_configurations(spec: SamplerSpec, joint_bounds=JOINT_BOUNDS) -> np.ndarray:
    """Grid: cell centres of an ``m**dof`` lattice. Uniform: seeded i.i.d. draws."""
    b = _joint_bounds(joint_bounds, spec.dof)
    if spec.kind == "grid":
        m = grid_side(spec.n, spec.dof)
        axes = [lo + (np.arange(m) + 0.5) * (hi - lo) / m for lo, hi in b]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([g.ravel() for g in mesh])
    rng = np.random.default_rng(spec.seed)
    return rng.uniform(b[:, 0], b[:, 1], size=(spec.n, spec.dof))


class Dataset:
    """N configurations with their current labels and Gram matrix ``G``.

    ``labels`` holds +1 (collision) / -1 (free) as ``int8`` and is the only
    mutable part.
    """

    def __init__(self, points, gamma: float = DEFAULT_GAMMA, labels=None):
        if not gamma > 0:
            raise ValueError("gamma must be positive")
        points = np.array(points, dtype=np.float64)
        if points.ndim != 2 or len(points) == 0:
            raise ValueError("points must be a non-empty (N, dof) array")
        points.setflags(write=False)
        self.points = points
        self.gamma = float(gamma)
        gram = gram_matrix(points, gamma)
        gram.setflags(write=False)
        self.gram = gram
        if labels is None:
            self.labels = np.full(len(points), -1, dtype=np.int8)
        else:
            labels = np.array(labels, dtype=np.int8)
            if labels.shape != (len(points),) or not np.all(np.abs(labels) == 1):
                raise ValueError("labels must be N values in {+1, -1}")
            self.labels = labels

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dof(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def dump(self, path) -> None:
        """Write header (dof, N, gamma), points and labels as little-endian binary."""
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, 1, self.dof, self.n, self.gamma))
            fh.write(self.points.astype("<f8").tobytes())
            fh.write(self.labels.astype("i1").tobytes())

    @classmethod
    def load(cls, path) -> Dataset:
        with open(path, "rb") as fh:
            raw = fh.read()
        magic, version, dof, n, gamma = _HEADER.unpack_from(raw, 0)
        if magic != _MAGIC or version != 1:
            raise ValueError(f"{path}: not a dataset dump")
        off = _HEADER.size
        points = np.frombuffer(raw, dtype="<f8", count=n * dof, offset=off).reshape(n, dof)
        off += 8 * n * dof
        labels = np.frombuffer(raw, dtype="i1", count=n, offset=off)
        return cls(points, gamma, labels)


def build_dataset(spec: SamplerSpec, joint_bounds=JOINT_BOUNDS,
                  gamma: float = DEFAULT_GAMMA) -> Dataset:
    """Sample configurations per ``spec`` and materialize the Gram matrix.

    Labels start at -1 until the first full oracle sweep.
    """
    return Dataset(sample_configurations(spec, joint_bounds), gamma)


def _ranked_row(row: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    """First ``k`` candidates by descending kernel value, ties to the lowest index."""
    vals = row[candidates]
    if k < len(candidates):
        thresh = np.partition(vals, len(vals) - k)[len(vals) - k]
        keep = vals >= thresh
        candidates = candidates[keep]
        vals = vals[keep]
    order = np.lexsort((candidates, -vals))
    return candidates[order[:k]]


def kth_nearest_nonsupport(d: Dataset, support, i: int, k: int) -> int | None:
    """Index of the ``k``-th nearest non-support point to dataset point ``i``.

    Nearness is read off the Gram matrix (largest kernel value is nearest).
    Returns ``None`` when fewer than ``k`` non-support points exist.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    mask = np.ones(d.n, dtype=bool)
    mask[np.asarray(support, dtype=np.intp)] = False
    candidates = np.flatnonzero(mask)
    if len(candidates) < k:
        return None
    return int(_ranked_row(d.gram[i], candidates, k)[k - 1])


def nearest_nonsupport_table(d: Dataset, support, k_max: int) -> np.ndarray:
    """Row ``r`` lists the ``k_max`` nearest non-support points of ``support[r]``.

    Missing entries (too few non-support points) are -1.
    """
    support = np.asarray(support, dtype=np.intp)
    table = np.full((len(support), k_max), -1, dtype=np.intp)
    if k_max == 0 or len(support) == 0:
        return table
    mask = np.ones(d.n, dtype=bool)
    mask[support] = False
    candidates = np.flatnonzero(mask)
    k = min(k_max, len(candidates))
    if k == 0:
        return table
    for r, i in enumerate(support):
        table[r, :k] = _ranked_row(d.gram[i], candidates, k)
    return table
