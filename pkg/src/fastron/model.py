"""The Fastron model: a kernel perceptron over a fixed dataset.

Training keeps the hypothesis vector ``F = G @ alpha`` up to date
incrementally. Each update first drops redundant support points (those still
classified correctly with their own weight removed), then corrects the point
with the most negative margin in a single step so that its new margin is
exactly ``r``, where ``r = r_plus`` for collision points and 1 otherwise.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import _backend
from .dataset import Dataset

DEFAULT_R_PLUS = 100.0
DEFAULT_MAX_UPDATES = 5000

_MAGIC = b"FSTM"
_HEADER = struct.Struct("<4sIId")  # magic, version, n, r_plus


@dataclass(frozen=True)
class UpdateReport:
    converged: bool
    iterations: int
    support_count: int
    removed_count: int


class FastronModel:
    """Weights ``alpha`` and cached hypothesis ``F`` for an N-point dataset."""

    def __init__(self, n: int, r_plus: float = DEFAULT_R_PLUS,
                 max_updates: int = DEFAULT_MAX_UPDATES, backend: str | None = None):
        if n < 1:
            raise ValueError("model size must be positive")
        if not r_plus >= 1:
            raise ValueError("r_plus must be >= 1")
        if max_updates < 1:
            raise ValueError("max_updates must be positive")
        self.alpha = np.zeros(n)
        self.F = np.zeros(n)
        self.r_plus = float(r_plus)
        self.max_updates = int(max_updates)
        self.core = _backend.core if backend is None else _backend.load(backend)
        self._evaluator = None
        self._evaluator_key = None
        self._version = 0

    @classmethod
    def from_alpha(cls, alpha, d: Dataset, **kwargs) -> FastronModel:
        """Model with the given weights; ``F`` is recomputed as ``G @ alpha``."""
        alpha = np.array(alpha, dtype=np.float64)
        if alpha.shape != (d.n,):
            raise ValueError(f"alpha must have length {d.n}")
        model = cls(d.n, **kwargs)
        model.alpha = alpha
        model.F = d.gram @ alpha
        return model

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def support(self) -> np.ndarray:
        """Sorted indices with nonzero weight."""
        return np.flatnonzero(self.alpha)

    def _check(self, d: Dataset) -> None:
        if d.n != self.n:
            raise ValueError(f"model has {self.n} weights but dataset has {d.n} points")

    def _touch(self) -> None:
        self._version += 1
        self._evaluator = None

    def update(self, d: Dataset, max_updates: int | None = None) -> UpdateReport:
        """Fit the current labels; stops early once every margin is positive.

        Non-convergence within ``max_updates`` corrections is reported in the
        returned report, not raised; the model keeps its last state.
        """
        self._check(d)
        limit = self.max_updates if max_updates is None else int(max_updates)
        converged, iterations, removed = self.core.perceptron_update(
            self.alpha, self.F, d.gram, d.labels, self.r_plus, limit)
        self._touch()
        return UpdateReport(bool(converged), int(iterations),
                            int(np.count_nonzero(self.alpha)), int(removed))

    def remove_redundant(self, d: Dataset) -> int:
        """Drop support points whose leave-one-out margin is still positive."""
        self._check(d)
        removed = self.core.remove_redundant(self.alpha, self.F, d.gram, d.labels)
        self._touch()
        return int(removed)

    def evaluator(self, d: Dataset, backend: str | None = None):
        """Kernel-sum evaluator restricted to the current support set (cached)."""
        key = (id(d), self._version, backend)
        if self._evaluator is None or self._evaluator_key != key:
            core = self.core if backend is None else _backend.load(backend)
            sup = self.support
            self._evaluator = core.KernelSum(d.points[sup], self.alpha[sup], d.gamma)
            self._evaluator_key = key
        return self._evaluator

    def hypothesis_at(self, d: Dataset, q) -> float:
        """Raw kernel sum over the support set at configuration ``q``."""
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (d.dof,):
            raise ValueError(f"configuration must have {d.dof} joint angles")
        return float(self.evaluator(d).value(q))

    def classify(self, d: Dataset, q) -> int:
        """Proxy collision check: +1 collision, -1 free; a zero sum counts as collision."""
        return 1 if self.hypothesis_at(d, q) >= 0.0 else -1

    def classify_many(self, d: Dataset, configs) -> np.ndarray:
        configs = np.ascontiguousarray(configs, dtype=np.float64).reshape(-1, d.dof)
        values = self.evaluator(d).values(configs)
        return np.where(values >= 0.0, 1, -1).astype(np.int8)

    def checker(self, d: Dataset, backend: str | None = None) -> FastronChecker:
        return FastronChecker(self, d, backend)

    def dump(self, path) -> None:
        """Write the header and alpha; ``F`` is rebuilt from the Gram matrix on load."""
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, 1, self.n, self.r_plus))
            fh.write(self.alpha.astype("<f8").tobytes())

    @classmethod
    def load(cls, path, d: Dataset, **kwargs) -> FastronModel:
        with open(path, "rb") as fh:
            raw = fh.read()
        magic, version, n, r_plus = _HEADER.unpack_from(raw, 0)
        if magic != _MAGIC or version != 1:
            raise ValueError(f"{path}: not a model dump")
        alpha = np.frombuffer(raw, dtype="<f8", count=n, offset=_HEADER.size)
        return cls.from_alpha(alpha, d, r_plus=r_plus, **kwargs)


class FastronChecker:
    """Callable proxy collision checker over a frozen model snapshot."""

    def __init__(self, model: FastronModel, d: Dataset, backend: str | None = None):
        self.dof = d.dof
        self._eval = model.evaluator(d, backend)

    def __call__(self, q) -> int:
        return 1 if self._eval.value(np.asarray(q, dtype=np.float64)) >= 0.0 else -1

    def raw(self, q) -> bool:
        return self._eval.value(q) >= 0.0

    def check_many(self, configs) -> np.ndarray:
        values = self._eval.values(np.ascontiguousarray(configs, dtype=np.float64))
        return np.where(values >= 0.0, 1, -1).astype(np.int8)


def update(model: FastronModel, d: Dataset) -> UpdateReport:
    return model.update(d)


def remove_redundant(model: FastronModel, d: Dataset) -> int:
    return model.remove_redundant(d)


def classify(model: FastronModel, d: Dataset, q) -> int:
    return model.classify(d, q)


def hypothesis_at(model: FastronModel, d: Dataset, q) -> float:
    return model.hypothesis_at(d, q)
