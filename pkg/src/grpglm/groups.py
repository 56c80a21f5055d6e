"""Contiguous group structure over coordinate indices."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GroupStructure:
    """A partition of {0, ..., p-1} into contiguous groups.

    Only the size vector is stored; offsets, the square-root weights and
    group extrema are derived. Arbitrary (non-contiguous) index sets are
    deliberately not supported; permute columns instead.
    """

    sizes: tuple[int, ...]

    def __init__(self, sizes):
        sizes = tuple(int(s) for s in sizes)
        if len(sizes) == 0:
            raise ValueError("need at least one group")
        if any(s < 1 for s in sizes):
            raise ValueError("group sizes must be positive integers")
        object.__setattr__(self, "sizes", sizes)

    @property
    def n_groups(self) -> int:
        return len(self.sizes)

    @property
    def p(self) -> int:
        return sum(self.sizes)

    @property
    def d_min(self) -> int:
        return min(self.sizes)

    @property
    def d_max(self) -> int:
        return max(self.sizes)

    @property
    def offsets(self) -> np.ndarray:
        """Start index of each group (length n_groups)."""
        return np.concatenate(([0], np.cumsum(self.sizes)[:-1])).astype(np.intp)

    @property
    def sizes_array(self) -> np.ndarray:
        return np.asarray(self.sizes, dtype=float)

    @property
    def sqrt_sizes(self) -> np.ndarray:
        """The weights s(d_g) = sqrt(d_g)."""
        return np.sqrt(self.sizes_array)

    def slice(self, g: int) -> slice:
        off = self.offsets
        return slice(int(off[g]), int(off[g]) + self.sizes[g])

    def group_norms(self, z: np.ndarray) -> np.ndarray:
        """Per-group Euclidean norms of a length-p vector."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.p,):
            raise ValueError(f"vector has shape {z.shape}, expected ({self.p},)")
        sq = np.add.reduceat(z * z, self.offsets)
        return np.sqrt(sq)

    @staticmethod
    def singletons(p: int) -> "GroupStructure":
        return GroupStructure((1,) * p)

    def to_json(self) -> str:
        return json.dumps(list(self.sizes))

    @classmethod
    def from_json(cls, text: str) -> "GroupStructure":
        sizes = json.loads(text)
        if not isinstance(sizes, list):
            raise ValueError("group structure JSON must be an array of sizes")
        return cls(sizes)
