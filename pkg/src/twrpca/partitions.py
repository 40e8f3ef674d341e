"""Residual partitions: the block structure the Huber fidelity sums over.

A partition splits the entries of an M x N residual matrix into disjoint
covering blocks. The two structured kinds (every entry its own block;
one block per column) get vectorized norm/expand paths; arbitrary custom
blocks are lists of column-major flat index arrays.
"""

import numpy as np

from .errors import InputError


class Partition:
    """Block structure over M x N matrix entries.

    kind "pointwise": each entry is a block (canonical order: column-major).
    kind "columnwise": each column is a block.
    kind "custom": explicit blocks of column-major flat indices, validated
    disjoint, covering and non-empty for the bound shape.
    """

    def __init__(self, kind, blocks=None, shape=None):
        if kind not in ("pointwise", "columnwise", "custom"):
            raise InputError(f"unknown partition kind {kind!r}")
        self.kind = kind
        self.blocks = None
        self.shape = None
        if kind == "custom":
            if blocks is None or shape is None:
                raise InputError("custom partition needs blocks and shape")
            self.shape = (int(shape[0]), int(shape[1]))
            total = self.shape[0] * self.shape[1]
            idx_blocks = []
            seen = np.zeros(total, dtype=bool)
            for b, idx in enumerate(blocks):
                idx = np.asarray(idx, dtype=np.intp).ravel()
                if idx.size == 0:
                    raise InputError(f"block {b} is empty")
                if idx.min() < 0 or idx.max() >= total:
                    raise InputError(f"block {b} has indices outside the matrix")
                if seen[idx].any() or np.unique(idx).size != idx.size:
                    raise InputError(f"block {b} overlaps another block")
                seen[idx] = True
                idx_blocks.append(idx)
            if not seen.all():
                raise InputError("blocks do not cover every matrix entry")
            self.blocks = idx_blocks
        elif blocks is not None or shape is not None:
            raise InputError(f"{kind} partition takes no explicit blocks")

    @classmethod
    def pointwise(cls):
        return cls("pointwise")

    @classmethod
    def columnwise(cls):
        return cls("columnwise")

    @classmethod
    def custom(cls, blocks, shape):
        return cls("custom", blocks=blocks, shape=shape)

    def _check_shape(self, shape):
        if self.kind == "custom" and tuple(shape) != self.shape:
            raise InputError(f"partition is bound to shape {self.shape}, got {tuple(shape)}")

    def n_blocks(self, shape):
        self._check_shape(shape)
        if self.kind == "pointwise":
            return shape[0] * shape[1]
        if self.kind == "columnwise":
            return shape[1]
        return len(self.blocks)

    def block_norms(self, e):
        """Frobenius norm of each block of E, in canonical block order."""
        e = np.asarray(e)
        self._check_shape(e.shape)
        if self.kind == "pointwise":
            return np.abs(e).ravel(order="F")
        if self.kind == "columnwise":
            return np.linalg.norm(e, axis=0)
        flat = e.ravel(order="F")
        return np.array([np.linalg.norm(flat[idx]) for idx in self.blocks])

    def expand(self, values, shape):
        """Broadcast one real value per block back to a full M x N matrix."""
        self._check_shape(shape)
        values = np.asarray(values, dtype=float)
        if self.kind == "pointwise":
            return values.reshape(shape, order="F")
        if self.kind == "columnwise":
            return np.broadcast_to(values[None, :], shape).copy()
        out = np.empty(shape[0] * shape[1], dtype=float)
        for idx, v in zip(self.blocks, values):
            out[idx] = v
        return out.reshape(shape, order="F")
