"""Block orthogonal matching pursuit.

Greedy decoder for block-sparse representations: at each of exactly
``k_blocks`` iterations it selects the block whose columns correlate most with
the current residual (ties broken toward the lowest block index), then
re-solves the coefficients by least squares over the union of all selected
blocks and recomputes the residual. This is the fully re-orthogonalized
variant, so after the final iteration the residual is orthogonal to every
selected column. Columns are used exactly as given, without re-normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import BlockSparseVector, EquivalentDictionary


@dataclass(frozen=True)
class BompConfig:
    """Decoder settings: number of blocks to select and the relative
    singular-value threshold below which a stacked sub-dictionary is
    rejected as rank deficient."""

    k_blocks: int
    ls_tol: float = 1e-10

    def __post_init__(self):
        if int(self.k_blocks) < 1:
            raise ValueError(f"k_blocks must be >= 1, got {self.k_blocks}")
        if not float(self.ls_tol) >= 0.0:
            raise ValueError(f"ls_tol must be non-negative, got {self.ls_tol}")


class RankDeficientSupportError(np.linalg.LinAlgError):
    """Raised when the columns of the selected blocks are numerically
    dependent, naming the offending support."""

    def __init__(self, support, signal: int | None = None):
        self.support = tuple(int(j) for j in support)
        self.signal = signal
        where = "" if signal is None else f" while decoding signal {signal}"
        super().__init__(
            f"selected block support {self.support} is numerically rank deficient{where}"
        )


def _check_batch(E: EquivalentDictionary, Y: np.ndarray, cfg: BompConfig) -> np.ndarray:
    y = np.asarray(Y, dtype=float)
    if y.ndim != 2:
        raise ValueError(f"measurements must be 2-D (one column per signal), got {y.shape}")
    if y.shape[0] != E.num_measurements:
        raise ValueError(
            f"measurements have {y.shape[0]} rows, equivalent dictionary has "
            f"{E.num_measurements}"
        )
    if cfg.k_blocks > E.structure.num_blocks:
        raise ValueError(
            f"k_blocks={cfg.k_blocks} exceeds the number of blocks "
            f"{E.structure.num_blocks}"
        )
    return y


def bomp_decode_batch(E: EquivalentDictionary, Y, cfg: BompConfig) -> np.ndarray:
    """Decode every column of Y, returning the K x L coefficient matrix."""
    y = _check_batch(E, Y, cfg)
    theta, supports, status = kernels.bomp_batch(
        E.matrix, E.structure.offsets, y, cfg.k_blocks, cfg.ls_tol
    )
    bad = np.nonzero(status > 0)[0]
    if bad.size:
        sig = int(bad[0])
        raise RankDeficientSupportError(supports[: status[sig], sig], signal=sig)
    return theta


def bomp_decode(E: EquivalentDictionary, y, cfg: BompConfig) -> BlockSparseVector:
    """Decode a single measurement vector into a block-sparse coefficient vector.

    The result has exactly ``cfg.k_blocks`` blocks in its support; the
    coefficients on that support are the least-squares fit of y, so the final
    residual is orthogonal to all selected columns.
    """
    vec = np.asarray(y, dtype=float)
    if vec.ndim != 1:
        raise ValueError(f"expected a 1-D measurement vector, got shape {vec.shape}")
    batch = _check_batch(E, vec[:, None], cfg)
    theta, supports, status = kernels.bomp_batch(
        E.matrix, E.structure.offsets, batch, cfg.k_blocks, cfg.ls_tol
    )
    if status[0] > 0:
        raise RankDeficientSupportError(supports[: status[0], 0])
    return BlockSparseVector(
        values=theta[:, 0],
        structure=E.structure,
        support=tuple(int(j) for j in supports[:, 0]),
    )
