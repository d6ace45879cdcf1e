"""Block-structured dictionaries, sensing matrices, Gram matrices, and eigensolves.

All types are immutable after construction (arrays are stored read-only), so
every operation in the package is a pure function that is safe to call from
concurrent workers.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field

import numpy as np

# Relative eigenvalue threshold below which a dictionary is treated as
# row-rank deficient.
RANK_TOL = 1e-10

_SYM_INPUT_TOL = 1e-10
_GRAM_SYM_TOL = 1e-12
_GRAM_PSD_TOL = 1e-10


def _as_readonly_matrix(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class BlockStructure:
    """Ordered partition of matrix columns into contiguous blocks.

    ``sizes`` holds one positive integer per block; derived fields give the
    number of blocks, the total column count, the start offset of each block,
    and a per-column block label.
    """

    sizes: tuple[int, ...]
    offsets: np.ndarray = field(init=False, repr=False, compare=False)
    labels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if len(sizes) == 0:
            raise ValueError("at least one block is required")
        if any(s < 1 for s in sizes):
            raise ValueError(f"block sizes must be >= 1, got {sizes}")
        offsets = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)
        labels = np.repeat(np.arange(len(sizes), dtype=np.int64), sizes)
        offsets.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "labels", labels)

    @property
    def num_blocks(self) -> int:
        return len(self.sizes)

    @property
    def num_columns(self) -> int:
        return int(self.offsets[-1])

    @property
    def uniform_size(self) -> int | None:
        """Common block size, or None when blocks have mixed sizes."""
        first = self.sizes[0]
        return first if all(s == first for s in self.sizes) else None

    def block_slice(self, j: int) -> slice:
        if not 0 <= j < self.num_blocks:
            raise IndexError(f"block index {j} out of range [0, {self.num_blocks})")
        return slice(int(self.offsets[j]), int(self.offsets[j + 1]))


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Real N x K dictionary whose columns are grouped by a BlockStructure.

    The dictionary may be square or overcomplete (N <= K) and must have full
    row rank: the smallest eigenvalue of D D' must exceed RANK_TOL times the
    largest.
    """

    matrix: np.ndarray
    structure: BlockStructure

    def __post_init__(self):
        mat = _as_readonly_matrix(self.matrix, "dictionary matrix")
        object.__setattr__(self, "matrix", mat)
        n, k = mat.shape
        if k != self.structure.num_columns:
            raise ValueError(
                f"dictionary has {k} columns but the block structure covers "
                f"{self.structure.num_columns}"
            )
        if n > k:
            raise ValueError(f"dictionary must satisfy N <= K, got N={n}, K={k}")
        w = np.linalg.eigvalsh(mat @ mat.T)
        if w[-1] <= 0.0 or w[0] <= RANK_TOL * w[-1]:
            raise ValueError(
                "dictionary is row-rank deficient "
                f"(eigenvalue ratio {w[0] / max(w[-1], np.finfo(float).tiny):.3e})"
            )

    @property
    def signal_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_atoms(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class SensingMatrix:
    """Real M x N measurement operator with M < N."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = _as_readonly_matrix(self.matrix, "sensing matrix")
        object.__setattr__(self, "matrix", mat)
        m, n = mat.shape
        if m >= n:
            raise ValueError(f"sensing must be underdetermined (M < N), got M={m}, N={n}")

    @property
    def num_measurements(self) -> int:
        return self.matrix.shape[0]

    @property
    def signal_dim(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class EquivalentDictionary:
    """Product of a sensing matrix and a dictionary, keeping the block layout."""

    matrix: np.ndarray
    structure: BlockStructure

    def __post_init__(self):
        mat = _as_readonly_matrix(self.matrix, "equivalent dictionary")
        object.__setattr__(self, "matrix", mat)
        if mat.shape[1] != self.structure.num_columns:
            raise ValueError(
                f"matrix has {mat.shape[1]} columns but the block structure covers "
                f"{self.structure.num_columns}"
            )

    @property
    def num_measurements(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_atoms(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class BlockGram:
    """Symmetric positive-semidefinite K x K Gram matrix with a block partition.

    Pass ``validate=False`` to skip the symmetry/PSD checks, e.g. for
    finite-difference probes that perturb a single entry.
    """

    matrix: np.ndarray
    structure: BlockStructure
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        mat = _as_readonly_matrix(self.matrix, "gram matrix")
        object.__setattr__(self, "matrix", mat)
        k = self.structure.num_columns
        if mat.shape != (k, k):
            raise ValueError(f"gram matrix must be {k} x {k}, got {mat.shape}")
        if validate:
            scale = max(1.0, float(np.abs(mat).max()))
            asym = float(np.abs(mat - mat.T).max())
            if asym > _GRAM_SYM_TOL * scale:
                raise ValueError(f"gram matrix is not symmetric (max deviation {asym:.3e})")
            w = np.linalg.eigvalsh((mat + mat.T) / 2.0)
            floor = -_GRAM_PSD_TOL * float(np.linalg.norm(mat))
            if w[0] < floor:
                raise ValueError(f"gram matrix is not PSD (min eigenvalue {w[0]:.3e})")

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def block(self, i: int, j: int) -> np.ndarray:
        """The s_i x s_j submatrix at block row i, block column j (0-based)."""
        return self.matrix[self.structure.block_slice(i), self.structure.block_slice(j)]


@dataclass(frozen=True, eq=False)
class BlockSparseVector:
    """Length-K coefficient vector that is nonzero only inside ``support`` blocks."""

    values: np.ndarray
    structure: BlockStructure
    support: tuple[int, ...]

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size != self.structure.num_columns:
            raise ValueError(
                f"values must be a length-{self.structure.num_columns} vector, "
                f"got shape {vals.shape}"
            )
        vals.flags.writeable = False
        support = tuple(sorted(int(j) for j in self.support))
        if len(set(support)) != len(support):
            raise ValueError("support contains duplicate block indices")
        if support and not (0 <= support[0] and support[-1] < self.structure.num_blocks):
            raise ValueError(f"support {support} out of range")
        active = np.zeros(self.structure.num_columns, dtype=bool)
        for j in support:
            active[self.structure.block_slice(j)] = True
        if np.any(vals[~active] != 0.0):
            raise ValueError("entries outside the support blocks must be exactly zero")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "support", support)

    @property
    def block_sparsity(self) -> int:
        """Number of blocks with nonzero Euclidean norm."""
        count = 0
        for j in range(self.structure.num_blocks):
            if np.linalg.norm(self.values[self.structure.block_slice(j)]) > 0.0:
                count += 1
        return count


def equivalent_dictionary(A, D: Dictionary) -> EquivalentDictionary:
    """Compose a sensing matrix with a dictionary.

    ``A`` may be a SensingMatrix or a plain 2-D array (e.g. the identity, which
    the SensingMatrix type rejects because it is not underdetermined).
    """
    a_mat = A.matrix if isinstance(A, SensingMatrix) else np.asarray(A, dtype=float)
    if a_mat.ndim != 2 or a_mat.shape[1] != D.signal_dim:
        raise ValueError(
            f"sensing matrix with {a_mat.shape} columns does not match "
            f"dictionary signal dimension {D.signal_dim}"
        )
    return EquivalentDictionary(a_mat @ D.matrix, D.structure)


def gram(E: EquivalentDictionary) -> BlockGram:
    """Gram matrix of the equivalent dictionary columns, with its block layout."""
    g = E.matrix.T @ E.matrix
    return BlockGram((g + g.T) / 2.0, E.structure)


def sym_eig(S) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.

    The input must be symmetric to within 1e-10 relative; it is symmetrized
    via (S + S') / 2 before the solve. Returns ``(w, V)`` with S = V diag(w) V'
    and orthonormal columns in V.
    """
    mat = np.asarray(S, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix contains non-finite entries")
    scale = max(1.0, float(np.abs(mat).max()))
    if float(np.abs(mat - mat.T).max()) > _SYM_INPUT_TOL * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    w, v = np.linalg.eigh((mat + mat.T) / 2.0)
    return w[::-1].copy(), v[:, ::-1].copy()
