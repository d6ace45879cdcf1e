"""Weighted coherence minimization by bound optimization.

The design objective

    f(G) = 1/2 * norm_penalty(G) + (1 - alpha) * total_inter(G) + alpha * total_sub(G)

is hard to minimize directly over sensing matrices, so each iteration replaces
it with a quadratic surrogate built from the idealized masks of the previous
Gram matrix. The surrogate shares f's value and gradient at the previous
iterate and upper-bounds f everywhere, so its exact minimizer can never
increase f; iterating therefore descends monotonically to a local optimum.
Each surrogate is minimized in closed form: after whitening by the dictionary
frame, the problem becomes a nearest rank-M PSD approximation, solved by the
top-M eigenpairs of the whitened target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coherence import (
    CoherenceReport,
    _check_alpha,
    _idealized,
    _norm_penalty,
    _objective,
    _total_inter,
    _total_sub,
    coherence_report,
)
from .ds import design_ds
from .model import (
    RANK_TOL,
    BlockGram,
    BlockStructure,
    Dictionary,
    EquivalentDictionary,
    SensingMatrix,
    sym_eig,
)

INIT_MODES = ("ds", "random")


@dataclass(frozen=True)
class WcmConfig:
    """Optimizer settings.

    ``alpha`` weights sub-block against inter-block coherence and must lie
    strictly inside (0, 1). Iteration stops when the objective changes by at
    most ``rel_tol * (1 + f)`` in one step, or at ``max_iters``. ``init``
    selects the starting sensing matrix: the closed-form baseline ("ds") or
    i.i.d. standard normal entries ("random", which requires a seed).
    """

    alpha: float
    max_iters: int = 1000
    rel_tol: float = 1e-8
    init: str = "ds"
    seed: int | None = None

    def __post_init__(self):
        _check_alpha(self.alpha)
        if int(self.max_iters) < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not float(self.rel_tol) > 0.0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.init == "random" and self.seed is None:
            raise ValueError("random initialization requires a seed")


@dataclass(frozen=True, eq=False)
class WcmReport:
    """Result of one optimization run.

    ``objective_trace`` holds f at the initial point and after every step, and
    is non-increasing up to floating-point slack. ``component_trace`` carries
    the matching (total_inter, total_sub, norm_penalty) triples, one row per
    trace entry.
    """

    sensing: SensingMatrix
    objective_trace: np.ndarray
    iterations: int
    converged: bool
    final_report: CoherenceReport
    component_trace: np.ndarray


def surrogate_target(gram: BlockGram, alpha: float) -> np.ndarray:
    """Weighted combination of the idealized masks that the per-step
    minimization drives the Gram matrix toward:

        (2/3) * (1/2 * idealized_norm + (1-alpha) * idealized_inter + alpha * idealized_sub)
    """
    alpha = _check_alpha(alpha)
    return _surrogate_target(gram.matrix, gram.structure, alpha)


def _surrogate_target(g: np.ndarray, structure: BlockStructure, alpha: float) -> np.ndarray:
    return (2.0 / 3.0) * (
        0.5 * _idealized(g, structure, "norm")
        + (1.0 - alpha) * _idealized(g, structure, "inter")
        + alpha * _idealized(g, structure, "sub")
    )


def surrogate_value(gram: BlockGram, gram_prev: BlockGram, alpha: float) -> float:
    """Surrogate objective g(G, G_prev): quadratic distances from G to the
    idealized masks of G_prev, in the same weights as the objective.
    """
    alpha = _check_alpha(alpha)
    if gram.matrix.shape != gram_prev.matrix.shape:
        raise ValueError("G and G_prev must have identical shapes")
    if gram.structure != gram_prev.structure:
        raise ValueError("G and G_prev must share one block structure")
    g, gp, s = gram.matrix, gram_prev.matrix, gram.structure
    return float(
        0.5 * np.sum((g - _idealized(gp, s, "norm")) ** 2)
        + (1.0 - alpha) * np.sum((g - _idealized(gp, s, "inter")) ** 2)
        + alpha * np.sum((g - _idealized(gp, s, "sub")) ** 2)
    )


def surrogate_gradient(gram: BlockGram, gram_prev: BlockGram, alpha: float) -> np.ndarray:
    """Entrywise gradient of :func:`surrogate_value` in its first argument."""
    alpha = _check_alpha(alpha)
    g, gp, s = gram.matrix, gram_prev.matrix, gram.structure
    return 2.0 * (
        0.5 * (g - _idealized(gp, s, "norm"))
        + (1.0 - alpha) * (g - _idealized(gp, s, "inter"))
        + alpha * (g - _idealized(gp, s, "sub"))
    )


class _DesignBasis:
    """Whitening transforms of one dictionary, precomputed for the iteration."""

    def __init__(self, D: Dictionary):
        w, u = sym_eig(D.matrix @ D.matrix.T)
        if w[0] <= 0.0 or w[-1] <= RANK_TOL * w[0]:
            raise ValueError("dictionary is row-rank deficient; cannot whiten")
        self.dictionary = D
        # diag(w)^{-1/2} U' and its product with D
        self.whiten = (u / np.sqrt(w)).T
        self.whiten_dict = self.whiten @ D.matrix

    def step(self, a_mat: np.ndarray, alpha: float, m: int) -> np.ndarray:
        """One exact surrogate minimization from the sensing matrix ``a_mat``."""
        d_mat = self.dictionary.matrix
        e = a_mat @ d_mat
        g = e.T @ e
        g = (g + g.T) / 2.0
        target = _surrogate_target(g, self.dictionary.structure, alpha)
        whitened = self.whiten_dict @ target @ self.whiten_dict.T
        w, v = sym_eig(whitened)
        # Negative directions cannot be matched by a PSD Gram and only add a
        # constant, so they are clamped before the square root.
        top = np.sqrt(np.clip(w[:m], 0.0, None))
        return (v[:, :m] * top).T @ self.whiten


def wcm_step(A_prev: SensingMatrix, D: Dictionary, alpha: float) -> SensingMatrix:
    """Exact minimizer of the surrogate built at ``A_prev``.

    Among all sensing matrices of the same shape, the returned one minimizes
    the surrogate anchored at the Gram matrix of ``A_prev @ D``. The result is
    unique only up to left-orthonormal rotation; the Gram matrix it induces is
    rotation-invariant.
    """
    alpha = _check_alpha(alpha)
    if A_prev.signal_dim != D.signal_dim:
        raise ValueError(
            f"sensing matrix expects signals of dimension {A_prev.signal_dim}, "
            f"dictionary has {D.signal_dim}"
        )
    basis = _DesignBasis(D)
    return SensingMatrix(basis.step(A_prev.matrix, alpha, A_prev.num_measurements))


def run_wcm(D: Dictionary, M: int, config: WcmConfig) -> WcmReport:
    """Iterate exact surrogate minimization until the objective stalls.

    Starts from the closed-form baseline by default (or a random matrix when
    ``config.init == "random"``) and records the objective after every step.
    """
    M = int(M)
    if not 1 <= M < D.signal_dim:
        raise ValueError(f"M must satisfy 1 <= M < N={D.signal_dim}, got {M}")
    basis = _DesignBasis(D)
    structure = D.structure
    alpha = config.alpha

    if config.init == "ds":
        a_mat = design_ds(D, M).matrix
    else:
        rng = np.random.default_rng(config.seed)
        a_mat = rng.standard_normal((M, D.signal_dim))

    def measure(a):
        e = a @ D.matrix
        g = e.T @ e
        g = (g + g.T) / 2.0
        return g

    g = measure(a_mat)
    f = _objective(g, structure, alpha)
    trace = [f]
    components = [(_total_inter(g, structure), _total_sub(g, structure), _norm_penalty(g))]

    converged = False
    for _ in range(int(config.max_iters)):
        a_mat = basis.step(a_mat, alpha, M)
        g = measure(a_mat)
        f_new = _objective(g, structure, alpha)
        trace.append(f_new)
        components.append(
            (_total_inter(g, structure), _total_sub(g, structure), _norm_penalty(g))
        )
        if abs(f - f_new) <= config.rel_tol * (1.0 + f):
            converged = True
            f = f_new
            break
        f = f_new

    sensing = SensingMatrix(a_mat)
    final_e = EquivalentDictionary(a_mat @ D.matrix, structure)
    return WcmReport(
        sensing=sensing,
        objective_trace=np.asarray(trace),
        iterations=len(trace) - 1,
        converged=converged,
        final_report=coherence_report(final_e, alpha=alpha),
        component_trace=np.asarray(components),
    )
