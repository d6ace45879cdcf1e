"""Experiment harness: dictionary generation, block-sparse signal synthesis,
designer comparison sweeps, recovery metrics, and CSV/JSON emission.

Every quantity is derived from ``(seed, trial)`` through independent
`numpy.random.default_rng` streams, so sweeps are fully deterministic no
matter how trials are scheduled: the same config and seed produce
byte-identical CSV output, with or without the process pool.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bomp import BompConfig, bomp_decode_batch
from .coherence import _objective, _total_inter, _total_sub
from .ds import design_ds
from .model import BlockStructure, Dictionary, EquivalentDictionary
from .wcm import WcmConfig, run_wcm

DICT_FAMILIES = ("gaussian", "dct_rows")
DESIGNERS = ("random", "ds", "wcm")

# Named scale presets for sweep configs: the full protocol and a desk-scale
# variant for quick runs.
PRESETS = {
    "full": {"L": 1000, "trials": 100},
    "desk": {"L": 200, "trials": 20},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep description.

    ``block_sizes`` is either one integer (fixed size, must divide K) or an
    explicit list of sizes summing to K. ``designers`` are evaluated in the
    given order; the "wcm" designer expands over ``alpha_grid``.
    """

    dict_family: str = "gaussian"
    N: int = 60
    K: int = 120
    M: int = 14
    block_sizes: int | tuple[int, ...] = 3
    k: int = 2
    L: int = 1000
    trials: int = 100
    alpha_grid: tuple[float, ...] = (0.5,)
    seed: int = 0
    designers: tuple[str, ...] = ("random", "ds", "wcm")

    def __post_init__(self):
        if self.dict_family not in DICT_FAMILIES:
            raise ValueError(f"dict_family must be one of {DICT_FAMILIES}")
        if not (self.M < self.N <= self.K):
            raise ValueError(f"need M < N <= K, got M={self.M}, N={self.N}, K={self.K}")
        if self.L < 1 or self.trials < 1:
            raise ValueError("L and trials must be >= 1")
        if isinstance(self.block_sizes, int):
            object.__setattr__(self, "block_sizes", int(self.block_sizes))
        else:
            object.__setattr__(self, "block_sizes", tuple(int(s) for s in self.block_sizes))
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        designers = tuple(self.designers)
        for d in designers:
            if d not in DESIGNERS:
                raise ValueError(f"unknown designer {d!r}, expected subset of {DESIGNERS}")
        if not designers:
            raise ValueError("at least one designer is required")
        object.__setattr__(self, "designers", designers)
        if "wcm" in designers and not self.alpha_grid:
            raise ValueError("the wcm designer needs a non-empty alpha_grid")
        structure = self.structure()
        if self.k > structure.num_blocks:
            raise ValueError(
                f"k={self.k} exceeds the number of blocks {structure.num_blocks}"
            )

    def structure(self) -> BlockStructure:
        if isinstance(self.block_sizes, int):
            s = self.block_sizes
            if s < 1 or self.K % s != 0:
                raise ValueError(f"fixed block size {s} must divide K={self.K}")
            return BlockStructure((s,) * (self.K // s))
        sizes = BlockStructure(self.block_sizes)
        if sizes.num_columns != self.K:
            raise ValueError(
                f"block sizes sum to {sizes.num_columns}, expected K={self.K}"
            )
        return sizes


@dataclass(frozen=True)
class TrialResult:
    """Metrics of one (trial, designer, alpha) cell: normalized representation
    error ``e``, classification rate ``r``, the sub/inter total-coherence
    ratio of the designed equivalent dictionary, and its weighted objective."""

    trial: int
    designer: str
    alpha: float | None
    e: float
    r: float
    ratio_nu_mu: float
    objective: float


@dataclass(frozen=True)
class SweepSummary:
    designer: str
    alpha: float | None
    n: int
    e_mean: float
    e_std: float
    r_mean: float
    r_std: float
    ratio_mean: float
    ratio_std: float
    objective_mean: float
    objective_std: float


@dataclass(frozen=True)
class SweepResult:
    trials: tuple[TrialResult, ...]
    summary: tuple[SweepSummary, ...]


def dct_matrix(K: int) -> np.ndarray:
    """Orthonormal K x K type-II discrete cosine transform matrix."""
    K = int(K)
    n = np.arange(K)
    c = np.cos(np.pi * np.outer(n, 2 * n + 1) / (2.0 * K)) * np.sqrt(2.0 / K)
    c[0] /= np.sqrt(2.0)
    return c


def generate_dictionary(cfg: ExperimentConfig, rng: np.random.Generator) -> Dictionary:
    """Draw one dictionary of the configured family with unit-norm columns.

    gaussian: i.i.d. standard normal entries. dct_rows: N distinct rows of
    the K x K orthonormal DCT matrix, drawn uniformly without replacement.
    """
    if cfg.dict_family == "gaussian":
        mat = rng.standard_normal((cfg.N, cfg.K))
    else:
        rows = rng.choice(cfg.K, size=cfg.N, replace=False)
        mat = dct_matrix(cfg.K)[rows]
    mat = mat / np.linalg.norm(mat, axis=0)
    return Dictionary(mat, cfg.structure())


def generate_signals(
    D: Dictionary, k: int, L: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Synthesize L signals with exactly k active blocks each.

    Active blocks are chosen uniformly without replacement and their
    coefficients drawn i.i.d. uniform on [-1, 1]. Returns (X, Theta) with
    X = D @ Theta.
    """
    k = int(k)
    structure = D.structure
    if k > structure.num_blocks:
        raise ValueError(f"k={k} exceeds the number of blocks {structure.num_blocks}")
    theta = np.zeros((D.num_atoms, int(L)))
    for sig in range(int(L)):
        blocks = rng.choice(structure.num_blocks, size=k, replace=False)
        for j in blocks:
            sl = structure.block_slice(int(j))
            theta[sl, sig] = rng.uniform(-1.0, 1.0, size=sl.stop - sl.start)
    return D.matrix @ theta, theta


def classification_rate(theta_hat: np.ndarray, theta: np.ndarray) -> float:
    """Fraction of the true nonzero coefficient positions that the estimate
    also marks nonzero. Equals 1 exactly when every generating block was
    recognized with fully dense coefficients."""
    theta_hat = np.asarray(theta_hat)
    theta = np.asarray(theta)
    if theta_hat.shape != theta.shape:
        raise ValueError(f"shape mismatch: {theta_hat.shape} vs {theta.shape}")
    true_nonzero = np.count_nonzero(theta)
    if true_nonzero == 0:
        raise ValueError("reference coefficients are identically zero")
    hits = np.count_nonzero((theta_hat != 0) & (theta != 0))
    return hits / true_nonzero


def representation_error(X: np.ndarray, D, theta_hat: np.ndarray) -> float:
    """Normalized reconstruction error ||X - D theta_hat||_F / ||X||_F."""
    x = np.asarray(X, dtype=float)
    d_mat = D.matrix if isinstance(D, Dictionary) else np.asarray(D, dtype=float)
    denom = float(np.linalg.norm(x))
    if denom == 0.0:
        raise ValueError("signals are identically zero")
    return float(np.linalg.norm(x - d_mat @ np.asarray(theta_hat, dtype=float))) / denom


def _evaluate(cfg, trial, designer, alpha, a_mat, D, X, theta) -> TrialResult:
    E = EquivalentDictionary(a_mat @ D.matrix, D.structure)
    Y = a_mat @ X
    theta_hat = bomp_decode_batch(E, Y, BompConfig(k_blocks=cfg.k))
    g = E.matrix.T @ E.matrix
    inter = _total_inter(g, D.structure)
    sub = _total_sub(g, D.structure)
    ratio = sub / inter if inter > 0.0 else float("inf")
    # Baselines without an alpha of their own are scored at the neutral 0.5.
    objective = _objective(g, D.structure, 0.5 if alpha is None else alpha)
    return TrialResult(
        trial=trial,
        designer=designer,
        alpha=alpha,
        e=representation_error(X, D, theta_hat),
        r=classification_rate(theta_hat, theta),
        ratio_nu_mu=ratio,
        objective=objective,
    )


def run_trial(cfg: ExperimentConfig, trial: int) -> list[TrialResult]:
    """Run one trial: draw data, design with every configured method, decode,
    and score. Deterministic in (cfg.seed, trial)."""
    rng = np.random.default_rng([cfg.seed, trial])
    D = generate_dictionary(cfg, rng)
    X, theta = generate_signals(D, cfg.k, cfg.L, rng)
    rows = []
    for designer in cfg.designers:
        if designer == "random":
            # stream keyed off the trial stream so designer order cannot matter
            rng_a = np.random.default_rng([cfg.seed, trial, 7919])
            a_mat = rng_a.standard_normal((cfg.M, cfg.N))
            rows.append(_evaluate(cfg, trial, designer, None, a_mat, D, X, theta))
        elif designer == "ds":
            a_mat = design_ds(D, cfg.M).matrix
            rows.append(_evaluate(cfg, trial, designer, None, a_mat, D, X, theta))
        else:
            for alpha in cfg.alpha_grid:
                report = run_wcm(D, cfg.M, WcmConfig(alpha=alpha))
                rows.append(
                    _evaluate(cfg, trial, designer, alpha, report.sensing.matrix, D, X, theta)
                )
    return rows


def _grid(cfg: ExperimentConfig) -> list[tuple[str, float | None]]:
    cells: list[tuple[str, float | None]] = []
    for designer in cfg.designers:
        if designer == "wcm":
            cells.extend(("wcm", alpha) for alpha in cfg.alpha_grid)
        else:
            cells.append((designer, None))
    return cells


def _summarize(cfg: ExperimentConfig, rows: Sequence[TrialResult]) -> tuple[SweepSummary, ...]:
    def stats(values):
        arr = np.asarray(values, dtype=float)
        mean = float(arr.mean())
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        return mean, std

    out = []
    for designer, alpha in _grid(cfg):
        cell = [t for t in rows if t.designer == designer and t.alpha == alpha]
        e_mean, e_std = stats([t.e for t in cell])
        r_mean, r_std = stats([t.r for t in cell])
        ratio_mean, ratio_std = stats([t.ratio_nu_mu for t in cell])
        obj_mean, obj_std = stats([t.objective for t in cell])
        out.append(
            SweepSummary(
                designer=designer,
                alpha=alpha,
                n=len(cell),
                e_mean=e_mean,
                e_std=e_std,
                r_mean=r_mean,
                r_std=r_std,
                ratio_mean=ratio_mean,
                ratio_std=ratio_std,
                objective_mean=obj_mean,
                objective_std=obj_std,
            )
        )
    return tuple(out)


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Run every trial of the sweep and aggregate per grid point.

    Parameters
    ----------
    cfg : ExperimentConfig
        Sweep description.
    workers : int
        Size of the process pool; 1 runs trials inline. Results are identical
        either way because each trial owns its own seeded generator and rows
        are assembled in trial order.
    """
    if workers <= 1:
        per_trial = [run_trial(cfg, t) for t in range(cfg.trials)]
    else:
        per_trial = [None] * cfg.trials
        with ProcessPoolExecutor(max_workers=int(workers)) as pool:
            futures = {pool.submit(run_trial, cfg, t): t for t in range(cfg.trials)}
            for future, t in futures.items():
                per_trial[t] = future.result()
    rows = tuple(row for trial_rows in per_trial for row in trial_rows)
    return SweepResult(trials=rows, summary=_summarize(cfg, rows))


def run_histogram(
    D: Dictionary,
    M: int,
    alpha: float,
    replicates: int,
    rng: np.random.Generator,
    max_iters: int = 1000,
    rel_tol: float = 1e-10,
) -> np.ndarray:
    """Converged objective values of repeated randomly-initialized runs.

    The spread of the returned values indicates whether distinct local optima
    were reached from different starts.
    """
    finals = np.empty(int(replicates))
    for i in range(int(replicates)):
        seed = int(rng.integers(0, 2**63 - 1))
        report = run_wcm(
            D,
            M,
            WcmConfig(alpha=alpha, init="random", seed=seed, max_iters=max_iters, rel_tol=rel_tol),
        )
        finals[i] = report.objective_trace[-1]
    return finals


def _fmt(value) -> str:
    if value is None:
        return ""
    return "%.17g" % value


def write_sweep_outputs(result: SweepResult, cfg: ExperimentConfig, out_dir) -> None:
    """Emit results.csv (per-trial rows), summary.csv (per grid point), and
    config.echo.json into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)

    lines = ["trial,designer,alpha,e,r,ratio_nu_mu,objective"]
    for t in result.trials:
        lines.append(
            ",".join(
                [
                    str(t.trial),
                    t.designer,
                    _fmt(t.alpha),
                    _fmt(t.e),
                    _fmt(t.r),
                    _fmt(t.ratio_nu_mu),
                    _fmt(t.objective),
                ]
            )
        )
    with open(os.path.join(out_dir, "results.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    lines = [
        "designer,alpha,n,e_mean,e_std,r_mean,r_std,ratio_nu_mu_mean,ratio_nu_mu_std,"
        "objective_mean,objective_std"
    ]
    for s in result.summary:
        lines.append(
            ",".join(
                [
                    s.designer,
                    _fmt(s.alpha),
                    str(s.n),
                    _fmt(s.e_mean),
                    _fmt(s.e_std),
                    _fmt(s.r_mean),
                    _fmt(s.r_std),
                    _fmt(s.ratio_mean),
                    _fmt(s.ratio_std),
                    _fmt(s.objective_mean),
                    _fmt(s.objective_std),
                ]
            )
        )
    with open(os.path.join(out_dir, "summary.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    echo = {
        "dict_family": cfg.dict_family,
        "N": cfg.N,
        "K": cfg.K,
        "M": cfg.M,
        "block_sizes": cfg.block_sizes if isinstance(cfg.block_sizes, int) else list(cfg.block_sizes),
        "k": cfg.k,
        "L": cfg.L,
        "trials": cfg.trials,
        "alpha_grid": list(cfg.alpha_grid),
        "seed": cfg.seed,
        "designers": list(cfg.designers),
    }
    with open(os.path.join(out_dir, "config.echo.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(echo, fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_from_dict(payload: dict, preset: str | None = None) -> ExperimentConfig:
    """Build a config from parsed JSON, optionally filling scale defaults
    from a named preset before the explicit values are applied."""
    merged: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}, expected one of {tuple(PRESETS)}")
        merged.update(PRESETS[preset])
    known = set(ExperimentConfig.__dataclass_fields__)
    for key, value in payload.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        merged[key] = value
    if "block_sizes" in merged and isinstance(merged["block_sizes"], list):
        merged["block_sizes"] = tuple(merged["block_sizes"])
    if "alpha_grid" in merged:
        merged["alpha_grid"] = tuple(merged["alpha_grid"])
    if "designers" in merged:
        merged["designers"] = tuple(merged["designers"])
    return ExperimentConfig(**merged)
