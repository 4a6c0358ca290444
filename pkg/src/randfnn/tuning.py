"""Grid search with K-fold cross-validation over node counts and the
method-specific smoothing parameter.

The validation loss is the mean absolute error in pattern space (between
predicted and true target patterns), which keeps tuning independent of
the coding variables used for decoding.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .encoding import TrainingSet
from .errors import ParameterError
from .randnn import METHODS, HyperParams, derive_rng, fit, make_layer, predict

__all__ = [
    "Grid",
    "GridPoint",
    "TuneResult",
    "default_grid",
    "kfold_split",
    "cross_validate",
    "grid_search",
    "write_tuning_csv",
]


@dataclass(frozen=True)
class Grid:
    m_values: tuple[int, ...]
    smoothing_values: tuple[float, ...]

    def __post_init__(self):
        for name, vals in (("m_values", self.m_values),
                           ("smoothing_values", self.smoothing_values)):
            if not vals:
                raise ParameterError(f"{name} is empty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ParameterError(f"{name} must be strictly increasing")


@dataclass(frozen=True)
class GridPoint:
    m: int
    smoothing: float
    mean_error: float
    std_error: float


@dataclass(frozen=True)
class TuneResult:
    best: HyperParams
    table: tuple[GridPoint, ...]
    folds: int


_M_VALUES = tuple(range(5, 55, 5))


def default_grid(method: str) -> Grid:
    """Stock search spaces per method.

    u: 0.02..0.2 step 0.02 then 0.4..1.0 step 0.2 (weight-bound methods);
    alpha_max: 2..40 step 2 then 45..90 step 5 degrees; k: 25..69 step 2.
    """
    if method in ("standard", "ram"):
        u = tuple(round(0.02 * i, 2) for i in range(1, 11)) \
            + tuple(round(0.2 + 0.2 * i, 1) for i in range(1, 5))
        return Grid(_M_VALUES, u)
    if method == "ralpham":
        alpha = tuple(float(a) for a in range(2, 41, 2)) \
            + tuple(float(a) for a in range(45, 91, 5))
        return Grid(_M_VALUES, alpha)
    if method == "ddm":
        return Grid(_M_VALUES, tuple(float(k) for k in range(25, 70, 2)))
    raise ParameterError(f"unknown method {method!r}, expected one of {METHODS}")


def kfold_split(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Shuffle 0..n-1 and partition into k folds differing in size by at most 1."""
    if k < 2:
        raise ParameterError(f"need at least 2 folds, got {k}")
    if n < k:
        raise ParameterError(f"cannot split {n} items into {k} folds")
    perm = derive_rng(seed).permutation(n)
    return list(np.array_split(perm, k))


def cross_validate(phi: TrainingSet, hp: HyperParams, k_folds: int, seed: int,
                   trials_per_fold: int = 3) -> float:
    """Mean held-out pattern-space MAE over folds.

    Each fold's error is averaged over `trials_per_fold` independently
    seeded layers, damping the variance of randomized generation. Fully
    deterministic for fixed (phi, hp, k_folds, seed).
    """
    errors = _fold_errors(phi, hp, k_folds, seed, trials_per_fold)
    return float(np.mean(errors))


def _fold_errors(phi, hp, k_folds, seed, trials_per_fold) -> np.ndarray:
    if trials_per_fold < 1:
        raise ParameterError(f"trials_per_fold must be >= 1, got {trials_per_fold}")
    folds = kfold_split(len(phi), k_folds, seed)
    fold_errors = np.empty(len(folds))
    for fold_idx, held in enumerate(folds):
        mask = np.ones(len(phi), dtype=bool)
        mask[held] = False
        phi_train = TrainingSet.from_arrays(phi.x[mask], phi.y[mask])
        trial_errors = np.empty(trials_per_fold)
        for trial in range(trials_per_fold):
            rng = derive_rng(seed, fold_idx, trial)
            model = fit(make_layer(hp, phi_train, rng), phi_train)
            pred = predict(model, phi.x[held])
            trial_errors[trial] = np.mean(np.abs(pred - phi.y[held]))
        fold_errors[fold_idx] = trial_errors.mean()
    return fold_errors


def grid_search(phi: TrainingSet, method: str, grid: Grid, k_folds: int, seed: int,
                trials_per_fold: int = 3) -> TuneResult:
    """Evaluate every (m, smoothing) gridpoint; ties prefer the simpler
    model (smaller m, then smaller smoothing value)."""
    table = []
    best = None
    best_error = np.inf
    for m in grid.m_values:
        for s in grid.smoothing_values:
            hp = HyperParams(method, m, s, seed=seed)
            fold_errors = _fold_errors(phi, hp, k_folds, seed, trials_per_fold)
            mean = float(fold_errors.mean())
            std = float(fold_errors.std(ddof=1)) if fold_errors.size > 1 else 0.0
            table.append(GridPoint(m, s, mean, std))
            if mean < best_error:  # strict: earlier (simpler) point wins ties
                best_error = mean
                best = hp
    return TuneResult(best=best, table=tuple(table), folds=k_folds)


def write_tuning_csv(result: TuneResult, target, context: dict | None = None) -> None:
    """One row per gridpoint: optional context columns, m, smoothing,
    mean and std of the validation error."""
    context = context or {}

    def _write(fh):
        writer = csv.writer(fh)
        writer.writerow(list(context) + ["m", "smoothing", "mean_error", "std_error"])
        ctx = [str(v) for v in context.values()]
        for p in result.table:
            writer.writerow(ctx + [p.m, repr(p.smoothing),
                                   repr(p.mean_error), repr(p.std_error)])

    if hasattr(target, "write"):
        _write(target)
    else:
        with open(target, "w", newline="") as fh:
            _write(fh)
