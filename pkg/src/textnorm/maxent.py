"""Maximum-entropy ranking: sparse design matrices and batch training.

Each training example is a candidate list with a boolean "good" mask.  The
objective is the log-probability of the good subset,

    L(w) = sum_i log( sum_{good j} exp s_ij / sum_j exp s_ij ),

with scores ``s = X w + offset`` and an L2 penalty ``l2 * ||w||^2`` on the
penalized coordinates.  Training is gradient ascent with Barzilai-Borwein
initial steps and Armijo backtracking, so accepted steps never decrease the
objective.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._accel import maxent_objective

log = logging.getLogger(__name__)

FeatureVector = Mapping[str, float]


class DegenerateTrainingError(ValueError):
    """Every example has all candidates good, so the objective is constant."""


class FeatureIndex:
    """Feature name <-> column id, in first-seen order."""

    def __init__(self, names: Sequence[str] = ()):
        self.names: list[str] = []
        self.ids: dict[str, int] = {}
        for n in names:
            self.add(n)

    def add(self, name: str) -> int:
        i = self.ids.get(name)
        if i is None:
            i = self.ids[name] = len(self.names)
            self.names.append(name)
        return i

    def __len__(self) -> int:
        return len(self.names)


@dataclass
class RankingExample:
    features: list[FeatureVector]
    good: list[bool]
    offsets: list[float] | None = None


@dataclass
class RankingProblem:
    index: FeatureIndex
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    row_ids: np.ndarray
    group_ptr: np.ndarray
    group_ids: np.ndarray
    good: np.ndarray
    offsets: np.ndarray

    @property
    def n_features(self) -> int:
        return len(self.index)

    @property
    def n_examples(self) -> int:
        return len(self.group_ptr) - 1

    def loglik(self, w: np.ndarray) -> tuple[float, np.ndarray]:
        return maxent_objective(w, self.offsets, self.indptr, self.indices, self.data,
                                self.row_ids, self.group_ptr, self.group_ids, self.good)


def build_problem(examples: Sequence[RankingExample], index: FeatureIndex | None = None) -> RankingProblem:
    index = index if index is not None else FeatureIndex()
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    group_ptr = [0]
    good: list[float] = []
    offsets: list[float] = []
    for ex in examples:
        if len(ex.features) != len(ex.good):
            raise ValueError("features and good mask differ in length")
        if not any(ex.good):
            raise ValueError("example has an empty good set")
        for k, fv in enumerate(ex.features):
            for name in sorted(fv):
                v = fv[name]
                if v:
                    indices.append(index.add(name))
                    data.append(float(v))
            indptr.append(len(indices))
            good.append(1.0 if ex.good[k] else 0.0)
            offsets.append(ex.offsets[k] if ex.offsets is not None else 0.0)
        group_ptr.append(len(good))
    indptr_a = np.asarray(indptr, dtype=np.int64)
    group_ptr_a = np.asarray(group_ptr, dtype=np.int64)
    return RankingProblem(
        index=index,
        indptr=indptr_a,
        indices=np.asarray(indices, dtype=np.int64),
        data=np.asarray(data, dtype=np.float64),
        row_ids=np.repeat(np.arange(len(good), dtype=np.int64), np.diff(indptr_a)),
        group_ptr=group_ptr_a,
        group_ids=np.repeat(np.arange(len(group_ptr) - 1, dtype=np.int64), np.diff(group_ptr_a)),
        good=np.asarray(good, dtype=np.float64),
        offsets=np.asarray(offsets, dtype=np.float64),
    )


@dataclass
class TrainResult:
    weights: np.ndarray
    objective: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)


def regularized(problem: RankingProblem, w: np.ndarray, l2: float,
                penalized: np.ndarray | None = None, frozen: np.ndarray | None = None):
    """Objective ``L(w) - l2 * ||w_penalized||^2`` and its gradient.

    Gradient entries of ``frozen`` coordinates are zeroed.
    """
    obj, grad = problem.loglik(w)
    pw = w if penalized is None else w * penalized
    obj -= l2 * float(pw @ pw)
    grad = grad - 2.0 * l2 * pw
    if frozen is not None:
        grad = np.where(frozen, 0.0, grad)
    return obj, grad


def train(
    problem: RankingProblem,
    l2: float = 0.0,
    max_iter: int = 200,
    tol: float = 1e-5,
    init: np.ndarray | None = None,
    penalized: np.ndarray | None = None,
    frozen: np.ndarray | None = None,
) -> TrainResult:
    if problem.n_examples and np.all(_all_good(problem)):
        raise DegenerateTrainingError("every example has all candidates good; nothing to learn")
    w = np.zeros(problem.n_features) if init is None else np.array(init, dtype=np.float64)
    f, g = regularized(problem, w, l2, penalized, frozen)
    history = [f]
    step = 1.0 / max(1.0, float(np.max(np.abs(g))) if g.size else 1.0)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        gmax = float(np.max(np.abs(g))) if g.size else 0.0
        if gmax < tol:
            converged = True
            it -= 1
            break
        gg = float(g @ g)
        t = step
        while True:
            w_new = w + t * g
            f_new, g_new = regularized(problem, w_new, l2, penalized, frozen)
            if np.isfinite(f_new) and f_new >= f + 1e-4 * t * gg:
                break
            t *= 0.5
            if t < 1e-16:
                break
        if not (np.isfinite(f_new) and f_new >= f):
            log.debug("line search stalled at iteration %d", it)
            break
        s = w_new - w
        y = g_new - g
        sy = float(s @ y)
        step = float(s @ s) / -sy if sy < 0 else 2.0 * t
        w, f, g = w_new, f_new, g_new
        history.append(f)
    else:
        converged = float(np.max(np.abs(g))) < tol if g.size else True
    return TrainResult(w, f, it, converged, history)


def _all_good(problem: RankingProblem) -> np.ndarray:
    n_good = np.bincount(problem.group_ids, weights=problem.good, minlength=problem.n_examples)
    sizes = np.diff(problem.group_ptr)
    return n_good == sizes


def dot(weights: Mapping[str, float], fv: FeatureVector) -> float:
    return float(sum(weights.get(k, 0.0) * v for k, v in fv.items()))
