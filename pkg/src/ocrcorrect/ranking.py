"""Candidate ranking with a boosted regression model.

Training rows are candidates labeled 1 (the intended word) or 0.  Positive
rows are weighted by the negative/positive count ratio so both classes
carry equal total weight.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .boosting import AdaBoostR2
from .errors import ModelFormatError, TrainingDataError, UsageError
from .features import Candidate, FeatureVector, ScoringResources, candidates_for, score_matrix, top_k_pool

FORMAT_VERSION = 1
DEFAULT_GRID = {"n_stages": (25, 50, 100), "max_depth": (2, 3, 4)}


@dataclass
class LabeledError:
    """A detected error together with the word it should become."""

    error: object
    intended: str
    category: str = "bounded"
    error_id: int = 0


@dataclass(frozen=True)
class Hyperparameters:
    n_stages: int = 50
    max_depth: int = 3
    min_samples_leaf: int = 2


def candidate_pool(error, resources: ScoringResources, top_k: int = 10):
    """Candidates of ``error`` restricted to the union of per-feature top-k.

    Returns (terms, feature matrix) in candidate-set order.
    """
    cands = candidates_for(error.surface, resources)
    mat = score_matrix(error, cands, resources)
    terms = cands.terms
    pool = top_k_pool(terms, mat, top_k)
    keep = [i for i, t in enumerate(terms) if t in pool]
    return [terms[i] for i in keep], mat[keep]


@dataclass
class TrainingSet:
    X: np.ndarray
    y: np.ndarray
    weights: np.ndarray
    groups: np.ndarray
    terms: list
    feature_names: tuple
    errors: list = field(default_factory=list)

    @property
    def n_positive(self):
        return int((self.y == 1).sum())

    @property
    def n_negative(self):
        return int((self.y == 0).sum())

    def __len__(self):
        return len(self.y)

    def subset(self, error_ids) -> "TrainingSet":
        """Rows of the given errors, with imbalance weights recomputed."""
        ids = set(error_ids)
        mask = np.array([g in ids for g in self.groups], dtype=bool)
        try:
            weights = imbalance_weights(self.y[mask])
        except TrainingDataError:
            # single-class subsets only occur on validation folds, where weights are unused
            weights = np.ones(int(mask.sum()))
        return TrainingSet(self.X[mask], self.y[mask], weights,
                           self.groups[mask], [t for t, m in zip(self.terms, mask) if m],
                           self.feature_names, [e for e in self.errors if e.error_id in ids])


def imbalance_weights(y) -> np.ndarray:
    """1.0 for label-0 rows, (#label-0 / #label-1) for label-1 rows."""
    y = np.asarray(y)
    pos = int((y == 1).sum())
    neg = int((y == 0).sum())
    if pos == 0 or neg == 0:
        raise TrainingDataError(f"training data needs both labels (positives={pos}, negatives={neg})")
    return np.where(y == 1, neg / pos, 1.0)


def build_training_set(labeled: Sequence[LabeledError], resources: ScoringResources,
                       top_k: int = 10) -> TrainingSet:
    """Score the top-k candidate pool of each error and label it.

    Errors whose intended word is missing from their pool are dropped.
    """
    X, y, groups, terms, kept = [], [], [], [], []
    for item in labeled:
        pool_terms, mat = candidate_pool(item.error, resources, top_k)
        if item.intended not in pool_terms:
            continue
        kept.append(item)
        for t, row in zip(pool_terms, mat):
            X.append(row)
            y.append(1.0 if t == item.intended else 0.0)
            groups.append(item.error_id)
            terms.append(t)
    if not any(v == 1.0 for v in y):
        raise TrainingDataError("no error has its intended word among its candidates")
    y = np.array(y)
    nf = len(resources.feature_names)
    return TrainingSet(np.array(X, dtype=np.float64).reshape(len(y), nf), y,
                       imbalance_weights(y), np.array(groups), terms,
                       resources.feature_names, kept)


@dataclass
class RankingModel:
    booster: AdaBoostR2
    feature_order: tuple
    hyperparameters: Hyperparameters
    seed: int = 0
    format_version: int = FORMAT_VERSION

    def to_dict(self):
        return {
            "format_version": self.format_version,
            "feature_order": list(self.feature_order),
            "hyperparameters": asdict(self.hyperparameters),
            "loss": "linear",
            "seed": self.seed,
            "booster": self.booster.to_dict(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def from_dict(cls, data):
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format_version {version!r}, expected {FORMAT_VERSION}")
        try:
            hyper = Hyperparameters(**data["hyperparameters"])
            return cls(AdaBoostR2.from_dict(data["booster"]), tuple(data["feature_order"]),
                       hyper, int(data.get("seed", 0)))
        except (KeyError, TypeError) as exc:
            raise ModelFormatError(f"malformed model file: {exc}") from exc

    @classmethod
    def load(cls, path) -> "RankingModel":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not a model file ({exc})") from exc
        return cls.from_dict(data)


def train(data: TrainingSet, hyper: Hyperparameters = Hyperparameters(), seed: int = 0) -> RankingModel:
    """Fit AdaBoost.R2 on the weighted training rows.

    Fitting is deterministic; ``seed`` is recorded for provenance only.
    """
    if len(set(data.y.tolist())) < 2:
        raise TrainingDataError("training data needs both labels")
    booster = AdaBoostR2(hyper.n_stages, hyper.max_depth, hyper.min_samples_leaf)
    booster.fit(data.X, data.y, data.weights)
    return RankingModel(booster, tuple(data.feature_names), hyper, seed)


def predict(model: RankingModel, features) -> np.ndarray:
    """Confidence for one :class:`FeatureVector` or a row matrix."""
    if isinstance(features, FeatureVector):
        if tuple(features.names) != tuple(model.feature_order):
            raise UsageError(f"feature mismatch: model expects {list(model.feature_order)}, "
                             f"got {list(features.names)}")
        X = features.as_array()[None, :]
    else:
        X = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if X.shape[1] != len(model.feature_order):
            raise UsageError(f"feature mismatch: model expects {len(model.feature_order)} features "
                             f"{list(model.feature_order)}, got {X.shape[1]}")
    return model.booster.predict(X)


def _sort_key(conf, popularity, surface):
    return (-conf, -popularity, surface)


def _popularity_column(model, matrix):
    if "language_popularity" in model.feature_order:
        return matrix[:, model.feature_order.index("language_popularity")]
    return np.zeros(len(matrix))


def rank(model: RankingModel, candidates: Sequence[Candidate]) -> list:
    """Candidates by descending confidence.

    Ties fall back to higher language popularity, then surface order.
    """
    if not candidates:
        return []
    X = np.vstack([c.features.as_array() for c in candidates])
    conf = predict(model, X)
    pop = _popularity_column(model, X)
    for c, v in zip(candidates, conf):
        c.confidence = float(v)
    order = sorted(range(len(candidates)),
                   key=lambda i: _sort_key(conf[i], pop[i], candidates[i].surface))
    return [candidates[i] for i in order]


def rank_terms(model: RankingModel, terms: Sequence[str], matrix: np.ndarray) -> list:
    """Like :func:`rank` on a bare (terms, matrix) pair; returns (term, confidence)."""
    if len(terms) == 0:
        return []
    conf = predict(model, matrix)
    pop = _popularity_column(model, np.asarray(matrix))
    order = sorted(range(len(terms)), key=lambda i: _sort_key(conf[i], pop[i], terms[i]))
    return [(terms[i], float(conf[i])) for i in order]


def precision_at_1(model: RankingModel, data: TrainingSet) -> float:
    hits = 0
    ids = sorted(set(data.groups.tolist()))
    for g in ids:
        rows = np.flatnonzero(data.groups == g)
        ranked = rank_terms(model, [data.terms[i] for i in rows], data.X[rows])
        top = ranked[0][0]
        hits += int(any(data.terms[i] == top and data.y[i] == 1 for i in rows))
    return hits / len(ids) if ids else 0.0


@dataclass
class CrossValidationResult:
    best: Hyperparameters
    mean_scores: dict
    fold_scores: dict
    folds: list


def error_folds(error_ids, folds: int, seed: int) -> list:
    """Partition error ids into ``folds`` disjoint groups after a seeded shuffle."""
    ids = sorted(set(error_ids))
    if folds < 2:
        raise UsageError("need at least 2 folds")
    if folds > len(ids):
        raise UsageError(f"{folds} folds requested but only {len(ids)} errors")
    perm = np.random.default_rng(seed).permutation(len(ids))
    return [sorted(ids[i] for i in perm[k::folds]) for k in range(folds)]


def cross_validate(data: TrainingSet, grid: Optional[dict] = None, folds: int = 10,
                   seed: int = 0) -> CrossValidationResult:
    """Pick the grid point with the best mean validation P@1.

    Folds split by error, never by candidate row.  Ties keep the earliest
    grid point.
    """
    grid = grid or DEFAULT_GRID
    parts = error_folds(data.groups.tolist(), folds, seed)
    seen = set()
    for part in parts:
        assert seen.isdisjoint(part), "an error appears in two folds"
        seen.update(part)
    keys = sorted(grid)
    points = [Hyperparameters(**dict(zip(keys, values)))
              for values in itertools.product(*(grid[k] for k in keys))]
    mean_scores, fold_scores = {}, {}
    best, best_score = None, -1.0
    for hp in points:
        scores = []
        for k, held_out in enumerate(parts):
            train_ids = [g for j, p in enumerate(parts) if j != k for g in p]
            model = train(data.subset(train_ids), hp, seed)
            scores.append(precision_at_1(model, data.subset(held_out)))
        fold_scores[hp] = scores
        mean_scores[hp] = float(np.mean(scores))
        if mean_scores[hp] > best_score:
            best, best_score = hp, mean_scores[hp]
    return CrossValidationResult(best, mean_scores, fold_scores, parts)
