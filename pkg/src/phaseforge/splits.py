"""Stratified cross-validation planning over case metadata.

Test sets are balanced on numeric covariates (age, operation time, blood
loss, BMI, or any ``extra`` field) with a seeded random initialization
followed by greedy pairwise swaps. The balance score is the worst
covariate's spread: range of per-fold test-set means, normalized by the
cohort-wide range of that covariate so differently scaled covariates are
comparable. Lower is better; zero means every fold's test set has the
same mean on every covariate.

Two fold geometries are supported: exhaustive (fold_count x test_size =
case count; test sets partition the cohort, matching a 24-case 6x4
regime) and independent (each fold draws its own test set, matching a
40-case 3x5 regime).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import TooFewCases, UnknownCovariate

DEFAULT_COVARIATES = ("age", "operation_minutes", "bleeding_ml", "bmi")

RECORDING_SYSTEMS = ("si", "xi", "other")

GREEDY_RESTARTS = 8


@dataclass(frozen=True)
class CaseMetadata:
    """Per-case covariates used for split balancing.

    Missing numeric fields (None) are mean-imputed within the cohort
    before scoring. ``extra`` holds arbitrary additional numeric
    covariates addressable by name.
    """

    case_id: str
    age: float | None = None
    operation_minutes: float | None = None
    bleeding_ml: float | None = None
    bmi: float | None = None
    recording_system: str = "other"
    extra: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.recording_system not in RECORDING_SYSTEMS:
            raise ValueError(f"recording_system must be one of {RECORDING_SYSTEMS}")
        for name in ("age", "operation_minutes", "bleeding_ml", "bmi"):
            v = getattr(self, name)
            if v is not None and (not math.isfinite(v) or v < 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        for name, v in self.extra.items():
            if not math.isfinite(v):
                raise ValueError(f"extra covariate {name!r} is not finite")

    def covariate(self, name: str) -> float | None:
        if name in ("age", "operation_minutes", "bleeding_ml", "bmi"):
            return getattr(self, name)
        if name in self.extra:
            return self.extra[name]
        raise UnknownCovariate(name)


@dataclass(frozen=True)
class Fold:
    name: str
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


@dataclass(frozen=True)
class SplitPlan:
    folds: tuple[Fold, ...]
    balance_score: float
    covariates: tuple[str, ...]
    seed: int
    exhaustive: bool
    imputed: dict[str, float] = field(default_factory=dict)


def _impute(cases, covariates) -> tuple[dict[str, list[float]], dict[str, float]]:
    """Column values per covariate with cohort-mean imputation; raises
    UnknownCovariate for a name no case carries at all."""
    columns: dict[str, list[float]] = {}
    means: dict[str, float] = {}
    for name in covariates:
        if name in DEFAULT_COVARIATES:
            raw = [getattr(c, name) for c in cases]
        else:
            if not any(name in c.extra for c in cases):
                raise UnknownCovariate(name)
            raw = [c.extra.get(name) for c in cases]
        present = [v for v in raw if v is not None]
        mean = sum(present) / len(present) if present else 0.0
        means[name] = mean
        columns[name] = [mean if v is None else float(v) for v in raw]
    return columns, means


def _score(test_index_sets, columns, spans) -> float:
    """Max over covariates of (range of per-fold test means) / cohort span."""
    worst = 0.0
    for name, values in columns.items():
        span = spans[name]
        if span == 0:
            continue
        fold_means = []
        for idx in test_index_sets:
            fold_means.append(sum(values[i] for i in idx) / len(idx))
        spread = (max(fold_means) - min(fold_means)) / span
        if spread > worst:
            worst = spread
    return worst


def stratified_splits(
    cases: list[CaseMetadata],
    fold_count: int,
    test_size: int,
    covariates: tuple[str, ...] = DEFAULT_COVARIATES,
    seed: int = 0,
) -> SplitPlan:
    """Plan fold_count train/test splits with test sets of test_size,
    balancing the named covariates.

    Deterministic for a given (cases, parameters, seed). Runs several
    seeded greedy descents (random start, steepest accepted swap until no
    swap improves) and keeps the best. In exhaustive mode the test sets
    partition the cohort; otherwise each fold samples independently.
    """
    if fold_count < 1:
        raise ValueError("fold_count must be >= 1")
    if test_size < 1:
        raise ValueError("test_size must be >= 1")
    ids = [c.case_id for c in cases]
    if len(set(ids)) != len(ids):
        raise ValueError("case ids must be unique")
    n = len(cases)
    if test_size >= n:
        raise TooFewCases(f"test_size {test_size} needs more than {n} cases")
    exhaustive = fold_count * test_size == n

    columns, means = _impute(cases, covariates)
    spans = {
        name: max(vals) - min(vals) if vals else 0.0
        for name, vals in columns.items()
    }

    best_sets = None
    best_score = math.inf
    for restart in range(GREEDY_RESTARTS):
        rng = random.Random(seed * 1_000_003 + restart)
        sets = _initial_assignment(n, fold_count, test_size, exhaustive, rng)
        score = _greedy_refine(sets, columns, spans, n, exhaustive)
        if score < best_score:
            best_score = score
            best_sets = sets
    folds = []
    all_ids = set(range(n))
    for f, test_idx in enumerate(best_sets):
        test = sorted(test_idx)
        train = sorted(all_ids - set(test))
        folds.append(Fold(
            name=f"Split{f + 1}",
            train_ids=tuple(ids[i] for i in train),
            test_ids=tuple(ids[i] for i in test),
        ))
    return SplitPlan(
        folds=tuple(folds),
        balance_score=best_score,
        covariates=tuple(covariates),
        seed=seed,
        exhaustive=exhaustive,
        imputed=means,
    )


def _initial_assignment(n, fold_count, test_size, exhaustive, rng):
    if exhaustive:
        order = list(range(n))
        rng.shuffle(order)
        return [set(order[f * test_size:(f + 1) * test_size]) for f in range(fold_count)]
    return [set(rng.sample(range(n), test_size)) for _ in range(fold_count)]


def _greedy_refine(sets, columns, spans, n, exhaustive) -> float:
    """Steepest-descent swap refinement; mutates ``sets`` in place and
    returns the final score. Every accepted swap strictly decreases the
    score, so termination is guaranteed."""
    score = _score(sets, columns, spans)
    improved = True
    while improved:
        improved = False
        best_move = None
        best_score = score
        if exhaustive:
            # exchange two cases between different folds' test sets
            for a in range(len(sets)):
                for b in range(a + 1, len(sets)):
                    for ca in sorted(sets[a]):
                        for cb in sorted(sets[b]):
                            sets[a].remove(ca); sets[a].add(cb)
                            sets[b].remove(cb); sets[b].add(ca)
                            s = _score(sets, columns, spans)
                            sets[a].remove(cb); sets[a].add(ca)
                            sets[b].remove(ca); sets[b].add(cb)
                            if s < best_score:
                                best_score = s
                                best_move = (a, b, ca, cb)
        else:
            # replace a test case with a train case within one fold
            for f in range(len(sets)):
                complement = sorted(set(range(n)) - sets[f])
                for ct in sorted(sets[f]):
                    for cn in complement:
                        sets[f].remove(ct); sets[f].add(cn)
                        s = _score(sets, columns, spans)
                        sets[f].remove(cn); sets[f].add(ct)
                        if s < best_score:
                            best_score = s
                            best_move = (f, ct, cn)
        if best_move is not None and best_score < score:
            if exhaustive:
                a, b, ca, cb = best_move
                sets[a].remove(ca); sets[a].add(cb)
                sets[b].remove(cb); sets[b].add(ca)
            else:
                f, ct, cn = best_move
                sets[f].remove(ct); sets[f].add(cn)
            score = best_score
            improved = True
    return score
