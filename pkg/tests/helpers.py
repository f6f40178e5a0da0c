"""Shared generators and independent oracles for the test suite.

Oracles here are deliberately written as naive re-derivations (brute
force, direct formula transcription) so library results are checked
against a second code path, not against themselves.
"""

from __future__ import annotations

import math
import random

from phaseforge import FrameTrack, PredictionLog, load_fixture

CHOLEC = load_fixture("cholec_taxonomy")
GASTRECTOMY = load_fixture("gastrectomy_taxonomy")


def random_labels(rng: random.Random, n: int, taxonomy, run_bias: float = 0.9):
    """Random label sequence with runs (stay probability run_bias)."""
    ids = sorted(taxonomy.ids)
    labels = [rng.choice(ids)]
    for _ in range(n - 1):
        if rng.random() < run_bias:
            labels.append(labels[-1])
        else:
            labels.append(rng.choice(ids))
    return tuple(labels)


def random_track(
    rng: random.Random,
    n: int,
    taxonomy,
    case_id: str = "case",
    annotator_id: str = "ann",
    run_bias: float = 0.9,
) -> FrameTrack:
    return FrameTrack(
        case_id=case_id,
        annotator_id=annotator_id,
        labels=random_labels(rng, n, taxonomy, run_bias),
    )


def perturbed_copy(
    rng: random.Random,
    track: FrameTrack,
    taxonomy,
    flip_rate: float,
    annotator_id: str,
) -> FrameTrack:
    """Same track with a fraction of frames relabeled (may pick the same
    label again, so the realized disagreement rate is a bit lower)."""
    ids = sorted(taxonomy.ids)
    labels = list(track.labels)
    for k in range(len(labels)):
        if rng.random() < flip_rate:
            labels[k] = rng.choice(ids)
    return FrameTrack(
        case_id=track.case_id,
        annotator_id=annotator_id,
        labels=tuple(labels),
    )


def random_log(
    rng: random.Random,
    n: int,
    c: int,
    case_id: str = "case",
    frame_offset: int = 0,
    normalized: bool = False,
    tie_rate: float = 0.0,
) -> PredictionLog:
    """Random confidences; tie_rate injects duplicate values inside a row
    to exercise tie-breaking."""
    rows = []
    for _ in range(n):
        row = [rng.random() for _ in range(c)]
        if tie_rate and rng.random() < tie_rate and c >= 2:
            i, j = rng.sample(range(c), 2)
            row[j] = row[i]
        if normalized:
            s = sum(row)
            row = [v / s for v in row]
        rows.append(tuple(row))
    return PredictionLog(
        case_id=case_id,
        rows=tuple(rows),
        frame_offset=frame_offset,
        normalized=normalized,
    )


# --- oracles ---------------------------------------------------------------


def oracle_ap(confidences, truth_labels, phase: int):
    """Rank-enumeration AP: sort frames by confidence descending, frame
    index ascending; precision at each positive rank, averaged."""
    order = sorted(
        range(len(confidences)),
        key=lambda k: (-confidences[k], k),
    )
    hits = 0
    total = 0.0
    for rank, k in enumerate(order, start=1):
        if truth_labels[k] == phase:
            hits += 1
            total += hits / rank
    if hits == 0:
        return None
    return total / hits


def oracle_cross_entropy(rows, truth_cols, clamp: float = 1e-12) -> float:
    total = 0.0
    for row, col in zip(rows, truth_cols):
        total += -math.log(max(row[col], clamp))
    return total / len(rows)


def oracle_disagreement_frames(tracks) -> set[int]:
    """Frames where not all tracks agree."""
    out = set()
    for k in range(len(tracks[0].labels)):
        values = {t.labels[k] for t in tracks}
        if len(values) > 1:
            out.add(k)
    return out


def oracle_argmax_first(row) -> int:
    best = row[0]
    best_j = 0
    for j in range(1, len(row)):
        if row[j] > best:
            best = row[j]
            best_j = j
    return best_j


def oracle_split_score(cases, test_id_sets, covariates) -> float:
    """Balance score recomputed from scratch: mean-impute missing values,
    then max over covariates of fold-test-mean range over cohort range."""
    columns = {}
    for name in covariates:
        raw = []
        for c in cases:
            if hasattr(c, name):
                raw.append(getattr(c, name))
            else:
                raw.append(c.extra.get(name))
        present = [v for v in raw if v is not None]
        mean = sum(present) / len(present) if present else 0.0
        columns[name] = [mean if v is None else float(v) for v in raw]
    by_id = {c.case_id: i for i, c in enumerate(cases)}
    worst = 0.0
    for name, vals in columns.items():
        span = max(vals) - min(vals)
        if span == 0:
            continue
        fold_means = [
            sum(vals[by_id[cid]] for cid in ids) / len(ids)
            for ids in test_id_sets
        ]
        spread = (max(fold_means) - min(fold_means)) / span
        worst = max(worst, spread)
    return worst
