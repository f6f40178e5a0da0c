"""Metric core for phase-recognition prediction logs.

AP here is non-interpolated retrieval AP over frames: for one phase,
frames are ranked by descending confidence in that phase (ties broken by
ascending frame index) and AP is the mean of precision-at-rank taken at
each truth-positive frame. Phases absent from the truth have no AP
(ABSENT, returned as None) and are excluded from mAP rather than scored
zero. Cross entropy is the mean negative log confidence of the true
phase, with confidences clamped at 1e-12 before the log.

Table arithmetic (delta and deviation reports) is done in Decimal so the
checked 2-decimal display values are exact, never float-rounding noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .errors import (
    BlankInTrack,
    KeyMismatch,
    MissingConsensus,
    NoOverlap,
    NotNormalized,
    UnknownPhase,
)
from .labels import BLANK, FrameTrack, PhaseTaxonomy

LOG_CLAMP = 1e-12
NORMALIZED_TOL = 1e-6


@dataclass(frozen=True)
class PredictionLog:
    """Per-frame confidence vectors over C phases.

    Column j corresponds to the j-th phase in taxonomy order (so column 0
    is phase id 0 for cholecystectomy but phase id 1 for gastrectomy).
    ``frame_offset`` is the first truth frame the log covers.
    ``normalized`` declares that every row is a probability vector, which
    is verified at construction.
    """

    case_id: str
    rows: tuple[tuple[float, ...], ...]
    frame_offset: int = 0
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        if not self.rows:
            raise ValueError("prediction log needs at least one row")
        width = len(self.rows[0])
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} cells, expected {width}")
            for v in row:
                if not math.isfinite(v):
                    raise ValueError(f"row {i} contains a non-finite confidence")
        if self.normalized and not rows_are_normalized(self.rows):
            raise NotNormalized("declared normalized but rows are not probability vectors")

    @property
    def phase_count(self) -> int:
        return len(self.rows[0])

    def __len__(self) -> int:
        return len(self.rows)


def rows_are_normalized(rows) -> bool:
    """True when every row is nonnegative and sums to 1 within tolerance."""
    for row in rows:
        if any(v < 0 for v in row):
            return False
        if abs(sum(row) - 1.0) > NORMALIZED_TOL:
            return False
    return True


@dataclass(frozen=True)
class CrossEntropyResult:
    loss: float
    evaluated_frames: int


@dataclass(frozen=True)
class EvalReport:
    """Per-phase AP, their mean, and an argmax confusion matrix.

    ``per_phase_ap`` maps phase id to AP, or None for phases absent from
    the truth (excluded from ``map_value``). ``confusion`` is indexed by
    taxonomy order: rows are truth, columns are argmax predictions.
    """

    per_phase_ap: dict[int, float | None]
    map_value: float
    confusion: tuple[tuple[int, ...], ...]
    support: dict[int, int]
    phase_ids: tuple[int, ...]


@dataclass(frozen=True)
class DeltaRow:
    model: str
    split: str
    ap_by_annotation: dict[str, Decimal]
    consensus_ap: Decimal
    deltas: dict[str, Decimal]


@dataclass(frozen=True)
class DeltaTable:
    rows: tuple[DeltaRow, ...]

    def display_delta(self, model: str, split: str, annotation: str) -> str:
        """Signed delta rounded half-up to 2 decimals, as printed."""
        for row in self.rows:
            if row.model == model and row.split == split:
                return format_signed(round_half_up(row.deltas[annotation], 2))
        raise KeyError((model, split))

    def mean_delta_by_model(self) -> dict[str, Decimal]:
        sums: dict[str, list[Decimal]] = {}
        for row in self.rows:
            sums.setdefault(row.model, []).extend(row.deltas.values())
        return {m: sum(v) / len(v) for m, v in sums.items()}


@dataclass(frozen=True)
class DeviationEntry:
    total_ap: Decimal
    deviations: dict[str, Decimal]


@dataclass(frozen=True)
class DeviationReport:
    per_key: dict[str, DeviationEntry]


def round_half_up(value, places: int = 2) -> Decimal:
    """Half-up rounding used by all display formatting; exact for the
    Decimal-backed table values and repr-faithful for floats."""
    d = value if isinstance(value, Decimal) else Decimal(str(value))
    return d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def format_signed(d: Decimal) -> str:
    return f"+{d}" if d >= 0 else str(d)


def _overlap(log: PredictionLog, truth: FrameTrack) -> range:
    """Truth frame indices covered by both the log and the truth."""
    start = max(0, log.frame_offset)
    stop = min(len(truth.labels), log.frame_offset + len(log.rows))
    if stop <= start:
        raise NoOverlap(
            f"log frames {log.frame_offset}..{log.frame_offset + len(log.rows) - 1} "
            f"vs truth frames 0..{len(truth.labels) - 1}")
    return range(start, stop)


def _column_of(phase_id: int, width: int, taxonomy: PhaseTaxonomy | None) -> int:
    if taxonomy is None:
        if 0 <= phase_id < width:
            return phase_id
        raise UnknownPhase(f"phase {phase_id} outside confidence columns 0..{width - 1}")
    try:
        col = taxonomy.index_of(phase_id)
    except KeyError:
        raise UnknownPhase(f"phase {phase_id} not in taxonomy") from None
    if col >= width:
        raise UnknownPhase(
            f"taxonomy has {taxonomy.phase_count} phases but log only {width} columns")
    return col


def cross_entropy(
    log: PredictionLog,
    truth: FrameTrack,
    taxonomy: PhaseTaxonomy | None = None,
) -> CrossEntropyResult:
    """Mean negative log confidence of the true phase over the frames
    both inputs cover. Without a taxonomy, truth labels index confidence
    columns directly."""
    if not log.normalized:
        raise NotNormalized("cross entropy needs softmax-normalized rows")
    if truth.has_blank:
        raise BlankInTrack("cross entropy needs a blank-free truth track")
    frames = _overlap(log, truth)
    total = 0.0
    for k in frames:
        row = log.rows[k - log.frame_offset]
        col = _column_of(truth.labels[k], len(row), taxonomy)
        total += math.log(max(row[col], LOG_CLAMP))
    m = len(frames)
    return CrossEntropyResult(loss=-total / m, evaluated_frames=m)


def phase_ap(
    log: PredictionLog,
    truth: FrameTrack,
    phase: int,
    taxonomy: PhaseTaxonomy | None = None,
) -> float | None:
    """AP for one phase, or None (ABSENT) when the truth has no positive
    frame for it."""
    if truth.has_blank:
        raise BlankInTrack("AP needs a blank-free truth track")
    frames = _overlap(log, truth)
    col = _column_of(phase, log.phase_count, taxonomy)
    ranked = sorted(frames, key=lambda k: (-log.rows[k - log.frame_offset][col], k))
    positives = 0
    ap_sum = 0.0
    for rank, k in enumerate(ranked, start=1):
        if truth.labels[k] == phase:
            positives += 1
            ap_sum += positives / rank
    if positives == 0:
        return None
    return ap_sum / positives


def eval_report(
    log: PredictionLog,
    truth: FrameTrack,
    taxonomy: PhaseTaxonomy,
) -> EvalReport:
    """Full per-phase report: APs, their mean over defined phases, the
    argmax confusion matrix (tie -> lowest phase id, i.e. first taxonomy
    column), and per-phase truth support."""
    frames = _overlap(log, truth)
    phase_ids = tuple(p.id for p in taxonomy.phases)
    aps = {pid: phase_ap(log, truth, pid, taxonomy) for pid in phase_ids}
    defined = [v for v in aps.values() if v is not None]
    c = taxonomy.phase_count
    confusion = [[0] * c for _ in range(c)]
    support = {pid: 0 for pid in phase_ids}
    for k in frames:
        row = log.rows[k - log.frame_offset]
        best = max(row)
        pred_col = min(
            (j for j in range(len(row)) if row[j] == best),
            key=lambda j: phase_ids[j],
        )
        true_col = _column_of(truth.labels[k], c, taxonomy)
        confusion[true_col][pred_col] += 1
        support[truth.labels[k]] += 1
    return EvalReport(
        per_phase_ap=aps,
        map_value=sum(defined) / len(defined) if defined else 0.0,
        confusion=tuple(tuple(r) for r in confusion),
        support=support,
        phase_ids=phase_ids,
    )


def delta_table(
    results: dict[tuple[str, str, str], float | Decimal],
    consensus_key: str = "Con",
) -> DeltaTable:
    """Consensus-minus-annotation AP deltas per (model, split).

    ``results`` maps (model, split, annotation) to AP, where the
    annotation equal to ``consensus_key`` holds the consensus-trained AP.
    Arithmetic is exact in Decimal; display rounding is half-up to two
    decimals via :meth:`DeltaTable.display_delta`.
    """
    cells: dict[tuple[str, str], dict[str, Decimal]] = {}
    for (model, split, annotation), ap in results.items():
        d = ap if isinstance(ap, Decimal) else Decimal(str(ap))
        cells.setdefault((model, split), {})[annotation] = d
    rows = []
    for (model, split), by_ann in sorted(cells.items()):
        if consensus_key not in by_ann:
            raise MissingConsensus(f"no {consensus_key!r} AP for ({model}, {split})")
        con = by_ann[consensus_key]
        anns = {k: v for k, v in by_ann.items() if k != consensus_key}
        rows.append(DeltaRow(
            model=model,
            split=split,
            ap_by_annotation=anns,
            consensus_ap=con,
            deltas={k: con - v for k, v in anns.items()},
        ))
    return DeltaTable(rows=tuple(rows))


@dataclass(frozen=True)
class ConsistencyResult:
    derived_map: float
    consistent: bool


def consistency_check(
    split_aps: list[float],
    reported_map: float,
    tolerance: float,
) -> ConsistencyResult:
    """Does a reported mAP match the arithmetic mean of its split APs?"""
    if not split_aps:
        raise ValueError("need at least one split AP")
    derived = sum(split_aps) / len(split_aps)
    return ConsistencyResult(
        derived_map=derived,
        consistent=abs(derived - reported_map) <= tolerance,
    )


def deviation_report(aps: dict[str, dict[str, float | Decimal]]) -> DeviationReport:
    """Per key: mean AP over models (total) and each model's deviation
    from it. All models must report the same key set."""
    models = sorted(aps)
    if not models:
        raise ValueError("need at least one model")
    key_sets = {m: frozenset(aps[m]) for m in models}
    reference = key_sets[models[0]]
    for m in models[1:]:
        if key_sets[m] != reference:
            raise KeyMismatch(
                f"model {m!r} keys differ from {models[0]!r}: "
                f"{sorted(reference ^ key_sets[m])}")
    per_key = {}
    for key in sorted(reference):
        values = {}
        for m in models:
            v = aps[m][key]
            values[m] = v if isinstance(v, Decimal) else Decimal(str(v))
        total = sum(values.values()) / len(values)
        per_key[key] = DeviationEntry(
            total_ap=total,
            deviations={m: v - total for m, v in values.items()},
        )
    return DeviationReport(per_key=per_key)
