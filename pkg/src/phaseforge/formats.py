"""File formats: track CSV, prediction CSV, metadata CSV, manifest JSON,
ledger JSON, and the decision-track CSV.

Canonical files use LF line endings with a single trailing newline;
parsers are lenient about CRLF and a missing final newline, writers
always emit canon, so write(parse(x)) == x exactly for canonical input.
Floats are written with repr so prediction logs round-trip bit-exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .consensus import Resolution, ResolutionLedger
from .errors import DenseIndexViolation, NumericError, SchemaError
from .labels import BLANK, FrameTrack, Phase, PhaseKind, PhaseTaxonomy, Provenance
from .evaluation import PredictionLog, rows_are_normalized
from .replay import DecisionTrack, FrameState, WarmupEmission
from .splits import CaseMetadata, SplitPlan

from datetime import datetime

TRACK_HEADER = "frame,phase"
METADATA_HEADER = "case_id,age,operation_minutes,bleeding_ml,bmi,recording_system"
BLANK_CELL = "BLANK"
UNKNOWN_CELL = "UNKNOWN"


def _lines(data: bytes) -> list[str]:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaError(f"not valid UTF-8: {exc}") from None
    text = text.replace("\r\n", "\n")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _parse_int(cell: str, where: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise SchemaError(f"{where}: expected integer, got {cell!r}") from None


# --- track CSV -----------------------------------------------------------

def parse_track_csv(
    data: bytes,
    case_id: str = "",
    annotator_id: str = "",
    fps: float = 1.0,
    provenance: Provenance | None = None,
) -> FrameTrack:
    """Parse `frame,phase` rows into a FrameTrack.

    Frame indices must be exactly 0..N-1 ascending with no gaps or
    duplicates; phase is an integer or the literal BLANK. Identity
    metadata is not part of the file and comes from the caller (manifest,
    filename, upload path). Provenance defaults to draft when the file
    contains BLANK cells, annotator otherwise.
    """
    lines = _lines(data)
    if not lines or lines[0] != TRACK_HEADER:
        raise SchemaError(f"track header must be {TRACK_HEADER!r}")
    labels = []
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != 2:
            raise SchemaError(f"row {i}: expected 2 cells, got {len(parts)}")
        frame = _parse_int(parts[0], f"row {i} frame")
        if frame != i:
            raise DenseIndexViolation(f"row {i}: frame index {frame}, expected {i}")
        labels.append(BLANK if parts[1] == BLANK_CELL else _parse_int(parts[1], f"row {i} phase"))
    if provenance is None:
        provenance = Provenance.DRAFT if any(v is BLANK for v in labels) else Provenance.ANNOTATOR
    return FrameTrack(
        case_id=case_id, annotator_id=annotator_id,
        labels=tuple(labels), fps=fps, provenance=provenance)


def write_track_csv(track: FrameTrack) -> bytes:
    rows = [TRACK_HEADER]
    for k, v in enumerate(track.labels):
        rows.append(f"{k},{BLANK_CELL if v is BLANK else v}")
    return ("\n".join(rows) + "\n").encode("utf-8")


# --- prediction CSV ------------------------------------------------------

def parse_prediction_csv(data: bytes, phase_count: int, case_id: str = "") -> PredictionLog:
    """Parse `frame,c0,...,c{C-1}` confidence rows.

    Frames must ascend densely from the first row's index (which becomes
    frame_offset). The normalized flag is auto-detected from row sums.
    """
    lines = _lines(data)
    expected_header = "frame," + ",".join(f"c{j}" for j in range(phase_count))
    if not lines or lines[0] != expected_header:
        raise SchemaError(f"prediction header must be {expected_header!r}")
    if len(lines) == 1:
        raise SchemaError("prediction log has no rows")
    rows = []
    offset = None
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != phase_count + 1:
            raise SchemaError(
                f"row {i}: expected {phase_count + 1} cells, got {len(parts)}")
        frame = _parse_int(parts[0], f"row {i} frame")
        if offset is None:
            offset = frame
        elif frame != offset + i:
            raise DenseIndexViolation(f"row {i}: frame index {frame}, expected {offset + i}")
        try:
            row = tuple(float(cell) for cell in parts[1:])
        except ValueError as exc:
            raise NumericError(f"row {i}: {exc}") from None
        if any(not math.isfinite(v) for v in row):
            raise NumericError(f"row {i}: non-finite confidence")
        rows.append(row)
    return PredictionLog(
        case_id=case_id,
        rows=tuple(rows),
        frame_offset=offset,
        normalized=rows_are_normalized(rows),
    )


def write_prediction_csv(log: PredictionLog) -> bytes:
    header = "frame," + ",".join(f"c{j}" for j in range(log.phase_count))
    rows = [header]
    for i, row in enumerate(log.rows):
        rows.append(f"{log.frame_offset + i}," + ",".join(repr(v) for v in row))
    return ("\n".join(rows) + "\n").encode("utf-8")


# --- metadata CSV --------------------------------------------------------

def _parse_optional_float(cell: str, where: str) -> float | None:
    if cell == "":
        return None
    try:
        v = float(cell)
    except ValueError:
        raise NumericError(f"{where}: {cell!r} is not numeric") from None
    return v


def parse_metadata_csv(data: bytes) -> list[CaseMetadata]:
    """Parse case covariates; empty numeric cells mean missing."""
    lines = _lines(data)
    if not lines or lines[0] != METADATA_HEADER:
        raise SchemaError(f"metadata header must be {METADATA_HEADER!r}")
    cases = []
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != 6:
            raise SchemaError(f"row {i}: expected 6 cells, got {len(parts)}")
        cases.append(CaseMetadata(
            case_id=parts[0],
            age=_parse_optional_float(parts[1], f"row {i} age"),
            operation_minutes=_parse_optional_float(parts[2], f"row {i} operation_minutes"),
            bleeding_ml=_parse_optional_float(parts[3], f"row {i} bleeding_ml"),
            bmi=_parse_optional_float(parts[4], f"row {i} bmi"),
            recording_system=parts[5],
        ))
    return cases


def write_metadata_csv(cases: list[CaseMetadata]) -> bytes:
    def cell(v):
        return "" if v is None else repr(v)
    rows = [METADATA_HEADER]
    for c in cases:
        rows.append(",".join([
            c.case_id, cell(c.age), cell(c.operation_minutes),
            cell(c.bleeding_ml), cell(c.bmi), c.recording_system,
        ]))
    return ("\n".join(rows) + "\n").encode("utf-8")


# --- manifest JSON -------------------------------------------------------

@dataclass(frozen=True)
class CaseManifest:
    """Names a case's files and metadata inside a project."""

    case_id: str
    fps: float
    frame_count: int
    recording_system: str = "other"
    metadata: CaseMetadata | None = None
    track_files: dict[str, str] = field(default_factory=dict)
    prediction_files: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")
        if self.fps <= 0:
            raise ValueError("fps must be positive")


def manifest_to_json(manifest: CaseManifest) -> bytes:
    doc = {
        "case_id": manifest.case_id,
        "fps": manifest.fps,
        "frame_count": manifest.frame_count,
        "recording_system": manifest.recording_system,
        "metadata": None if manifest.metadata is None else {
            "case_id": manifest.metadata.case_id,
            "age": manifest.metadata.age,
            "operation_minutes": manifest.metadata.operation_minutes,
            "bleeding_ml": manifest.metadata.bleeding_ml,
            "bmi": manifest.metadata.bmi,
            "recording_system": manifest.metadata.recording_system,
            "extra": manifest.metadata.extra,
        },
        "track_files": manifest.track_files,
        "prediction_files": manifest.prediction_files,
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def manifest_from_json(data: bytes) -> CaseManifest:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"manifest is not valid JSON: {exc}") from None
    try:
        meta = doc.get("metadata")
        return CaseManifest(
            case_id=doc["case_id"],
            fps=doc["fps"],
            frame_count=doc["frame_count"],
            recording_system=doc.get("recording_system", "other"),
            metadata=None if meta is None else CaseMetadata(
                case_id=meta["case_id"],
                age=meta.get("age"),
                operation_minutes=meta.get("operation_minutes"),
                bleeding_ml=meta.get("bleeding_ml"),
                bmi=meta.get("bmi"),
                recording_system=meta.get("recording_system", "other"),
                extra=dict(meta.get("extra", {})),
            ),
            track_files=dict(doc.get("track_files", {})),
            prediction_files=dict(doc.get("prediction_files", {})),
        )
    except KeyError as exc:
        raise SchemaError(f"manifest missing field {exc}") from None


# --- taxonomy JSON --------------------------------------------------------

def taxonomy_to_json(taxonomy: PhaseTaxonomy) -> bytes:
    doc = {
        "surgery_kind": taxonomy.surgery_kind,
        "phases": [
            {"id": p.id, "name": p.name, "kind": p.kind.value}
            for p in taxonomy.phases
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def taxonomy_from_json(data: bytes) -> PhaseTaxonomy:
    try:
        doc = json.loads(data.decode("utf-8"))
        phases = tuple(
            Phase(id=p["id"], name=p["name"], kind=PhaseKind(p["kind"]))
            for p in doc["phases"]
        )
        return PhaseTaxonomy(surgery_kind=doc["surgery_kind"], phases=phases)
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed taxonomy: {exc}") from None


# --- resolution ledger JSON ----------------------------------------------

def ledger_to_json(ledger: ResolutionLedger, submissions: dict[str, int] | None = None) -> bytes:
    """Serialize a ledger; ``submissions`` optionally records which
    submission id produced which entry index, for idempotent retries."""
    doc = {"entries": [
        {
            "start_frame": e.start_frame,
            "end_frame": e.end_frame,
            "assigned_label": e.assigned_label,
            "inspector_id": e.inspector_id,
            "timestamp": e.timestamp.isoformat(),
            "note": e.note,
        }
        for e in ledger.entries
    ]}
    if submissions:
        doc["submissions"] = submissions
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def ledger_from_json(data: bytes) -> ResolutionLedger:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"ledger is not valid JSON: {exc}") from None
    try:
        entries = tuple(
            Resolution(
                start_frame=e["start_frame"],
                end_frame=e["end_frame"],
                assigned_label=e["assigned_label"],
                inspector_id=e["inspector_id"],
                timestamp=datetime.fromisoformat(e["timestamp"]),
                note=e.get("note", ""),
            )
            for e in doc["entries"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed ledger entry: {exc}") from None
    return ResolutionLedger(entries)


def ledger_submissions_from_json(data: bytes) -> dict[str, int]:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"ledger is not valid JSON: {exc}") from None
    subs = doc.get("submissions", {})
    if not isinstance(subs, dict):
        raise SchemaError("ledger submissions must be an object")
    return {str(k): int(v) for k, v in subs.items()}


# --- decision track CSV ---------------------------------------------------

DECISION_HEADER = "frame,phase,state"


def write_decision_csv(track: DecisionTrack) -> bytes:
    """Track CSV plus a state column; warmup phase cells follow the
    policy's emission style (empty for suppress, UNKNOWN otherwise)."""
    hold = track.policy.warmup_emission is WarmupEmission.HOLD_UNKNOWN
    rows = [DECISION_HEADER]
    for k, (v, s) in enumerate(zip(track.labels, track.states)):
        if s is FrameState.WARMUP:
            cell = UNKNOWN_CELL if hold else ""
        else:
            cell = str(v)
        rows.append(f"{k},{cell},{s.value}")
    return ("\n".join(rows) + "\n").encode("utf-8")


# --- split plan JSON ------------------------------------------------------

def split_plan_to_json(plan: SplitPlan) -> bytes:
    doc = {
        "balance_score": plan.balance_score,
        "covariates": list(plan.covariates),
        "seed": plan.seed,
        "exhaustive": plan.exhaustive,
        "imputed_means": plan.imputed,
        "folds": [
            {"name": f.name, "train_ids": list(f.train_ids), "test_ids": list(f.test_ids)}
            for f in plan.folds
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")
