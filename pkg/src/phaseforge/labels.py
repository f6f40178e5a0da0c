"""Core temporal-label model: phase taxonomies, frame tracks, and the
run-length segment form they convert to and from.

Frames are the canonical axis; ``fps`` is carried metadata only (at the
1 f/s sampling used by the builtin taxonomies, frame index equals seconds).
``BLANK`` (``None``) is an explicit per-frame value meaning "no label"; it
is legal only for consensus-draft tracks, never for annotator uploads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import BlankInTrack, EmptyTrack, MalformedSegments

# Explicit "no label yet" marker used by consensus drafts.
BLANK = None

Label = int | None

CHOLECYSTECTOMY = "cholecystectomy"
GASTRECTOMY = "gastrectomy"


class PhaseKind(str, enum.Enum):
    SURGICAL = "surgical"
    NON_SURGICAL = "non_surgical"


class Provenance(str, enum.Enum):
    """Where a track came from; controls whether BLANK frames are legal."""

    ANNOTATOR = "annotator"    # one mandatory label per frame
    DRAFT = "draft"            # unanimity-merge output, may contain BLANK
    CONSENSUS = "consensus"    # fully resolved draft, blank-free


class IssueCode(str, enum.Enum):
    UNKNOWN_LABEL = "unknown_label"
    UNEXPECTED_BLANK = "unexpected_blank"
    LENGTH_MISMATCH = "length_mismatch"


@dataclass(frozen=True)
class Phase:
    id: int
    name: str
    kind: PhaseKind = PhaseKind.SURGICAL


@dataclass(frozen=True)
class PhaseTaxonomy:
    """Closed set of phase labels for one surgery type.

    The two builtin kinds have their published shape enforced:
    cholecystectomy is exactly 7 phases with ids 0..6, gastrectomy is
    exactly 27 with ids 1..27 where ids 22..27 are non-surgical actions.
    Any other ``surgery_kind`` string is accepted as a user taxonomy with
    no shape constraint beyond unique ids.
    """

    surgery_kind: str
    phases: tuple[Phase, ...]

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))
        if not self.phases:
            raise ValueError("taxonomy needs at least one phase")
        ids = [p.id for p in self.phases]
        if len(set(ids)) != len(ids):
            raise ValueError("phase ids must be unique")
        if self.surgery_kind == CHOLECYSTECTOMY:
            if sorted(ids) != list(range(7)):
                raise ValueError("cholecystectomy taxonomy must have ids 0..6")
        elif self.surgery_kind == GASTRECTOMY:
            if sorted(ids) != list(range(1, 28)):
                raise ValueError("gastrectomy taxonomy must have ids 1..27")
            for p in self.phases:
                expected = PhaseKind.NON_SURGICAL if p.id >= 22 else PhaseKind.SURGICAL
                if p.kind is not expected:
                    raise ValueError(f"phase {p.id} must be {expected.value}")

    @property
    def ids(self) -> frozenset[int]:
        return frozenset(p.id for p in self.phases)

    @property
    def phase_count(self) -> int:
        return len(self.phases)

    def index_of(self, phase_id: int) -> int:
        """Position of a phase id in taxonomy order (= confidence column)."""
        for i, p in enumerate(self.phases):
            if p.id == phase_id:
                return i
        raise KeyError(phase_id)

    def phase(self, phase_id: int) -> Phase:
        return self.phases[self.index_of(phase_id)]


@dataclass(frozen=True)
class FrameTrack:
    """Dense per-frame label sequence for one recording.

    Construction is deliberately lenient about label content: taxonomy
    membership and the blank policy are checked by :func:`validate_track`,
    which reports problems instead of raising.
    """

    case_id: str
    annotator_id: str
    labels: tuple[Label, ...]
    fps: float = 1.0
    provenance: Provenance = Provenance.ANNOTATOR

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.fps <= 0:
            raise ValueError("fps must be positive")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def has_blank(self) -> bool:
        return any(v is BLANK for v in self.labels)


@dataclass(frozen=True)
class Segment:
    """Inclusive frame range carrying one label (or BLANK)."""

    start_frame: int
    end_frame: int
    label: Label

    @property
    def length(self) -> int:
        return self.end_frame - self.start_frame + 1


@dataclass(frozen=True)
class SegmentTrack:
    """Run-length form of a FrameTrack.

    Construction stores what it is given; :func:`to_frames` enforces the
    sorted / gap-free / maximal-run contract and raises on violation, so
    hand-built segment lists are checked at the point of use.
    """

    case_id: str
    annotator_id: str
    segments: tuple[Segment, ...]
    fps: float = 1.0
    provenance: Provenance = Provenance.ANNOTATOR

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))


@dataclass(frozen=True)
class Issue:
    frame_index: int
    code: IssueCode
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    issues: tuple[Issue, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "issues", tuple(self.issues))
        if self.ok != (len(self.issues) == 0):
            raise ValueError("ok must mirror an empty issue list")


def validate_track(
    track: FrameTrack,
    taxonomy: PhaseTaxonomy,
    expected_frames: int | None = None,
) -> ValidationReport:
    """Check a track against a taxonomy and its blank policy.

    Every problem becomes a report entry; nothing raises. BLANK frames
    are legal only for draft-provenance tracks.
    """
    issues = []
    if len(track.labels) == 0:
        issues.append(Issue(0, IssueCode.LENGTH_MISMATCH, "track has no frames"))
    if expected_frames is not None and len(track.labels) != expected_frames:
        issues.append(Issue(
            len(track.labels), IssueCode.LENGTH_MISMATCH,
            f"expected {expected_frames} frames, found {len(track.labels)}",
        ))
    blank_ok = track.provenance is Provenance.DRAFT
    valid_ids = taxonomy.ids
    for k, label in enumerate(track.labels):
        if label is BLANK:
            if not blank_ok:
                issues.append(Issue(
                    k, IssueCode.UNEXPECTED_BLANK,
                    f"BLANK frame in {track.provenance.value} track",
                ))
        elif label not in valid_ids:
            issues.append(Issue(
                k, IssueCode.UNKNOWN_LABEL,
                f"label {label} not in taxonomy",
            ))
    return ValidationReport(ok=not issues, issues=tuple(issues))


def to_segments(track: FrameTrack) -> SegmentTrack:
    """Run-length encode a track into maximal same-label segments."""
    if len(track.labels) == 0:
        raise EmptyTrack(f"case {track.case_id!r}: cannot segment an empty track")
    segments = []
    start = 0
    current = track.labels[0]
    for k in range(1, len(track.labels)):
        if track.labels[k] != current:
            segments.append(Segment(start, k - 1, current))
            start, current = k, track.labels[k]
    segments.append(Segment(start, len(track.labels) - 1, current))
    return SegmentTrack(
        case_id=track.case_id,
        annotator_id=track.annotator_id,
        segments=tuple(segments),
        fps=track.fps,
        provenance=track.provenance,
    )


def check_segment_invariants(segments: tuple[Segment, ...]) -> list[str]:
    """Structural problems of a segment list; empty means valid."""
    problems = []
    if not segments:
        problems.append("segment list is empty")
        return problems
    if segments[0].start_frame != 0:
        problems.append(f"first segment starts at {segments[0].start_frame}, not 0")
    for seg in segments:
        if seg.end_frame < seg.start_frame:
            problems.append(f"segment {seg} has end before start")
    for prev, cur in zip(segments, segments[1:]):
        if cur.start_frame != prev.end_frame + 1:
            problems.append(
                f"gap or overlap between frame {prev.end_frame} and {cur.start_frame}")
        if cur.label == prev.label:
            problems.append(f"adjacent segments share label {cur.label!r}")
    return problems


def to_frames(segments: SegmentTrack) -> FrameTrack:
    """Expand a segment track back to per-frame labels (inverse of
    :func:`to_segments`)."""
    problems = check_segment_invariants(segments.segments)
    if problems:
        raise MalformedSegments("; ".join(problems))
    labels = []
    for seg in segments.segments:
        labels.extend([seg.label] * seg.length)
    return FrameTrack(
        case_id=segments.case_id,
        annotator_id=segments.annotator_id,
        labels=tuple(labels),
        fps=segments.fps,
        provenance=segments.provenance,
    )


def transitions(track: FrameTrack) -> list[int]:
    """Frame indices k >= 1 where the label changes from frame k-1.

    These are the phase-change boundaries that drive the boundary
    disagreement profile. Requires a blank-free track.
    """
    if track.has_blank:
        raise BlankInTrack(f"case {track.case_id!r}: transitions need a blank-free track")
    return [
        k for k in range(1, len(track.labels))
        if track.labels[k] != track.labels[k - 1]
    ]
