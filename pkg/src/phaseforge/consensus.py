"""Multi-annotator consensus pipeline.

The merge keeps a frame's label only when every annotator gave the same
one (strict unanimity, not majority vote); disagreeing frames become
BLANK and are queued for an inspector, who assigns final labels to whole
blank segments with the other annotators' opinions as evidence. Agreement
analytics quantify where annotators diverge, including how disagreement
concentrates around phase boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import (
    BlankInTrack,
    CaseMismatch,
    LengthMismatch,
    NotEnoughAnnotators,
    OverlappingResolutions,
    ResolutionOverreach,
)
from .labels import BLANK, FrameTrack, Label, Provenance, Segment, to_segments, transitions


class FrameProvenance:
    AGREED = "agreed"
    BLANK = "blank"


@dataclass(frozen=True)
class ConsensusDraft:
    """Unanimity-merged track plus the evidence it was merged from.

    ``source_tracks`` carries the annotator tracks so the inspector can
    weigh their opinions per blank segment; a draft reloaded from a bare
    CSV has an empty tuple there (annotator identities are not part of
    the track file format) and then offers no evidence.
    """

    case_id: str
    merged: FrameTrack
    source_tracks: tuple[FrameTrack, ...] = ()
    fps: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "source_tracks", tuple(self.source_tracks))
        if self.source_tracks and len(self.source_tracks) < 2:
            raise NotEnoughAnnotators("a draft needs at least two source tracks")

    @property
    def source_annotators(self) -> tuple[str, ...]:
        return tuple(t.annotator_id for t in self.source_tracks)

    @property
    def frame_provenance(self) -> tuple[str, ...]:
        return tuple(
            FrameProvenance.BLANK if v is BLANK else FrameProvenance.AGREED
            for v in self.merged.labels
        )

    @property
    def blank_frames(self) -> int:
        return sum(1 for v in self.merged.labels if v is BLANK)

    @property
    def coverage(self) -> float:
        """Fraction of frames the annotators agreed on unanimously."""
        n = len(self.merged.labels)
        return (n - self.blank_frames) / n if n else 0.0


@dataclass(frozen=True)
class Resolution:
    """One inspector decision: a label for an inclusive frame range."""

    start_frame: int
    end_frame: int
    assigned_label: int
    inspector_id: str
    timestamp: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc))
    note: str = ""

    def __post_init__(self):
        if self.end_frame < self.start_frame:
            raise ValueError("resolution range has end before start")
        if self.assigned_label is BLANK:
            raise ValueError("a resolution must assign a real label")


@dataclass(frozen=True)
class ResolutionLedger:
    """Append-only list of inspector decisions over disjoint ranges."""

    entries: tuple[Resolution, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        ordered = sorted(self.entries, key=lambda e: e.start_frame)
        for prev, cur in zip(ordered, ordered[1:]):
            if cur.start_frame <= prev.end_frame:
                raise OverlappingResolutions(
                    f"entries overlap at frames {cur.start_frame}..{prev.end_frame}")

    def append(self, entry: Resolution) -> "ResolutionLedger":
        return ResolutionLedger(self.entries + (entry,))


@dataclass(frozen=True)
class BlankSegment:
    """Maximal BLANK run awaiting resolution, with annotator evidence.

    ``candidate_labels`` maps annotator id to that annotator's label runs
    inside the segment (inclusive sub-ranges), so the inspector sees each
    opinion and for how long it was held.
    """

    start_frame: int
    end_frame: int
    candidate_labels: dict[str, tuple[Segment, ...]]


@dataclass(frozen=True)
class AgreementStats:
    """Pairwise per-frame agreement ratios plus unanimity coverage."""

    annotator_ids: tuple[str, ...]
    pairwise: tuple[tuple[float, ...], ...]
    unanimity_coverage: float

    def ratio(self, a: str, b: str) -> float:
        i = self.annotator_ids.index(a)
        j = self.annotator_ids.index(b)
        return self.pairwise[i][j]


@dataclass(frozen=True)
class BoundaryBin:
    frames_at_distance: int
    disagreeing_frames: int


@dataclass(frozen=True)
class BoundaryProfile:
    """Disagreement as a function of distance to the nearest phase change.

    ``bins[d]`` covers the frames whose nearest reference boundary is
    exactly d frames away, with d capped at ``max_distance``.
    """

    max_distance: int
    bins: tuple[BoundaryBin, ...]


def _check_merge_inputs(tracks) -> None:
    if len(tracks) < 2:
        raise NotEnoughAnnotators(f"need >= 2 tracks, got {len(tracks)}")
    case_ids = {t.case_id for t in tracks}
    if len(case_ids) != 1:
        raise CaseMismatch(f"tracks span cases {sorted(case_ids)}")
    lengths = {len(t.labels) for t in tracks}
    if len(lengths) != 1:
        raise LengthMismatch(f"track lengths differ: {sorted(lengths)}")
    for t in tracks:
        if t.has_blank:
            raise BlankInTrack(f"annotator track {t.annotator_id!r} contains BLANK")


def and_merge(tracks: list[FrameTrack]) -> ConsensusDraft:
    """Merge annotator tracks by unanimity.

    A frame keeps its label only when every track carries the same one;
    any disagreement leaves the frame BLANK. Order of the input tracks
    does not matter.
    """
    _check_merge_inputs(tracks)
    merged_labels = tuple(
        frame[0] if all(v == frame[0] for v in frame) else BLANK
        for frame in zip(*(t.labels for t in tracks))
    )
    first = tracks[0]
    merged = FrameTrack(
        case_id=first.case_id,
        annotator_id="consensus",
        labels=merged_labels,
        fps=first.fps,
        provenance=Provenance.DRAFT,
    )
    return ConsensusDraft(
        case_id=first.case_id,
        merged=merged,
        source_tracks=tuple(tracks),
        fps=first.fps,
    )


def blank_segments(draft: ConsensusDraft) -> list[BlankSegment]:
    """Maximal BLANK runs of a draft, ascending, with per-annotator
    label evidence attached (empty evidence if the draft carries no
    source tracks)."""
    runs = []
    start = None
    labels = draft.merged.labels
    for k, v in enumerate(labels):
        if v is BLANK and start is None:
            start = k
        elif v is not BLANK and start is not None:
            runs.append((start, k - 1))
            start = None
    if start is not None:
        runs.append((start, len(labels) - 1))

    out = []
    for s, e in runs:
        evidence: dict[str, tuple[Segment, ...]] = {}
        for t in draft.source_tracks:
            window = FrameTrack(
                case_id=t.case_id, annotator_id=t.annotator_id,
                labels=t.labels[s:e + 1], fps=t.fps, provenance=t.provenance)
            shifted = tuple(
                Segment(seg.start_frame + s, seg.end_frame + s, seg.label)
                for seg in to_segments(window).segments
            )
            evidence[t.annotator_id] = shifted
        out.append(BlankSegment(s, e, evidence))
    return out


def apply_resolutions(draft: ConsensusDraft, ledger: ResolutionLedger) -> FrameTrack:
    """Write inspector decisions into a draft's BLANK frames.

    Agreed frames are never altered; a ledger entry touching one raises
    ResolutionOverreach. If blanks remain uncovered the result keeps
    draft provenance (incomplete); a fully covered draft comes back
    blank-free with consensus provenance.
    """
    labels = list(draft.merged.labels)
    n = len(labels)
    for entry in ledger.entries:
        if entry.start_frame < 0 or entry.end_frame >= n:
            raise ResolutionOverreach(
                f"resolution {entry.start_frame}..{entry.end_frame} outside track 0..{n - 1}")
        for k in range(entry.start_frame, entry.end_frame + 1):
            if labels[k] is not BLANK:
                raise ResolutionOverreach(
                    f"frame {k} was agreed as {labels[k]} and cannot be overwritten")
            labels[k] = entry.assigned_label
    complete = all(v is not BLANK for v in labels)
    return FrameTrack(
        case_id=draft.case_id,
        annotator_id="consensus",
        labels=tuple(labels),
        fps=draft.fps,
        provenance=Provenance.CONSENSUS if complete else Provenance.DRAFT,
    )


def pairwise_agreement(tracks: list[FrameTrack]) -> AgreementStats:
    """Per-pair fraction of frames labeled identically, plus the
    unanimity coverage of the AND merge of all tracks."""
    _check_merge_inputs(tracks)
    n = len(tracks[0].labels)
    ids = tuple(t.annotator_id for t in tracks)
    matrix = []
    for a in tracks:
        row = []
        for b in tracks:
            equal = sum(1 for x, y in zip(a.labels, b.labels) if x == y)
            row.append(equal / n)
        matrix.append(tuple(row))
    return AgreementStats(
        annotator_ids=ids,
        pairwise=tuple(matrix),
        unanimity_coverage=and_merge(tracks).coverage,
    )


def boundary_disagreement_profile(
    reference: FrameTrack,
    others: list[FrameTrack],
    max_distance: int = 120,
) -> BoundaryProfile:
    """Histogram of disagreement vs distance to the reference's nearest
    phase boundary.

    For every frame k, d = min over boundaries b of |k - b| (capped);
    the frame lands in bin d, counted as disagreeing when any other
    track differs from the reference at k. The default cap of 120 frames
    is two minutes at 1 f/s.
    """
    if max_distance < 0:
        raise ValueError("max_distance must be >= 0")
    n = len(reference.labels)
    for t in others:
        if len(t.labels) != n:
            raise LengthMismatch(
                f"track {t.annotator_id!r} has {len(t.labels)} frames, reference has {n}")
    dist = _nearest_boundary_distances(reference, max_distance)
    at = [0] * (max_distance + 1)
    dis = [0] * (max_distance + 1)
    for k in range(n):
        d = dist[k]
        at[d] += 1
        if any(t.labels[k] != reference.labels[k] for t in others):
            dis[d] += 1
    return BoundaryProfile(
        max_distance=max_distance,
        bins=tuple(BoundaryBin(a, x) for a, x in zip(at, dis)),
    )


def _nearest_boundary_distances(reference: FrameTrack, max_distance: int) -> list[int]:
    """Two-sweep nearest-boundary distance per frame, capped."""
    n = len(reference.labels)
    bounds = transitions(reference)
    if not bounds:
        return [max_distance] * n
    big = n + max_distance + 1
    dist = [big] * n
    boundary_set = set(bounds)
    prev = None
    for k in range(n):
        if k in boundary_set:
            prev = k
        if prev is not None:
            dist[k] = k - prev
    nxt = None
    for k in range(n - 1, -1, -1):
        if k in boundary_set:
            nxt = k
        if nxt is not None and nxt - k < dist[k]:
            dist[k] = nxt - k
    return [min(d, max_distance) for d in dist]
