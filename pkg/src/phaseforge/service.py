"""HTTP facade over the annotation workbench.

One endpoint per pipeline step: create project, register case, upload
tracks, run the unanimity merge, walk the blank queue, submit inspector
resolutions, read agreement stats, export the final consensus track, and
evaluate prediction logs. The browser inspector is a pure client of this
API and is served as static files from `/` when a UI bundle is present.

Concurrency: every case mutation runs under that case's lock and is
persisted before the response is sent. Reads are lock-free snapshots.
Resolutions carry a client-chosen submission id; retries with the same id
return the current queue instead of a conflict.
"""

from __future__ import annotations

import json
import os
import threading
from collections import defaultdict
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import formats
from .consensus import (
    BlankSegment,
    ConsensusDraft,
    Resolution,
    ResolutionLedger,
    and_merge,
    apply_resolutions,
    blank_segments,
    boundary_disagreement_profile,
    pairwise_agreement,
)
from .errors import NotFound, PhaseForgeError, SchemaError
from .evaluation import eval_report
from .fixtures import load_fixture
from .splits import CaseMetadata
from .labels import (
    FrameTrack,
    PhaseTaxonomy,
    Provenance,
    Segment,
    validate_track,
)
from .store import ProjectStore

# input-syntax failures: the request body itself is unprocessable
_UNPROCESSABLE = ("SchemaError", "DenseIndexViolation", "NumericError",
                  "UnknownPhase", "NotNormalized", "LogTooShort")


class ProjectBody(BaseModel):
    name: str
    taxonomy: str | dict = "cholecystectomy"


class MetadataBody(BaseModel):
    age: float | None = None
    operation_minutes: float | None = None
    bleeding_ml: float | None = None
    bmi: float | None = None
    recording_system: str = "other"
    extra: dict[str, float] = Field(default_factory=dict)


class CaseBody(BaseModel):
    case_id: str
    fps: float = 1.0
    frame_count: int
    recording_system: str = "other"
    metadata: MetadataBody | None = None


class ResolutionBody(BaseModel):
    start_frame: int
    end_frame: int
    label: int
    inspector_id: str
    submission_id: str
    note: str = ""


class EvaluateBody(BaseModel):
    case_id: str
    prediction_csv: str
    reference_annotator: str | None = None


def _builtin_taxonomy(name: str) -> PhaseTaxonomy:
    aliases = {
        "cholecystectomy": "cholec_taxonomy",
        "cholec": "cholec_taxonomy",
        "gastrectomy": "gastrectomy_taxonomy",
    }
    if name not in aliases:
        raise SchemaError(f"unknown builtin taxonomy {name!r}")
    return load_fixture(aliases[name])


def _pending_segments(
    blanks: list[BlankSegment], ledger: ResolutionLedger
) -> list[BlankSegment]:
    """Blank ranges not yet covered by the ledger, evidence clipped to
    the surviving sub-ranges. Partial coverage splits a segment."""
    resolved = sorted((e.start_frame, e.end_frame) for e in ledger.entries)
    out = []
    for seg in blanks:
        pieces = [(seg.start_frame, seg.end_frame)]
        for rs, re_ in resolved:
            nxt = []
            for s, e in pieces:
                if re_ < s or rs > e:
                    nxt.append((s, e))
                    continue
                if s < rs:
                    nxt.append((s, rs - 1))
                if re_ < e:
                    nxt.append((re_ + 1, e))
            pieces = nxt
        for s, e in pieces:
            out.append(BlankSegment(s, e, _clip_evidence(seg.candidate_labels, s, e)))
    out.sort(key=lambda b: b.start_frame)
    return out


def _clip_evidence(
    candidates: dict[str, tuple[Segment, ...]], start: int, end: int
) -> dict[str, tuple[Segment, ...]]:
    out = {}
    for ann, segs in candidates.items():
        kept = []
        for sg in segs:
            if sg.end_frame < start or sg.start_frame > end:
                continue
            kept.append(Segment(
                start_frame=max(sg.start_frame, start),
                end_frame=min(sg.end_frame, end),
                label=sg.label,
            ))
        out[ann] = tuple(kept)
    return out


def _segment_json(seg: BlankSegment, merged: FrameTrack) -> dict:
    before = seg.start_frame - 1
    after = seg.end_frame + 1
    return {
        "start_frame": seg.start_frame,
        "end_frame": seg.end_frame,
        "length": seg.end_frame - seg.start_frame + 1,
        "context_before": merged.labels[before] if before >= 0 else None,
        "context_after": merged.labels[after] if after < len(merged.labels) else None,
        "candidates": {
            ann: [
                {
                    "start_frame": sg.start_frame,
                    "end_frame": sg.end_frame,
                    "label": sg.label,
                    "length": sg.length,
                }
                for sg in segs
            ]
            for ann, segs in seg.candidate_labels.items()
        },
    }


def _track_rle_json(track: FrameTrack) -> dict:
    """Run-length view of a track; BLANK runs carry label null."""
    runs = []
    labels = track.labels
    start = 0
    for k in range(1, len(labels) + 1):
        if k == len(labels) or labels[k] != labels[start]:
            runs.append({
                "start_frame": start,
                "end_frame": k - 1,
                "label": labels[start],
            })
            start = k
    return {
        "annotator_id": track.annotator_id,
        "frame_count": len(labels),
        "provenance": track.provenance.value,
        "segments": runs,
    }


def create_app(
    store_root: str | Path | None = None,
    token: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the app. ``token`` enables bearer-token auth for /api routes
    (default: permissive). ``ui_dir`` points at a static UI bundle."""
    store = ProjectStore(store_root)
    if token is None:
        token = os.environ.get("PHASEFORGE_TOKEN") or None

    locks: dict[tuple[str, str], threading.Lock] = defaultdict(threading.Lock)
    locks_guard = threading.Lock()

    def case_lock(project: str, case_id: str) -> threading.Lock:
        with locks_guard:
            return locks[(project, case_id)]

    def check_auth(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or bad bearer token")

    app = FastAPI(
        title="phaseforge service",
        openapi_url="/api/spec",
        docs_url="/api/docs",
        dependencies=[Depends(check_auth)],
    )

    @app.exception_handler(PhaseForgeError)
    async def domain_error(request: Request, exc: PhaseForgeError):
        if isinstance(exc, NotFound):
            status = 404
        elif type(exc).__name__ in _UNPROCESSABLE:
            status = 422
        else:
            # state conflicts: merge preconditions, overlap, stale drafts
            status = 409
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    # -- helpers bound to the store ---------------------------------------

    def load_sources(project: str, case_id: str) -> list[FrameTrack]:
        return [
            store.load_track(project, case_id, ann)
            for ann in store.list_tracks(project, case_id)
        ]

    def current_draft(project: str, case_id: str) -> ConsensusDraft:
        """Rebuild the draft from stored tracks and check it still matches
        the stored merge; a mismatch means tracks changed after the merge."""
        if not store.has_draft(project, case_id):
            raise HTTPException(
                status_code=409,
                detail="no consensus draft; run the consensus step first")
        stored = store.load_draft(project, case_id)
        draft = and_merge(load_sources(project, case_id))
        if draft.merged.labels != stored.merged.labels:
            raise HTTPException(
                status_code=409,
                detail="tracks changed after the merge; re-run consensus")
        return draft

    def pending_queue(project: str, case_id: str):
        draft = current_draft(project, case_id)
        ledger = store.load_ledger(project, case_id)
        pending = _pending_segments(blank_segments(draft), ledger)
        return draft, ledger, pending

    # -- projects and cases ------------------------------------------------

    @app.post("/api/projects", status_code=201)
    def create_project(body: ProjectBody):
        if isinstance(body.taxonomy, str):
            taxonomy = _builtin_taxonomy(body.taxonomy)
        else:
            taxonomy = formats.taxonomy_from_json(json.dumps(body.taxonomy).encode())
        store.create_project(body.name)
        store.save_taxonomy(body.name, taxonomy)
        return {
            "name": body.name,
            "surgery_kind": taxonomy.surgery_kind,
            "phase_count": taxonomy.phase_count,
        }

    @app.get("/api/projects")
    def list_projects():
        return {"projects": store.list_projects()}

    @app.get("/api/projects/{project}/taxonomy")
    def get_taxonomy(project: str):
        taxonomy = store.load_taxonomy(project)
        return {
            "surgery_kind": taxonomy.surgery_kind,
            "phases": [
                {"id": p.id, "name": p.name, "kind": p.kind.value}
                for p in taxonomy.phases
            ],
        }

    @app.post("/api/projects/{project}/cases", status_code=201)
    def create_case(project: str, body: CaseBody):
        meta = None
        if body.metadata is not None:
            meta = CaseMetadata(
                case_id=body.case_id,
                age=body.metadata.age,
                operation_minutes=body.metadata.operation_minutes,
                bleeding_ml=body.metadata.bleeding_ml,
                bmi=body.metadata.bmi,
                recording_system=body.metadata.recording_system,
                extra=dict(body.metadata.extra),
            )
        manifest = formats.CaseManifest(
            case_id=body.case_id,
            fps=body.fps,
            frame_count=body.frame_count,
            recording_system=body.recording_system,
            metadata=meta,
        )
        with case_lock(project, body.case_id):
            store.save_manifest(project, manifest)
        return {"case_id": body.case_id, "frame_count": body.frame_count}

    @app.get("/api/projects/{project}/cases")
    def list_cases(project: str):
        return {"cases": store.list_cases(project)}

    # -- tracks -------------------------------------------------------------

    @app.put("/api/projects/{project}/cases/{case_id}/tracks/{annotator_id}")
    async def put_track(project: str, case_id: str, annotator_id: str, request: Request):
        data = await request.body()
        manifest = store.load_manifest(project, case_id)
        taxonomy = store.load_taxonomy(project)
        track = formats.parse_track_csv(
            data, case_id=case_id, annotator_id=annotator_id,
            fps=manifest.fps, provenance=Provenance.ANNOTATOR)
        report = validate_track(track, taxonomy, expected_frames=manifest.frame_count)
        if not report.ok:
            raise HTTPException(status_code=422, detail=[
                {"code": i.code.value, "frame": i.frame_index, "message": i.detail}
                for i in report.issues
            ])
        with case_lock(project, case_id):
            store.save_track(project, track)
        return {"annotator_id": annotator_id, "frames": len(track)}

    @app.get("/api/projects/{project}/cases/{case_id}/tracks")
    def get_tracks(project: str, case_id: str):
        store.load_manifest(project, case_id)
        tracks = load_sources(project, case_id)
        out = {"tracks": [_track_rle_json(t) for t in tracks]}
        if store.has_draft(project, case_id):
            draft = store.load_draft(project, case_id)
            out["draft"] = _track_rle_json(draft.merged)
        return out

    # -- consensus workflow --------------------------------------------------

    @app.post("/api/projects/{project}/cases/{case_id}/consensus")
    def run_consensus(project: str, case_id: str):
        with case_lock(project, case_id):
            tracks = load_sources(project, case_id)
            draft = and_merge(tracks)
            store.save_draft(project, draft)
            # a fresh merge restarts the inspection from scratch
            store.save_ledger(project, case_id, ResolutionLedger(()), {})
            segs = blank_segments(draft)
        return {
            "case_id": case_id,
            "annotators": [t.annotator_id for t in tracks],
            "frames": len(draft.merged),
            "coverage": draft.coverage,
            "blank_frames": draft.blank_frames,
            "blank_segments": len(segs),
        }

    @app.get("/api/projects/{project}/cases/{case_id}/blanks")
    def get_blanks(project: str, case_id: str):
        draft, ledger, pending = pending_queue(project, case_id)
        return {
            "pending": [_segment_json(s, draft.merged) for s in pending],
            "resolved_count": len(ledger.entries),
            "pending_count": len(pending),
        }

    @app.post("/api/projects/{project}/cases/{case_id}/resolutions")
    def post_resolution(project: str, case_id: str, body: ResolutionBody):
        taxonomy = store.load_taxonomy(project)
        if body.label not in taxonomy.ids:
            raise HTTPException(
                status_code=422,
                detail=f"label {body.label} is not in the project taxonomy")
        if body.start_frame > body.end_frame or body.start_frame < 0:
            raise HTTPException(status_code=422, detail="bad frame range")
        with case_lock(project, case_id):
            seen = store.load_ledger_submissions(project, case_id)
            draft, ledger, pending = pending_queue(project, case_id)
            if body.submission_id in seen:
                # retry of an accepted submission: answer with current state
                return {
                    "applied": False,
                    "pending": [_segment_json(s, draft.merged) for s in pending],
                    "pending_count": len(pending),
                    "resolved_count": len(ledger.entries),
                }
            covered = any(
                s.start_frame <= body.start_frame and body.end_frame <= s.end_frame
                for s in pending)
            if not covered:
                raise HTTPException(
                    status_code=409,
                    detail="range is not a pending blank segment")
            entry = Resolution(
                start_frame=body.start_frame,
                end_frame=body.end_frame,
                assigned_label=body.label,
                inspector_id=body.inspector_id,
                note=body.note,
            )
            new_ledger = ledger.append(entry)
            seen[body.submission_id] = len(new_ledger.entries) - 1
            store.save_ledger(project, case_id, new_ledger, seen)
            remaining = _pending_segments(blank_segments(draft), new_ledger)
        return {
            "applied": True,
            "pending": [_segment_json(s, draft.merged) for s in remaining],
            "pending_count": len(remaining),
            "resolved_count": len(new_ledger.entries),
        }

    @app.get("/api/projects/{project}/cases/{case_id}/stats")
    def get_stats(project: str, case_id: str):
        store.load_manifest(project, case_id)
        tracks = load_sources(project, case_id)
        stats = pairwise_agreement(tracks)
        reference, others = tracks[0], tracks[1:]
        profile = boundary_disagreement_profile(reference, others)
        return {
            "annotator_ids": list(stats.annotator_ids),
            "pairwise": [list(row) for row in stats.pairwise],
            "unanimity_coverage": stats.unanimity_coverage,
            "reference_annotator": reference.annotator_id,
            "boundary_profile": {
                "max_distance": profile.max_distance,
                "bins": [
                    {
                        "distance": d,
                        "frames_at_distance": b.frames_at_distance,
                        "disagreeing_frames": b.disagreeing_frames,
                    }
                    for d, b in enumerate(profile.bins)
                ],
            },
        }

    @app.get("/api/projects/{project}/cases/{case_id}/export")
    def export_consensus(project: str, case_id: str):
        with case_lock(project, case_id):
            draft, ledger, pending = pending_queue(project, case_id)
            if pending:
                return JSONResponse(status_code=409, content={
                    "detail": "blank segments remain unresolved",
                    "pending_count": len(pending),
                    "remaining": [
                        {"start_frame": s.start_frame, "end_frame": s.end_frame}
                        for s in pending
                    ],
                })
            final = apply_resolutions(draft, ledger)
            store.save_consensus(project, final)
        return Response(
            content=formats.write_track_csv(final),
            media_type="text/csv",
            headers={
                "Content-Disposition":
                    f'attachment; filename="{case_id}-consensus.csv"',
            },
        )

    # -- evaluation -----------------------------------------------------------

    @app.post("/api/projects/{project}/evaluate")
    def evaluate(project: str, body: EvaluateBody):
        taxonomy = store.load_taxonomy(project)
        manifest = store.load_manifest(project, body.case_id)
        log = formats.parse_prediction_csv(
            body.prediction_csv.encode("utf-8"),
            taxonomy.phase_count,
            case_id=body.case_id,
        )
        if body.reference_annotator is not None:
            truth = store.load_track(project, body.case_id, body.reference_annotator)
        else:
            truth = store.load_consensus(project, body.case_id)
        report = eval_report(log, truth, taxonomy)
        return {
            "case_id": body.case_id,
            "reference": body.reference_annotator or "consensus",
            "fps": manifest.fps,
            "map_value": report.map_value,
            "per_phase_ap": {str(k): v for k, v in report.per_phase_ap.items()},
            "phase_ids": list(report.phase_ids),
            "confusion": [list(row) for row in report.confusion],
            "support": {str(k): v for k, v in report.support.items()},
        }

    # -- static UI -------------------------------------------------------------

    resolved_ui = _find_ui_dir(ui_dir)
    if resolved_ui is not None:
        app.mount("/", StaticFiles(directory=resolved_ui, html=True), name="ui")
    else:
        @app.get("/")
        def root():
            return {"service": "phaseforge", "api_spec": "/api/spec"}

    return app


def _find_ui_dir(explicit: str | Path | None) -> Path | None:
    candidates = []
    if explicit is not None:
        candidates.append(Path(explicit))
    env = os.environ.get("PHASEFORGE_UI")
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).parent / "ui")
    candidates.append(Path.cwd() / "frontend" / "dist")
    for c in candidates:
        if c.is_dir() and (c / "index.html").exists():
            return c
    return None


def serve(port: int = 8400, store_root: str | None = None,
          token: str | None = None, ui_dir: str | None = None) -> None:
    import uvicorn

    app = create_app(store_root=store_root, token=token, ui_dir=ui_dir)
    uvicorn.run(app, host="127.0.0.1", port=port)
