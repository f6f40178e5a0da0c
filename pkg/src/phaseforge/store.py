"""Project persistence: a plain directory tree under the store root.

Layout:

    <root>/
      <project>/
        project.json
        cases/
          <case_id>/
            manifest.json
            tracks/<annotator_id>.csv
            predictions/<model_id>.csv
            draft.csv
            ledger.json
            consensus.csv
            reports/<name>.json

Every write goes to a temp file in the destination directory and is
renamed into place, so readers never observe a half-written artifact.
Readers may run concurrently; writers to one project must be serialized
by the caller (the service holds a per-case lock, the CLI is a single
process). The root defaults to ~/.phaseforge and is overridden by the
PHASEFORGE_HOME environment variable.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from pathlib import Path

from . import formats
from .consensus import ConsensusDraft, ResolutionLedger
from .errors import NotFound, SchemaError
from .evaluation import PredictionLog
from .formats import CaseManifest
from .labels import FrameTrack, PhaseTaxonomy, Provenance

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")

STORE_VERSION = 1


def default_root() -> Path:
    env = os.environ.get("PHASEFORGE_HOME")
    if env:
        return Path(env)
    return Path.home() / ".phaseforge"


def _check_name(kind: str, name: str) -> str:
    """Path components come from user input; keep them to one safe segment."""
    if not _NAME_RE.match(name):
        raise SchemaError(f"invalid {kind} name {name!r}")
    return name


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _read(path: Path, what: str) -> bytes:
    try:
        return path.read_bytes()
    except FileNotFoundError:
        raise NotFound(f"{what} not found: {path.name}") from None


class ProjectStore:
    """Filesystem-backed store of annotation projects."""

    def __init__(self, root: Path | str | None = None):
        self.root = Path(root) if root is not None else default_root()

    # -- projects ---------------------------------------------------------

    def _project_dir(self, project: str) -> Path:
        return self.root / _check_name("project", project)

    def create_project(self, project: str) -> Path:
        pdir = self._project_dir(project)
        pdir.mkdir(parents=True, exist_ok=True)
        marker = pdir / "project.json"
        if not marker.exists():
            doc = {"name": project, "store_version": STORE_VERSION}
            _atomic_write(marker, (json.dumps(doc, indent=2) + "\n").encode())
        return pdir

    def list_projects(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(
            p.name for p in self.root.iterdir()
            if p.is_dir() and (p / "project.json").exists())

    def has_project(self, project: str) -> bool:
        return (self._project_dir(project) / "project.json").exists()

    def _require_project(self, project: str) -> Path:
        pdir = self._project_dir(project)
        if not (pdir / "project.json").exists():
            raise NotFound(f"project not found: {project}")
        return pdir

    def save_taxonomy(self, project: str, taxonomy: PhaseTaxonomy) -> None:
        pdir = self._require_project(project)
        _atomic_write(pdir / "taxonomy.json", formats.taxonomy_to_json(taxonomy))

    def load_taxonomy(self, project: str) -> PhaseTaxonomy:
        pdir = self._require_project(project)
        return formats.taxonomy_from_json(_read(pdir / "taxonomy.json", "taxonomy"))

    # -- cases ------------------------------------------------------------

    def _case_dir(self, project: str, case_id: str) -> Path:
        return self._require_project(project) / "cases" / _check_name("case", case_id)

    def save_manifest(self, project: str, manifest: CaseManifest) -> None:
        cdir = self._case_dir(project, manifest.case_id)
        _atomic_write(cdir / "manifest.json", formats.manifest_to_json(manifest))

    def load_manifest(self, project: str, case_id: str) -> CaseManifest:
        path = self._case_dir(project, case_id) / "manifest.json"
        return formats.manifest_from_json(_read(path, "case manifest"))

    def list_cases(self, project: str) -> list[str]:
        cases = self._require_project(project) / "cases"
        if not cases.is_dir():
            return []
        return sorted(
            c.name for c in cases.iterdir()
            if c.is_dir() and (c / "manifest.json").exists())

    def has_case(self, project: str, case_id: str) -> bool:
        return (self._case_dir(project, case_id) / "manifest.json").exists()

    def _require_case(self, project: str, case_id: str) -> Path:
        cdir = self._case_dir(project, case_id)
        if not (cdir / "manifest.json").exists():
            raise NotFound(f"case not found: {case_id}")
        return cdir

    # -- tracks -----------------------------------------------------------

    def save_track(self, project: str, track: FrameTrack) -> None:
        cdir = self._require_case(project, track.case_id)
        name = _check_name("annotator", track.annotator_id)
        _atomic_write(cdir / "tracks" / f"{name}.csv", formats.write_track_csv(track))

    def load_track(self, project: str, case_id: str, annotator_id: str) -> FrameTrack:
        cdir = self._require_case(project, case_id)
        manifest = self.load_manifest(project, case_id)
        name = _check_name("annotator", annotator_id)
        data = _read(cdir / "tracks" / f"{name}.csv", "track")
        return formats.parse_track_csv(
            data, case_id=case_id, annotator_id=annotator_id, fps=manifest.fps)

    def list_tracks(self, project: str, case_id: str) -> list[str]:
        tdir = self._require_case(project, case_id) / "tracks"
        if not tdir.is_dir():
            return []
        return sorted(p.stem for p in tdir.glob("*.csv"))

    # -- predictions ------------------------------------------------------

    def save_prediction(self, project: str, model_id: str, log: PredictionLog) -> None:
        cdir = self._require_case(project, log.case_id)
        name = _check_name("model", model_id)
        _atomic_write(
            cdir / "predictions" / f"{name}.csv", formats.write_prediction_csv(log))

    def load_prediction(
        self, project: str, case_id: str, model_id: str, phase_count: int
    ) -> PredictionLog:
        cdir = self._require_case(project, case_id)
        name = _check_name("model", model_id)
        data = _read(cdir / "predictions" / f"{name}.csv", "prediction log")
        return formats.parse_prediction_csv(data, phase_count, case_id=case_id)

    # -- consensus drafts, ledgers, final tracks --------------------------

    def save_draft(self, project: str, draft: ConsensusDraft) -> None:
        cdir = self._require_case(project, draft.case_id)
        _atomic_write(cdir / "draft.csv", formats.write_track_csv(draft.merged))

    def load_draft(self, project: str, case_id: str) -> ConsensusDraft:
        """Reload a merged draft; source tracks are not rehydrated."""
        cdir = self._require_case(project, case_id)
        manifest = self.load_manifest(project, case_id)
        data = _read(cdir / "draft.csv", "consensus draft")
        merged = formats.parse_track_csv(
            data, case_id=case_id, annotator_id="consensus",
            fps=manifest.fps, provenance=Provenance.DRAFT)
        return ConsensusDraft(case_id=case_id, merged=merged, fps=manifest.fps)

    def has_draft(self, project: str, case_id: str) -> bool:
        return (self._require_case(project, case_id) / "draft.csv").exists()

    def save_ledger(
        self,
        project: str,
        case_id: str,
        ledger: ResolutionLedger,
        submissions: dict[str, int] | None = None,
    ) -> None:
        cdir = self._require_case(project, case_id)
        _atomic_write(cdir / "ledger.json", formats.ledger_to_json(ledger, submissions))

    def load_ledger(self, project: str, case_id: str) -> ResolutionLedger:
        cdir = self._require_case(project, case_id)
        path = cdir / "ledger.json"
        if not path.exists():
            return ResolutionLedger(())
        return formats.ledger_from_json(_read(path, "resolution ledger"))

    def load_ledger_submissions(self, project: str, case_id: str) -> dict[str, int]:
        cdir = self._require_case(project, case_id)
        path = cdir / "ledger.json"
        if not path.exists():
            return {}
        return formats.ledger_submissions_from_json(_read(path, "resolution ledger"))

    def save_consensus(self, project: str, track: FrameTrack) -> None:
        cdir = self._require_case(project, track.case_id)
        _atomic_write(cdir / "consensus.csv", formats.write_track_csv(track))

    def load_consensus(self, project: str, case_id: str) -> FrameTrack:
        cdir = self._require_case(project, case_id)
        manifest = self.load_manifest(project, case_id)
        data = _read(cdir / "consensus.csv", "consensus track")
        return formats.parse_track_csv(
            data, case_id=case_id, annotator_id="consensus",
            fps=manifest.fps, provenance=Provenance.CONSENSUS)

    # -- reports ----------------------------------------------------------

    def save_report(self, project: str, case_id: str, name: str, doc: dict) -> None:
        cdir = self._require_case(project, case_id)
        fname = _check_name("report", name)
        payload = (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()
        _atomic_write(cdir / "reports" / f"{fname}.json", payload)

    def load_report(self, project: str, case_id: str, name: str) -> dict:
        cdir = self._require_case(project, case_id)
        fname = _check_name("report", name)
        data = _read(cdir / "reports" / f"{fname}.json", "report")
        return json.loads(data.decode("utf-8"))
