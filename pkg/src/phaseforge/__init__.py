"""Consensus annotation workbench for frame-level temporal phase labels.

Core pipeline: several annotators label every frame of a recording; the
unanimity merge keeps frames where all agree and blanks the rest; an
inspector resolves the blank segments; the final consensus track feeds
evaluation, split planning, and streaming-replay simulation.
"""

from .consensus import (
    AgreementStats,
    BlankSegment,
    BoundaryBin,
    BoundaryProfile,
    ConsensusDraft,
    FrameProvenance,
    Resolution,
    ResolutionLedger,
    and_merge,
    apply_resolutions,
    blank_segments,
    boundary_disagreement_profile,
    pairwise_agreement,
)
from .errors import (
    BlankInTrack,
    CaseMismatch,
    DenseIndexViolation,
    EmptyTrack,
    KeyMismatch,
    LengthMismatch,
    LogTooShort,
    MalformedSegments,
    MissingConsensus,
    NoOverlap,
    NotEnoughAnnotators,
    NotFound,
    NotNormalized,
    NumericError,
    OverlappingResolutions,
    PhaseForgeError,
    ResolutionOverreach,
    SchemaError,
    TooFewCases,
    UnknownCovariate,
    UnknownPhase,
)
from .evaluation import (
    ConsistencyResult,
    CrossEntropyResult,
    DeltaRow,
    DeltaTable,
    DeviationEntry,
    DeviationReport,
    EvalReport,
    PredictionLog,
    consistency_check,
    cross_entropy,
    delta_table,
    deviation_report,
    eval_report,
    phase_ap,
    round_half_up,
)
from .fixtures import FIXTURE_NAMES, MODELS, load_fixture
from .formats import (
    CaseManifest,
    ledger_from_json,
    ledger_submissions_from_json,
    ledger_to_json,
    manifest_from_json,
    manifest_to_json,
    parse_metadata_csv,
    parse_prediction_csv,
    parse_track_csv,
    split_plan_to_json,
    taxonomy_from_json,
    taxonomy_to_json,
    write_decision_csv,
    write_metadata_csv,
    write_prediction_csv,
    write_track_csv,
)
from .labels import (
    BLANK,
    FrameTrack,
    Issue,
    IssueCode,
    Phase,
    PhaseKind,
    PhaseTaxonomy,
    Provenance,
    Segment,
    SegmentTrack,
    ValidationReport,
    check_segment_invariants,
    to_frames,
    to_segments,
    transitions,
    validate_track,
)
from .replay import (
    BufferMode,
    DecisionTrack,
    Divergence,
    FrameState,
    ReplayPolicy,
    WarmupEmission,
    argmax_lowest,
    compare_offline,
    replay,
)
from .splits import (
    CaseMetadata,
    Fold,
    SplitPlan,
    stratified_splits,
)
from .store import ProjectStore, default_root

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
