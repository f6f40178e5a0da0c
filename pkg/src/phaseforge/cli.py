"""Command line interface.

Subcommands mirror the pipeline: validate a track, merge tracks into a
consensus draft, apply an inspector ledger, evaluate predictions, audit
published result tables, plan cross-validation splits, simulate a
streaming replay, and run the HTTP service.

Exit codes: 0 success, 2 validation or consistency failure,
1 file/schema error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import formats
from .consensus import ConsensusDraft, and_merge, apply_resolutions, blank_segments
from .errors import (
    DenseIndexViolation,
    NotFound,
    NumericError,
    PhaseForgeError,
    SchemaError,
)
from .evaluation import delta_table, eval_report, round_half_up
from .fixtures import load_fixture
from .labels import PhaseTaxonomy, Provenance, validate_track
from .replay import BufferMode, ReplayPolicy, WarmupEmission, replay
from .splits import DEFAULT_COVARIATES, stratified_splits

_IO_ERRORS = (SchemaError, DenseIndexViolation, NumericError, NotFound, OSError)

_TAXONOMY_ALIASES = {
    "cholec": "cholec_taxonomy",
    "cholecystectomy": "cholec_taxonomy",
    "gastrectomy": "gastrectomy_taxonomy",
}


def _load_taxonomy(arg: str) -> PhaseTaxonomy:
    """Builtin name or a path to a taxonomy JSON file."""
    if arg in _TAXONOMY_ALIASES:
        return load_fixture(_TAXONOMY_ALIASES[arg])
    return formats.taxonomy_from_json(Path(arg).read_bytes())


def _write_out(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.write(data.decode("utf-8"))
    else:
        Path(path).write_bytes(data)


def _cmd_validate(args) -> int:
    track = formats.parse_track_csv(Path(args.track).read_bytes())
    taxonomy = _load_taxonomy(args.taxonomy)
    report = validate_track(track, taxonomy)
    if report.ok:
        print(f"ok: {len(track)} frames, no issues")
        return 0
    for issue in report.issues:
        print(f"frame={issue.frame_index} {issue.code.value}: {issue.detail}")
    print(f"{len(report.issues)} issue(s)")
    return 2


def _cmd_consensus(args) -> int:
    tracks = [
        formats.parse_track_csv(Path(p).read_bytes(), annotator_id=Path(p).stem)
        for p in args.tracks
    ]
    draft = and_merge(tracks)
    _write_out(args.out, formats.write_track_csv(draft.merged))
    segs = blank_segments(draft)
    print(
        f"merged {len(tracks)} tracks over {len(draft.merged)} frames: "
        f"coverage {draft.coverage:.4f}, {draft.blank_frames} blank frames "
        f"in {len(segs)} segment(s)",
        file=sys.stderr,
    )
    return 0


def _cmd_resolve(args) -> int:
    merged = formats.parse_track_csv(
        Path(args.draft).read_bytes(),
        annotator_id="consensus",
        provenance=Provenance.DRAFT,
    )
    draft = ConsensusDraft(case_id=merged.case_id, merged=merged)
    ledger = formats.ledger_from_json(Path(args.ledger).read_bytes())
    final = apply_resolutions(draft, ledger)
    _write_out(args.out, formats.write_track_csv(final))
    if final.has_blank:
        remaining = blank_segments(ConsensusDraft(case_id=final.case_id, merged=final))
        print(f"{len(remaining)} blank segment(s) remain unresolved", file=sys.stderr)
        return 2
    print(f"resolved: {len(final)} frames, blank-free", file=sys.stderr)
    return 0


def _sniff_phase_count(data: bytes) -> int:
    header = data.split(b"\n", 1)[0].decode("utf-8", errors="replace")
    cols = header.split(",")
    if len(cols) < 2:
        raise SchemaError(f"not a prediction log header: {header!r}")
    return len(cols) - 1


def _cmd_eval(args) -> int:
    taxonomy = _load_taxonomy(args.taxonomy)
    log = formats.parse_prediction_csv(
        Path(args.pred).read_bytes(), taxonomy.phase_count)
    truth = formats.parse_track_csv(Path(args.truth).read_bytes())
    report = eval_report(log, truth, taxonomy)
    doc = {
        "map_value": report.map_value,
        "per_phase_ap": {str(k): v for k, v in report.per_phase_ap.items()},
        "phase_ids": list(report.phase_ids),
        "confusion": [list(row) for row in report.confusion],
        "support": {str(k): v for k, v in report.support.items()},
    }
    payload = (json.dumps(doc, indent=2) + "\n").encode("utf-8")
    _write_out(args.report, payload)
    if report.map_value is None:
        print("mAP: undefined (no phase present in overlap)", file=sys.stderr)
    else:
        print(f"mAP: {report.map_value:.4f}", file=sys.stderr)
    return 0


def _parse_results_csv(data: bytes) -> dict:
    lines = data.decode("utf-8").replace("\r\n", "\n").strip("\n").split("\n")
    if not lines or lines[0] != "model,split,annotation,ap":
        raise SchemaError("results header must be 'model,split,annotation,ap'")
    out = {}
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != 4:
            raise SchemaError(f"row {i}: expected 4 cells, got {len(parts)}")
        try:
            out[(parts[0], parts[1], parts[2])] = float(parts[3])
        except ValueError:
            raise NumericError(f"row {i}: ap {parts[3]!r} is not numeric") from None
    return out


def _cmd_deltas(args) -> int:
    results = _parse_results_csv(Path(args.results).read_bytes())
    table = delta_table(results)
    print("model,split,annotation,ap,consensus_ap,delta")
    for row in table.rows:
        for ann in sorted(row.ap_by_annotation):
            print(
                f"{row.model},{row.split},{ann},"
                f"{row.ap_by_annotation[ann]},{row.consensus_ap},"
                f"{table.display_delta(row.model, row.split, ann)}")
    for model, mean in sorted(table.mean_delta_by_model().items()):
        print(f"# mean delta {model}: {round_half_up(mean)}")
    return 0


def _cmd_splits(args) -> int:
    cases = formats.parse_metadata_csv(Path(args.metadata).read_bytes())
    covariates = (
        tuple(args.covariates.split(",")) if args.covariates else DEFAULT_COVARIATES)
    plan = stratified_splits(
        cases,
        fold_count=args.folds,
        test_size=args.test,
        covariates=covariates,
        seed=args.seed,
    )
    _write_out(args.out, formats.split_plan_to_json(plan))
    print(
        f"{args.folds} folds of {args.test} test cases "
        f"({'exhaustive' if plan.exhaustive else 'independent'}), "
        f"balance score {plan.balance_score:.6f}",
        file=sys.stderr,
    )
    return 0


def _cmd_replay(args) -> int:
    data = Path(args.pred).read_bytes()
    log = formats.parse_prediction_csv(data, _sniff_phase_count(data))
    mode = BufferMode.FULL_WINDOW_WAIT if args.mode == "wait" else BufferMode.FEATURE_QUEUE
    emission = (
        WarmupEmission.HOLD_UNKNOWN if args.emit == "hold" else WarmupEmission.SUPPRESS)
    policy = ReplayPolicy(window=args.window, mode=mode, warmup_emission=emission)
    decisions = replay(log, policy)
    _write_out(args.out, formats.write_decision_csv(decisions))
    decided = sum(1 for v in decisions.labels if v is not None)
    print(
        f"replayed {len(decisions.labels)} frames: "
        f"{len(decisions.labels) - decided} warmup, {decided} decided",
        file=sys.stderr,
    )
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(port=args.port, store_root=args.store, token=args.token, ui_dir=args.ui)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaseforge",
        description="Consensus annotation workbench for temporal phase labels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a track CSV against a taxonomy")
    p.add_argument("--track", required=True, help="track CSV file")
    p.add_argument("--taxonomy", required=True,
                   help="cholec, gastrectomy, or a taxonomy JSON file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("consensus", help="merge annotator tracks into a draft")
    p.add_argument("tracks", nargs="+", help="two or more track CSV files")
    p.add_argument("--out", required=True, help="output draft CSV (- for stdout)")
    p.set_defaults(func=_cmd_consensus)

    p = sub.add_parser("resolve", help="apply an inspector ledger to a draft")
    p.add_argument("--draft", required=True, help="draft CSV from the consensus step")
    p.add_argument("--ledger", required=True, help="resolution ledger JSON")
    p.add_argument("--out", default="-", help="output track CSV (default stdout)")
    p.set_defaults(func=_cmd_resolve)

    p = sub.add_parser("eval", help="score a prediction log against a track")
    p.add_argument("--pred", required=True, help="prediction CSV")
    p.add_argument("--truth", required=True, help="reference track CSV")
    p.add_argument("--taxonomy", required=True,
                   help="cholec, gastrectomy, or a taxonomy JSON file")
    p.add_argument("--report", default="-", help="report JSON path (default stdout)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("deltas", help="per-annotation deltas to the consensus run")
    p.add_argument("--results", required=True,
                   help="CSV with header model,split,annotation,ap")
    p.set_defaults(func=_cmd_deltas)

    p = sub.add_parser("splits", help="plan covariate-balanced cross-validation folds")
    p.add_argument("--metadata", required=True, help="case metadata CSV")
    p.add_argument("--folds", type=int, required=True)
    p.add_argument("--test", type=int, required=True, help="test cases per fold")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--covariates", default=None,
                   help="comma-separated covariate names")
    p.add_argument("--out", default="-", help="plan JSON path (default stdout)")
    p.set_defaults(func=_cmd_splits)

    p = sub.add_parser("replay", help="simulate frame-by-frame streaming decisions")
    p.add_argument("--pred", required=True, help="prediction CSV")
    p.add_argument("--window", type=int, default=16)
    p.add_argument("--mode", choices=("wait", "queue"), default="queue",
                   help="wait: buffer a full window first; queue: rolling buffer")
    p.add_argument("--emit", choices=("suppress", "hold"), default="suppress",
                   help="warmup rows: empty cells or the UNKNOWN literal")
    p.add_argument("--out", default="-", help="decision CSV path (default stdout)")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--store", default=None, help="store root directory")
    p.add_argument("--token", default=None, help="require this bearer token")
    p.add_argument("--ui", default=None, help="static UI bundle directory")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PhaseForgeError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
