"""Built-in reference data: the two surgery taxonomies and the published
benchmark AP tables used by the evaluation and audit tools.

Values were transcribed from the published tables once, reviewed
digit-for-digit, and frozen here; tests treat them as ground truth for
the arithmetic they feed (delta tables, consistency audits, deviation
reports). Keys follow the published row/column headings: models
2D-CNN-LSTM / 3D-ResNet / ECO, splits Split1..Split6, annotations
Ann1..Ann4 plus the consensus column Con.
"""

from __future__ import annotations

from .errors import NotFound
from .labels import (
    CHOLECYSTECTOMY,
    GASTRECTOMY,
    Phase,
    PhaseKind,
    PhaseTaxonomy,
)

FIXTURE_NAMES = (
    "cholec_taxonomy",
    "gastrectomy_taxonomy",
    "table1_aps",
    "table2_aps",
    "supp_table3_aps",
)

MODELS = ("2D-CNN-LSTM", "3D-ResNet", "ECO")

_CHOLEC_PHASES = (
    (0, "preparation"),
    (1, "calot triangle dissection"),
    (2, "clipping and cutting"),
    (3, "gallbladder dissection"),
    (4, "gallbladder packaging"),
    (5, "cleaning and coagulation"),
    (6, "gallbladder retraction"),
)

# ids 22-27 are workflow bookkeeping, not operative steps
_GASTRECTOMY_PHASES = (
    (1, "Trocar insertion"),
    (2, "Docking"),
    (3, "Division of less omentum up to the right side of the esophagus"),
    (4, "Liver retraction"),
    (5, "Partial (or total) omentectomy"),
    (6, "Ligation of left gastroepiploic vessels"),
    (7, "Clearance of soft tissues along the greater curvature"),
    (8, "Ligation of Right gastroepiploic vein"),
    (9, "Ligation of Right Gastroepiploic Artery"),
    (10, "Creation of window for duodenal transection"),
    (11, "Duodenal transection"),
    (12, "Ligation of right gastric artery"),
    (13, "Dissection of LN stations 12a"),
    (14, "Dissection of LN station 8 and 9"),
    (15, "Dissection of LN station 7 and ligation of left gastric artery"),
    (16, "Dissection of LN station 11p"),
    (17, "Clearance of soft tissue along the lesser curvature"),
    (18, "Gastric transection"),
    (19, "Harvesting resected specimen into Endo bag"),
    (20, "Anastomosis"),
    (21, "Retrieval of specimen"),
    (22, "Adhesiolysis"),
    (23, "Housekeeping"),
    (24, "Clean camera"),
    (25, "Junk"),
    (26, "Other procedure"),
    (27, "Unexpected surgical events"),
)

_NON_SURGICAL_FROM = 22


def _cholec_taxonomy() -> PhaseTaxonomy:
    return PhaseTaxonomy(
        surgery_kind=CHOLECYSTECTOMY,
        phases=tuple(
            Phase(id=i, name=n, kind=PhaseKind.SURGICAL) for i, n in _CHOLEC_PHASES
        ),
    )


def _gastrectomy_taxonomy() -> PhaseTaxonomy:
    return PhaseTaxonomy(
        surgery_kind=GASTRECTOMY,
        phases=tuple(
            Phase(
                id=i,
                name=n,
                kind=PhaseKind.NON_SURGICAL if i >= _NON_SURGICAL_FROM else PhaseKind.SURGICAL,
            )
            for i, n in _GASTRECTOMY_PHASES
        ),
    )


# Published per-split gastrectomy APs for each single-annotation training
# run, plus each run's reported overall mAP. Splits Split1..Split6.
_TABLE1 = {
    "2D-CNN-LSTM": {
        "Ann1": ((65.8, 59.2, 51.1, 51.7, 70.9, 67.8), 61.1),
        "Ann2": ((66.1, 60.4, 37.8, 48.1, 70.3, 72.0), 59.1),
        "Ann3": ((62.3, 58.5, 51.59, 57.1, 68.0, 68.6), 61.0),
    },
    "3D-ResNet": {
        "Ann1": ((67.8, 49.9, 52.3, 52.5, 73.5, 66.7), 60.5),
        "Ann2": ((73.2, 61.3, 51.1, 53.1, 68.7, 65.1), 61.5),
        "Ann3": ((72.9, 60.6, 57.1, 46.3, 72.9, 62.9), 67.6),
    },
    "ECO": {
        "Ann1": ((74.1, 64.4, 45.6, 57.3, 71.5, 69.6), 63.8),
        "Ann2": ((75.0, 70.9, 49.1, 60.3, 71.5, 67.7), 65.7),
        "Ann3": ((69.1, 65.5, 46.9, 55.9, 73.5, 68.6), 63.2),
    },
}

# Published cholecystectomy APs per (model, split): four single-annotation
# runs and the consensus-trained run, three cross-validation splits.
_TABLE2 = {
    "2D-CNN-LSTM": {
        "Split1": ((65.07, 63.23, 67.38, 64.77), 67.56),
        "Split2": ((59.32, 62.21, 60.21, 55.72), 64.13),
        "Split3": ((68.59, 68.8, 67.59, 68.57), 71.64),
    },
    "3D-ResNet": {
        "Split1": ((68.31, 67.52, 67.54, 65.34), 70.29),
        "Split2": ((66.84, 64.68, 68.29, 62.46), 69.95),
        "Split3": ((72.4, 72.25, 74.31, 74.16), 77.19),
    },
    "ECO": {
        "Split1": ((64.97, 63.89, 66.39, 67.13), 69.66),
        "Split2": ((60.46, 61.85, 61.26, 60.5), 65.22),
        "Split3": ((71.45, 70.73, 72.79, 72.28), 75.55),
    },
}

# Published per-phase APs (consensus-trained models).
_SUPP_TABLE3_CHOLEC = {
    "2D-CNN-LSTM": (71.8, 74.1, 36.5, 44.7, 56.8, 57.1, 37.7),
    "3D-ResNet": (78.7, 76.7, 30.6, 37.6, 60.1, 53.7, 23.4),
    "ECO": (75.8, 72.0, 42.3, 57.8, 69.2, 59.4, 44.9),
}

_SUPP_TABLE3_GASTRECTOMY = {
    "2D-CNN-LSTM": (
        64.0, 58.5, 31.2, 81.2, 74.1, 50.2, 37.9, 62.4, 60.9, 76.3,
        47.2, 39.3, 0.3, 23.3, 49.7, 38.5, 74.1, 72.5, 53.8, 75.6,
        26.9, 13.2, 76.1, 59.6, 33.1, 0.3, 0.0,
    ),
    "3D-ResNet": (
        60.6, 69.7, 40.5, 72.8, 76.1, 55.9, 57.8, 53.7, 62.5, 76.4,
        52.1, 22.7, 0.4, 62.1, 31.9, 31.2, 67.4, 90.1, 70.7, 51.4,
        53.4, 30.8, 49.0, 27.8, 71.3, 5.7, 3.8,
    ),
    "ECO": (
        70.3, 66.8, 32.2, 76.6, 72.7, 32.9, 57.4, 54.5, 72.7, 82.8,
        54.0, 26.4, 3.3, 55.8, 32.0, 23.2, 76.2, 91.0, 54.9, 62.0,
        10.6, 25.4, 88.6, 30.0, 64.0, 4.0, 0.0,
    ),
}


def _table1_aps() -> dict:
    """model -> annotation -> {"splits": {SplitK: ap}, "reported_map": ap}."""
    out = {}
    for model, anns in _TABLE1.items():
        out[model] = {}
        for ann, (split_aps, reported) in anns.items():
            out[model][ann] = {
                "splits": {f"Split{k + 1}": ap for k, ap in enumerate(split_aps)},
                "reported_map": reported,
            }
    return out


def _table2_aps() -> dict:
    """(model, split, annotation) -> ap; annotation Con is the consensus run."""
    out = {}
    for model, splits in _TABLE2.items():
        for split, (anns, con) in splits.items():
            for k, ap in enumerate(anns):
                out[(model, split, f"Ann{k + 1}")] = ap
            out[(model, split, "Con")] = con
    return out


def _supp_table3_aps() -> dict:
    """surgery kind -> model -> {phase_id: ap}."""
    cholec_ids = [i for i, _ in _CHOLEC_PHASES]
    gast_ids = [i for i, _ in _GASTRECTOMY_PHASES]
    return {
        CHOLECYSTECTOMY: {
            model: dict(zip(cholec_ids, aps))
            for model, aps in _SUPP_TABLE3_CHOLEC.items()
        },
        GASTRECTOMY: {
            model: dict(zip(gast_ids, aps))
            for model, aps in _SUPP_TABLE3_GASTRECTOMY.items()
        },
    }


_LOADERS = {
    "cholec_taxonomy": _cholec_taxonomy,
    "gastrectomy_taxonomy": _gastrectomy_taxonomy,
    "table1_aps": _table1_aps,
    "table2_aps": _table2_aps,
    "supp_table3_aps": _supp_table3_aps,
}


def load_fixture(name: str):
    """Return a built-in fixture by name; see FIXTURE_NAMES for the set."""
    try:
        loader = _LOADERS[name]
    except KeyError:
        raise NotFound(
            f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}") from None
    return loader()
